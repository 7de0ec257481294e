import json

import pandas as pd
import pytest

import circgate.cli as cli
from circgate.cli import EXIT_OK, EXIT_TOLERANCE, EXIT_VALIDATION, build_parser, main
from circgate.reports import QptReport, Table1Report


def test_table1_analytic_csv(tmp_path):
    out = tmp_path / "table1.csv"
    assert main(["table1", "--analytic-only", "--format", "csv", "--out", str(out)]) == EXIT_OK
    raw = out.read_bytes()
    assert raw.count(b"\r\n") == 31
    frame = pd.read_csv(out)
    assert set(frame.columns) >= {"preset", "quantity", "expected", "computed", "relative_deviation", "within"}
    row = frame[(frame["preset"] == "cs110-0K") & (frame["quantity"] == "omega_mhz")].iloc[0]
    assert row["expected"] == 5.6
    assert row["computed"] == pytest.approx(5.6, rel=0.02)


def test_table1_analytic_json_validates(tmp_path):
    out = tmp_path / "table1.json"
    assert main(["table1", "--analytic-only", "--out", str(out)]) == EXIT_OK
    report = Table1Report.model_validate_json(out.read_text(encoding="utf-8"))
    assert len(report.cells) == 30


def test_table1_full_exit_code_reflects_tolerances(tmp_path):
    out = tmp_path / "table1.json"
    code = main(["table1", "--out", str(out)])
    report = Table1Report.model_validate_json(out.read_text(encoding="utf-8"))
    assert all(report.checks.values())
    assert code == (EXIT_TOLERANCE if report.breaches else EXIT_OK)


@pytest.mark.parametrize("passed, expected", [(True, EXIT_OK), (False, EXIT_TOLERANCE)])
def test_table1_failed_check_sets_exit_code(monkeypatch, capsys, passed, expected):
    report = Table1Report(cells=[], checks={"vdd_assembly_n80": True, "e_o_decreasing_in_n_at_0K": passed})
    monkeypatch.setattr(cli, "build_table1", lambda analytic_only: report)
    assert main(["table1"]) == expected
    assert Table1Report.model_validate_json(capsys.readouterr().out).checks == report.checks


def test_figure_csv(tmp_path):
    out = tmp_path / "fig2.csv"
    args = ["figure", "2", "--r-min", "2", "--r-max", "4", "--points", "3", "--out", str(out)]
    assert main(args) == EXIT_OK
    frame = pd.read_csv(out)
    assert frame["R_um"].is_monotonic_increasing
    assert frame["B_GHz_n110"].iloc[0] == pytest.approx(8.71, rel=0.02)


def test_figure_json(capsys):
    assert main(["figure", "5", "--r-min", "2", "--r-max", "3", "--points", "2", "--format", "json"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert "Omega_opt_MHz_n110" in body["columns"]
    assert len(body["data"]) == 2


@pytest.mark.parametrize(
    "args",
    [
        ["figure", "2", "--r-min", "5", "--r-max", "2"],
        ["figure", "2", "--points", "1"],
        ["figure", "7"],
        ["bogus"],
        [],
    ],
)
def test_usage_errors(args, capsys):
    assert main(args) == EXIT_VALIDATION
    assert capsys.readouterr().err


def test_stirap_csv(tmp_path):
    out = tmp_path / "stirap.csv"
    assert main(["stirap", "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert (frame["kind"] == "state").sum() == 110
    assert frame["value"].dropna().iloc[0] == pytest.approx(1e-7, rel=1e-9)


def test_stirap_rejects_odd_ladder():
    assert main(["stirap", "--n-final", "7"]) == EXIT_VALIDATION


def test_qpt_is_byte_identical_across_runs(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["qpt", "--preset", "cs80-0K", "--out", str(first)]) == EXIT_OK
    assert main(["qpt", "--preset", "cs80-0K", "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    report = QptReport.model_validate_json(first.read_text(encoding="utf-8"))
    assert report.config.n == 80
    assert 0 < report.e_o < 1e-3


def test_qpt_ideal_preset(tmp_path):
    out = tmp_path / "ideal.json"
    assert main(["qpt", "--preset", "ideal", "--out", str(out)]) == EXIT_OK
    body = json.loads(out.read_text(encoding="utf-8"))
    assert body["e_o"] <= 1e-8
    assert body["config"]["tau"] == "Infinity"


def test_qpt_from_config_file_as_csv(tmp_path):
    config = tmp_path / "run.env"
    out = tmp_path / "qpt.csv"
    config.write_text(
        "N=110\nOMEGA=6.283185307179586e6\nBLOCKADE_B=6.283185307179586e11\n"
        "OMEGA_10=6.283185307179586e11\nTAU=inf\nOUTPUT_FORMAT=csv\n",
        encoding="utf-8",
    )
    assert main(["qpt", "--config", str(config), "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert len(frame) == 16
    assert set(frame.columns) == {"label", "trace_loss", "mle_converged", "e_o", "e_cb"}


def test_qpt_lists_every_validation_error(tmp_path, capsys):
    config = tmp_path / "bad.env"
    config.write_text("N=1\nTEMPERATURE=-3\nCOLOUR=blue\n", encoding="utf-8")
    assert main(["qpt", "--config", str(config)]) == EXIT_VALIDATION
    errors = json.loads(capsys.readouterr().err)["validation_errors"]
    assert len(errors) == 3


def test_qpt_unknown_preset():
    assert main(["qpt", "--preset", "nope"]) == EXIT_VALIDATION


def test_qpt_infinite_lifetime_needs_rabi_frequency(tmp_path):
    config = tmp_path / "inf.env"
    config.write_text("N=110\nTAU=inf\n", encoding="utf-8")
    assert main(["qpt", "--config", str(config)]) == EXIT_VALIDATION


def test_parser_exposes_all_verbs():
    parser = build_parser()
    for verb in ("table1", "figure", "qpt", "stirap", "serve"):
        assert parser.parse_args([verb] + (["2"] if verb == "figure" else [])).command == verb
    assert parser.parse_args(["figure", "fig4"]).which == 4
