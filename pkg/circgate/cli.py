"""Command-line entry point: ``python -m circgate <verb> ...``.

Exit codes: 0 success, 1 validation or usage error, 2 tolerance breach or failed
consistency check in ``table1``, 3 numerical failure.
"""
import argparse
import json
import logging
import sys

import pandas as pd
from pydantic import ValidationError

from circgate.config import configure_logging, load_run_config
from circgate.exceptions import ContractViolationError, DomainError, NotPositiveSemidefiniteError, \
    NumericalFailureError
from circgate.reports import FIGURES, FigureGrid, build_qpt_report, build_table1, stirap_frame

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TOLERANCE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(parser):
    parser.add_argument("--out", help="Output path (stdout when omitted)")
    parser.add_argument("--format", choices=["csv", "json"], help="Output format")
    parser.add_argument("--log-level", default=None, help="Logging level")


def _figure_number(text):
    return int(text.lower().removeprefix("fig"))


def build_parser():
    parser = _Parser(prog="circgate", description="Circular-Rydberg blockade gate calculator")
    sub = parser.add_subparsers(dest="command", required=True)

    table1 = sub.add_parser("table1", help="Computed vs reference gate-error table")
    _common(table1)
    table1.add_argument("--analytic-only", action="store_true", help="Skip the QPT rows")

    figure = sub.add_parser("figure", help="Figure data series as CSV")
    _common(figure)
    figure.add_argument("which", type=_figure_number, choices=sorted(FIGURES), help="2-5 or fig2-fig5")
    figure.add_argument("--r-min", type=float, default=1.0, help="Smallest separation (um)")
    figure.add_argument("--r-max", type=float, default=10.0, help="Largest separation (um)")
    figure.add_argument("--points", type=int, default=46)
    figure.add_argument("--n-min", type=int, default=20)
    figure.add_argument("--n-max", type=int, default=120)
    figure.add_argument("--temperature", type=float, default=0.0)

    qpt = sub.add_parser("qpt", help="Full simulated process tomography")
    _common(qpt)
    qpt.add_argument("--config", help="KEY=value configuration file")
    qpt.add_argument("--preset", help="Named preset, e.g. cs110-0K")
    qpt.add_argument("--seed", type=int)
    qpt.add_argument("--shots", type=int, help="Enable the sampling mode with this many shots per setting")

    stirap = sub.add_parser("stirap", help="STIRAP ladder and intermediate-state error")
    _common(stirap)
    stirap.add_argument("--n-final", type=int, default=112)

    serve = sub.add_parser("serve", help="Run the HTTP service")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--log-level", default=None)
    return parser


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)


def _frame_text(frame, fmt):
    if fmt == "json":
        return frame.to_json(orient="split", index=False, indent=2) + "\n"
    return frame.to_csv(index=False, lineterminator="\r\n")


def cmd_table1(args):
    report = build_table1(analytic_only=args.analytic_only)
    if (args.format or "json") == "json":
        _emit(report.model_dump_json(indent=2) + "\n", args.out)
    else:
        _emit(_frame_text(report.to_frame(), "csv"), args.out)
    for cell in report.breaches:
        logger.warning(
            f"{cell.preset} {cell.quantity}: computed {cell.computed:.4g} vs {cell.expected:.4g} "
            f"({cell.relative_deviation:+.1%}) outside {cell.tolerance_kind} tolerance {cell.tolerance}"
        )
    failed = [name for name, passed in report.checks.items() if not passed]
    for name in failed:
        logger.warning(f"Consistency check failed: {name}")
    return EXIT_TOLERANCE if report.breaches or failed else EXIT_OK


def cmd_figure(args):
    try:
        grid = FigureGrid(r_min_um=args.r_min, r_max_um=args.r_max, points=args.points, n_min=args.n_min,
                          n_max=args.n_max, temperature=args.temperature)
    except ValidationError as exc:
        raise UsageError(f"Invalid grid: {exc}") from exc
    frame = FIGURES[args.which](grid)
    _emit(_frame_text(frame, args.format or "csv"), args.out)
    return EXIT_OK


def cmd_qpt(args):
    config = load_run_config(path=args.config, preset=args.preset, seed=args.seed, shots=args.shots,
                             output_format=args.format, output_path=args.out)
    report = build_qpt_report(config)
    if config.output_format == "csv":
        text = _frame_text(_qpt_summary_frame(report), "csv")
    else:
        text = report.model_dump_json(indent=2) + "\n"
    _emit(text, config.output_path)
    return EXIT_OK


def _qpt_summary_frame(report):
    rows = [{"label": record.label, "trace_loss": record.trace_loss,
             "mle_converged": record.reconstruction.converged}
            for record in report.records]
    frame = pd.DataFrame(rows)
    frame["e_o"] = report.e_o
    frame["e_cb"] = report.e_cb
    return frame


def cmd_stirap(args):
    frame = stirap_frame(args.n_final)
    _emit(_frame_text(frame, args.format or "csv"), args.out)
    return EXIT_OK


def cmd_serve(args):
    from circgate.api import run_server

    run_server(args.host, args.port)
    return EXIT_OK


COMMANDS = {
    "table1": cmd_table1,
    "figure": cmd_figure,
    "qpt": cmd_qpt,
    "stirap": cmd_stirap,
    "serve": cmd_serve,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_VALIDATION
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_VALIDATION
    except ValidationError as exc:
        errors = [f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors()]
        sys.stderr.write(json.dumps({"validation_errors": errors}, indent=2) + "\n")
        logger.error(f"Configuration rejected with {len(errors)} error(s)")
        return EXIT_VALIDATION
    except (NumericalFailureError, NotPositiveSemidefiniteError) as exc:
        logger.error(f"Numerical failure: {exc}", exc_info=True)
        return EXIT_NUMERICAL
    except (DomainError, ContractViolationError, KeyError) as exc:
        logger.error(f"Invalid input: {exc}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
