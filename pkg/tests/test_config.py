import logging
import math

import pytest
from pydantic import ValidationError

from circgate.config import (
    CS_CLOCK_OMEGA_10,
    RunConfig,
    configure_logging,
    get_preset,
    load_presets,
    load_run_config,
    max_workers,
)


def test_presets_cover_the_table_columns():
    presets = load_presets()
    assert {"cs80-0K", "cs100-0K", "cs110-0K", "cs110-77K", "cs110-300K", "ideal"} <= set(presets)
    column = get_preset("cs110-77K")
    assert column.reference.lifetime_ms == pytest.approx(4.71)
    config = column.run_config()
    assert config.n == 110
    assert config.temperature == 77.0
    assert config.omega_10 == pytest.approx(CS_CLOCK_OMEGA_10)


def test_ideal_preset_switches_decay_off():
    config = get_preset("ideal").run_config()
    assert math.isinf(config.tau)
    assert config.blockade_B / config.omega == pytest.approx(1e5)
    assert config.omega_10 / config.omega == pytest.approx(1e5)


def test_unknown_preset():
    with pytest.raises(KeyError, match="Available"):
        get_preset("cs42-0K")


def test_run_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ValidationError) as info:
        RunConfig.model_validate({"n": 1, "temperature": -4.0, "colour": "blue"})
    locations = {error["loc"][0] for error in info.value.errors()}
    assert locations == {"n", "temperature", "colour"}


def test_load_run_config_layers(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("N=100\nTEMPERATURE=4\n# comment\nSHOTS=1000\n", encoding="utf-8")
    config = load_run_config(path=str(path), preset="cs110-300K", seed=5, output_format=None)
    assert config.n == 100
    assert config.temperature == 4.0
    assert config.shots == 1000
    assert config.seed == 5
    assert config.output_format == "json"


def test_load_run_config_reports_file_errors(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("N=110\nSEPARATION=-1\nFOO=bar\n", encoding="utf-8")
    with pytest.raises(ValidationError) as info:
        load_run_config(path=str(path))
    assert len(info.value.errors()) == 2


def test_max_workers_from_environment(monkeypatch):
    monkeypatch.setenv("CIRCGATE_MAX_WORKERS", "2")
    assert max_workers() == 2
    monkeypatch.delenv("CIRCGATE_MAX_WORKERS")
    assert max_workers() == 4


def test_configure_logging_level_sources(monkeypatch):
    calls = []
    monkeypatch.setattr(logging, "basicConfig", lambda **kwargs: calls.append(kwargs))
    monkeypatch.setenv("CIRCGATE_LOG_LEVEL", "debug")
    configure_logging()
    configure_logging("warning")
    assert [call["level"] for call in calls] == ["DEBUG", "WARNING"]
    assert "%(name)s" in calls[0]["format"]
