"""
Tests for configuration loading, seed resolution and RunConfig echo/replay.
"""
import json
import logging
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src import __version__
from src.config import (
    PROJECT_ROOT,
    RunConfig,
    get_output_path,
    load_config,
    resolve_path,
    resolve_seed,
    setup_logging,
)
from src.errors import ConfigError


@pytest.fixture
def overlay(tmp_path):
    path = tmp_path / "overlay.json"
    path.write_text(json.dumps({"dynamics": {"horizon": 50}, "defaults": {"seed": 99}}))
    return path


def test_load_default_config():
    config = load_config()
    assert config["dynamics"]["horizon"] == 10000
    assert config["analysis"]["max_enum_degree"] == 20
    assert "experiments" in config


def test_overlay_is_deep_merged(overlay):
    config = load_config(str(overlay))
    assert config["dynamics"]["horizon"] == 50
    # siblings of an overridden key survive
    assert config["dynamics"]["self_weight"] == 1.0
    assert config["defaults"]["seed"] == 99
    assert config["defaults"]["out_dir"] == "runs"


def test_overlay_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(broken))


def test_resolve_path():
    assert resolve_path("config/majdyn.json") == PROJECT_ROOT / "config" / "majdyn.json"
    assert resolve_path("/tmp/x.json") == Path("/tmp/x.json")
    assert not str(resolve_path("~/x.json")).startswith("~")


def test_seed_precedence(monkeypatch):
    config = {"defaults": {"seed": 5}}
    monkeypatch.delenv("MAJDYN_SEED", raising=False)
    assert resolve_seed(None, config) == 5
    assert resolve_seed(None) == 0

    monkeypatch.setenv("MAJDYN_SEED", "17")
    assert resolve_seed(None, config) == 17
    assert resolve_seed(3, config) == 3


def test_seed_env_must_be_integer(monkeypatch):
    monkeypatch.setenv("MAJDYN_SEED", "seven")
    with pytest.raises(ConfigError):
        resolve_seed(None)


def test_get_output_path_creates_directory(tmp_path):
    target = tmp_path / "runs" / "deep"
    assert get_output_path(str(target)) == target
    assert target.is_dir()
    assert get_output_path(str(target), "trace.csv") == target / "trace.csv"


def test_setup_logging_writes_file(tmp_path):
    log_file = tmp_path / "majdyn.log"
    setup_logging("DEBUG", str(log_file))
    logging.getLogger("majdyn.test").debug("hello from the test")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "hello from the test" in log_file.read_text()
    assert logging.getLogger().level == logging.DEBUG
    setup_logging("WARNING")


def test_run_config_round_trip():
    rc = RunConfig(
        command="simulate",
        graph={"family": "gnp", "n": 100, "p": 0.1},
        dynamics={"horizon": 20},
        seed=4,
        out_dir="runs/x",
    )
    data = rc.to_dict()
    assert data["version"] == __version__
    assert RunConfig.from_dict(data) == rc


def test_run_config_requires_command():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"seed": 1})


def test_run_config_from_report_unwraps_echo(tmp_path):
    rc = RunConfig(command="experiment", experiment={"id": "initial-mean-sq", "params": {"n": 9}}, seed=8)
    report = tmp_path / "report.json"
    report.write_text(json.dumps({"experiment_id": "initial-mean-sq", "config": rc.to_dict()}))
    loaded = RunConfig.from_file(str(report))
    assert loaded.experiment["params"] == {"n": 9}
    assert loaded.seed == 8

    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps(rc.to_dict()))
    assert RunConfig.from_file(str(bare)) == rc


def test_run_config_from_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_file(str(tmp_path / "nope.json"))
