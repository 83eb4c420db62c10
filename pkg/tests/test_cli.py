"""
End-to-end tests for the majdyn CLI: exit codes, output files and replay.
"""
import argparse
import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from cli.majdyn import main, parse_degree, parse_param
from src.errors import EXIT_BUDGET_OR_FAIL, EXIT_ERROR, EXIT_OK
from src.io_formats import read_config_comment, read_trace_csv


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv("MAJDYN_SEED", raising=False)


@pytest.fixture
def path_edge_list(tmp_path):
    path = tmp_path / "path3.txt"
    path.write_text("3 2\n0 1\n1 2\n")
    return path


def _load(path: Path):
    with open(path) as f:
        return json.load(f)


# ============================================================================
# simulate
# ============================================================================


def test_simulate_unanimous_cycle(tmp_path):
    out = tmp_path / "sim"
    code = main(["simulate", "--graph", "cycle", "--n", "8", "--opinions", "all-plus",
                 "--seed", "1", "--out", str(out)])
    assert code == EXIT_OK

    payload = _load(out / "outcome.json")
    assert payload["outcome"]["kind"] == "fixed-point"
    assert payload["outcome"]["entry_time"] == 2
    assert payload["ever_unanimous"] is True
    assert payload["regularity"]["flip_bound"] == pytest.approx(6.0)
    assert payload["config"]["command"] == "simulate"

    rows = read_trace_csv(out / "trace.csv")
    assert [r["t"] for r in rows] == [0, 1, 2]
    assert rows[0]["flips2"] is None
    assert rows[2]["flips2"] == 0
    assert all(r["unanimous"] for r in rows)
    assert read_config_comment(out / "trace.csv")["seed"] == 1


def test_simulate_gnp_json(tmp_path, capsys):
    code = main(["simulate", "--graph", "gnp", "--n", "200", "--p", "0.05", "--seed", "3",
                 "--out", str(tmp_path), "--json"])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["graph"]["n"] == 200
    assert payload["outcome"]["kind"] in ("fixed-point", "period-two")


def test_simulate_replay_reproduces_outcome(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--graph", "rrg", "--n", "100", "--d", "3", "--seed", "11",
                 "--out", str(first)]) == EXIT_OK
    assert main(["simulate", "--config", str(first / "outcome.json"), "--out", str(second)]) == EXIT_OK

    a, b = _load(first / "outcome.json"), _load(second / "outcome.json")
    assert a["outcome"] == b["outcome"]
    assert a["final_potential"] == b["final_potential"]
    assert (first / "trace.csv").read_text().splitlines()[2:] == (second / "trace.csv").read_text().splitlines()[2:]


def test_simulate_edge_list(tmp_path, path_edge_list):
    code = main(["simulate", "--edge-list", str(path_edge_list), "--opinions", "all-minus",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert _load(tmp_path / "outcome.json")["graph"]["m"] == 2


def test_simulate_bad_edge_list_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2\n0 1\n1 1\n")
    code = main(["simulate", "--edge-list", str(bad), "--out", str(tmp_path / "out")])
    assert code == EXIT_ERROR
    assert "Edge list error" in capsys.readouterr().err


def test_simulate_missing_degree_exits_1(tmp_path, capsys):
    code = main(["simulate", "--graph", "rrg", "--n", "10", "--out", str(tmp_path)])
    assert code == EXIT_ERROR
    assert "--d" in capsys.readouterr().err


def test_simulate_bad_probability_exits_1(tmp_path, capsys):
    code = main(["simulate", "--graph", "gnp", "--n", "10", "--p", "1.5", "--out", str(tmp_path)])
    assert code == EXIT_ERROR
    assert "Invalid p" in capsys.readouterr().err


def test_simulate_gnp_accepts_fractional_mean_degree(tmp_path):
    code = main(["simulate", "--graph", "gnp", "--n", "400", "--d", "2.5", "--seed", "2", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert _load(tmp_path / "outcome.json")["config"]["graph"]["d"] == 2.5


def test_simulate_rrg_rejects_fractional_degree(tmp_path, capsys):
    code = main(["simulate", "--graph", "rrg", "--n", "10", "--d", "2.5", "--out", str(tmp_path)])
    assert code == EXIT_ERROR
    assert "Invalid d: must be an integer" in capsys.readouterr().err


def test_simulate_rejects_tiny_horizon(tmp_path):
    code = main(["simulate", "--graph", "cycle", "--n", "5", "--horizon", "1", "--out", str(tmp_path)])
    assert code == EXIT_ERROR


# ============================================================================
# experiment
# ============================================================================


def test_experiment_passes(tmp_path):
    code = main(["experiment", "potential-identity", "--trials", "3", "--seed", "5",
                 "--workers", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    report = _load(tmp_path / "report.json")
    assert report["passed"] is True
    assert report["config"]["experiment"]["id"] == "potential-identity"


def test_experiment_failed_gate_exits_2(tmp_path):
    # a zero guard leaves no qualifying step, so the median growth is 0
    code = main(["experiment", "growth-heuristic", "--n", "500", "--d", "10", "--steps", "3",
                 "--trials", "2", "--workers", "1", "--threshold", "growth_guard=0",
                 "--out", str(tmp_path)])
    assert code == EXIT_BUDGET_OR_FAIL
    report = _load(tmp_path / "report.json")
    assert report["passed"] is False
    assert report["params"]["d"] == 10


def test_experiment_param_and_trace_cap(tmp_path):
    code = main(["experiment", "initial-mean-sq", "--n", "31", "--trials", "10", "--workers", "1",
                 "--trace-cap", "0", "--param", "unused_key=1", "--out", str(tmp_path)])
    assert code in (EXIT_OK, EXIT_BUDGET_OR_FAIL)
    report = _load(tmp_path / "report.json")
    assert report["traces"] == []
    assert report["params"]["unused_key"] == 1


def test_experiment_degree_parsed_like_simulate(tmp_path, capsys):
    code = main(["experiment", "initial-mean-sq", "--n", "9", "--trials", "2", "--d", "4.0", "--workers", "1",
                 "--out", str(tmp_path / "ok")])
    assert code in (EXIT_OK, EXIT_BUDGET_OR_FAIL)
    d = _load(tmp_path / "ok" / "report.json")["params"]["d"]
    assert d == 4 and isinstance(d, int)

    code = main(["experiment", "flip-bound", "--family", "rrg", "--d", "3.5", "--out", str(tmp_path / "bad")])
    assert code == EXIT_ERROR
    assert "Invalid d: must be an integer" in capsys.readouterr().err


def test_experiment_unknown_id_exits_1(tmp_path, capsys):
    code = main(["experiment", "no-such-experiment", "--out", str(tmp_path)])
    assert code == EXIT_ERROR
    assert "no-such-experiment" in capsys.readouterr().err


def test_experiment_bad_threshold_exits_1(tmp_path):
    code = main(["experiment", "initial-mean-sq", "--threshold", "confidence=high", "--out", str(tmp_path)])
    assert code == EXIT_ERROR


def test_experiment_replay(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    args = ["experiment", "initial-mean-sq", "--n", "15", "--trials", "8", "--workers", "1", "--seed", "2"]
    main(args + ["--out", str(first)])
    main(["experiment", "--config", str(first / "report.json"), "--out", str(second), "initial-mean-sq"])
    a, b = _load(first / "report.json"), _load(second / "report.json")
    assert a["records"] == b["records"]
    assert a["estimates"] == b["estimates"]


# ============================================================================
# analyze
# ============================================================================


def test_analyze_fourier(tmp_path):
    code = main(["analyze", "fourier", "--maj", "3", "--out", str(tmp_path)])
    assert code == EXIT_OK
    payload = _load(tmp_path / "analysis.json")
    assert payload["nonzero_coefficients"] == 4
    assert payload["singleton_exact"] == "1/2"
    assert payload["parseval"] == "1"
    assert (tmp_path / "fourier_maj3.csv").exists()


def test_analyze_fourier_rejects_even_arity(tmp_path):
    assert main(["analyze", "fourier", "--maj", "4", "--out", str(tmp_path)]) == EXIT_ERROR
    assert main(["analyze", "fourier", "--out", str(tmp_path)]) == EXIT_ERROR


def test_analyze_stability(tmp_path):
    code = main(["analyze", "stability", "--maj", "3", "--rho-grid", "0,0.5,1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    payload = _load(tmp_path / "analysis.json")
    assert payload["points"] == 3
    assert payload["rows"][1][1] == pytest.approx(0.75 * 0.5 + 0.25 * 0.125)
    assert payload["stability_below_rho"] is True


def test_analyze_overlap(tmp_path):
    code = main(["analyze", "overlap", "--n1", "3", "--n2", "3", "--m", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    payload = _load(tmp_path / "analysis.json")
    assert payload["correlation_exact"] == "1/4"
    assert payload["bound_holds"] is True


def test_analyze_regularity(tmp_path, path_edge_list):
    code = main(["analyze", "regularity", "--edge-list", str(path_edge_list), "--out", str(tmp_path)])
    assert code == EXIT_OK
    payload = _load(tmp_path / "analysis.json")
    assert payload["epsilon"] == 1.0
    assert payload["W"] == 3.0
    assert payload["flip_bound"] == pytest.approx(6.0)


def test_analyze_mixing(tmp_path):
    code = main(["analyze", "mixing", "--n", "300", "--p", "0.1", "--samples", "50",
                 "--seed", "4", "--out", str(tmp_path)])
    payload = _load(tmp_path / "analysis.json")
    assert code == (EXIT_OK if payload["passed"] else EXIT_BUDGET_OR_FAIL)
    assert payload["estimate"]["lambda"] <= payload["estimate"]["bound_4_sqrt_np"]


def test_analyze_mixing_convergence_failure(tmp_path, capsys):
    code = main(["analyze", "mixing", "--n", "200", "--p", "0.1", "--max-iter", "1", "--out", str(tmp_path)])
    assert code == EXIT_ERROR
    assert "Spectral estimate failed" in capsys.readouterr().err


def test_analyze_percolation(tmp_path):
    code = main(["analyze", "percolation", "--graph", "rrg", "--n", "200", "--d", "4",
                 "--p-base", "0.4", "--eps", "0.1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    payload = _load(tmp_path / "analysis.json")
    assert set(payload["clusters"]) >= {"plus", "minus"}
    assert payload["two_stage"]["effective_probability"] == pytest.approx(1 - 0.6 * 0.9)


def test_analyze_without_subcommand_exits_1():
    assert main(["analyze"]) == EXIT_ERROR


# ============================================================================
# list and misc
# ============================================================================


def test_no_command_exits_1():
    assert main([]) == EXIT_ERROR


def test_list_json(capsys):
    assert main(["list", "--json"]) == EXIT_OK
    listed = json.loads(capsys.readouterr().out)
    ids = [entry["id"] for entry in listed]
    assert len(ids) == 14
    assert "gnp-unanimity" in ids


def test_parse_degree():
    assert parse_degree("4") == 4 and isinstance(parse_degree("4"), int)
    assert parse_degree("4.0") == 4 and isinstance(parse_degree("4.0"), int)
    assert parse_degree("2.5") == 2.5
    for bad in ("0", "-3", "x", "nan"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_degree(bad)


def test_parse_param():
    assert parse_param("d_grid=[1, 2]") == ("d_grid", [1, 2])
    assert parse_param("family=rrg") == ("family", "rrg")
    assert parse_param("self-weight=3") == ("self_weight", 3)
    with pytest.raises(ValueError):
        parse_param("no-equals")
