"""
Tests for the experiment registry, the trial pipeline and each experiment
at small parameters.

Statistical gates are not asserted for a particular seed; exact gates
(potential identity, flip bound, shift identity, Fourier formulas) are.
"""
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import UnknownExperimentError
from src.experiments import REGISTRY, ExperimentReport, Gate, get_experiment, list_experiments, make_graph
from src.experiments.invariants import all_states, exhaustive_zoo
from src.experiments.level import LevelGraphExperiment, coin_times
from src.experiments.moments import exact_initial_mean_sq
from src.experiments.report import TrialRecord
from src.experiments.rrg import NearPeriodTwoBalance
from src.experiments.stats import (
    fair_coin_pvalue,
    lag1_autocorrelation,
    mean_interval,
    proportion_gate,
    quantiles,
    two_sided_z,
    wilson_interval,
)
from src.generators import Rng


def _run(experiment_id, seed=7, **params):
    cls = get_experiment(experiment_id)
    return cls(params, seed=seed, workers=1).run()


def _comparable(report):
    data = report.to_dict()
    data.pop("wall_clock_seconds")
    return data


# ============================================================================
# Registry
# ============================================================================


def test_registry_ids():
    expected = {
        "initial-mean-sq", "time1-moments", "growth-heuristic", "gnp-unanimity",
        "minority-residue", "mixing-lemma", "rrg-disagreement", "flip-bound",
        "near-period2-balance", "level-graph", "potential-identity",
        "period-two-exhaustive", "fourier-oracles", "phase-sweep",
    }
    assert set(REGISTRY) == expected
    ids = [eid for eid, _ in list_experiments()]
    assert ids == sorted(ids)


def test_unknown_experiment():
    with pytest.raises(UnknownExperimentError) as exc:
        get_experiment("no-such-experiment")
    assert "no-such-experiment" in str(exc.value)


def test_make_graph_rejects_unknown_family():
    with pytest.raises(ValueError):
        make_graph("hypercube", {"n": 8}, Rng(0))
    with pytest.raises(ValueError):
        make_graph("cycle", {"n": 8, "weighted": "heavy"}, Rng(0))


def test_make_graph_gnp_from_mean_degree():
    g = make_graph("gnp", {"n": 400, "d": 4}, Rng(1))
    assert g.n == 400
    assert not g.is_weighted
    assert make_graph("rrg", {"n": 20, "d": 3, "weighted": "odd"}, Rng(1)).is_weighted


# ============================================================================
# Pipeline
# ============================================================================


def test_report_is_reproducible():
    a = _run("initial-mean-sq", n=20, trials=200)
    b = _run("initial-mean-sq", n=20, trials=200)
    assert _comparable(a) == _comparable(b)


def test_report_independent_of_worker_count():
    cls = get_experiment("initial-mean-sq")
    serial = cls({"n": 15, "trials": 40}, seed=3, workers=1).run()
    parallel = cls({"n": 15, "trials": 40}, seed=3, workers=2).run()
    assert _comparable(serial) == _comparable(parallel)


def test_records_sorted_by_stream_id():
    report = _run("initial-mean-sq", n=10, trials=25)
    assert [r.stream_id for r in report.records] == list(range(25))


def test_report_write_and_reload(tmp_path):
    cls = get_experiment("growth-heuristic")
    report = cls({"n": 2000, "d": 20, "steps": 4, "trials": 3}, seed=5, trace_cap=2).run()
    written = report.write(tmp_path)
    names = {p.name for p in written}
    assert {"report.json", "trajectory.csv", "trace_0000.csv", "trace_0001.csv"} <= names
    assert "trace_0002.csv" not in names

    data = json.loads((tmp_path / "report.json").read_text())
    reloaded = ExperimentReport.from_dict(data)
    assert reloaded.experiment_id == "growth-heuristic"
    assert reloaded.passed == report.passed
    assert [g.name for g in reloaded.gates] == [g.name for g in report.gates]


def test_threshold_override():
    cls = get_experiment("gnp-unanimity")
    exp = cls({"n": 101, "p": 0.5, "trials": 1}, thresholds={"unanimity_min": 0.9})
    assert exp.threshold("unanimity_min") == 0.9
    assert exp.threshold("confidence") == 0.95


def test_none_params_keep_defaults():
    cls = get_experiment("time1-moments")
    exp = cls({"n": None, "trials": 5})
    assert exp.params["n"] == cls.defaults["n"]
    assert exp.params["trials"] == 5


# ============================================================================
# Moments
# ============================================================================


def test_exact_initial_mean_square_is_one_over_n():
    for n in (1, 2, 7, 30):
        assert exact_initial_mean_sq(n) == Fraction(1, n)


def test_initial_mean_square_estimate():
    report = _run("initial-mean-sq", n=10, trials=2000)
    assert abs(report.estimates["mean_m0_sq"] - 0.1) < 0.02
    assert report.estimates["exact_mean_m0_sq"] == pytest.approx(0.1)
    assert report.gate("mean-m0-sq-contains-1/n").threshold == pytest.approx(0.1)


def test_time1_moments_rejects_even_n():
    with pytest.raises(ValueError):
        _run("time1-moments", n=100, p=0.1, trials=2)


def test_time1_moments_small():
    report = _run("time1-moments", n=201, p=0.3, trials=30)
    assert {"mean_sgn_m0_m1", "mean_m1_sq"} <= set(report.estimates)
    names = [g.name for g in report.gates]
    assert "sign-correlation-lower-bound" in names
    assert "second-moment-upper-bound" in names
    assert not report.gate("sign-correlation-above-.006sqrt(p)").gated


def test_growth_heuristic_table():
    report = _run("growth-heuristic", n=2000, d=20, steps=4, trials=2)
    table = report.tables["trajectory"]
    assert table.header[0] == "stream_id"
    assert {row[0] for row in table.rows} == {0, 1}


# ============================================================================
# G(n, p)
# ============================================================================


def test_gnp_unanimity_rejects_short_horizon():
    with pytest.raises(ValueError):
        _run("gnp-unanimity", n=101, p=0.5, trials=1, horizon=3)


def test_gnp_unanimity_out_of_regime_is_ungated():
    report = _run("gnp-unanimity", n=401, p=0.05, trials=4, horizon=6)
    assert not report.regime["in_regime"]
    assert all(not g.gated for g in report.gates)
    assert report.passed
    assert any("not enforced" in note for note in report.notes)


def test_gnp_unanimity_in_regime():
    report = _run("gnp-unanimity", n=1001, p=0.2, trials=6, horizon=6)
    assert report.regime["in_regime"]
    assert report.gate("unanimous-by-t4").gated
    assert not report.gate("unanimous-by-t3").gated
    assert 0.0 <= report.estimates["fraction_by_t4"] <= 1.0
    assert len(report.tables["unanimity_times"].rows) == 6


def test_minority_residue_small():
    report = _run("minority-residue", n=501, p=0.2, trials=4)
    assert "r2_quantiles" in report.estimates
    assert report.estimates["envelope_c_over_p2"] == pytest.approx(1.0 / 0.04)
    assert len(report.tables["residue"].rows) <= 4


def test_mixing_lemma_small():
    report = _run("mixing-lemma", n=300, p=0.1, trials=3, samples=200)
    assert report.estimates["bound_4_sqrt_np"] == pytest.approx(4 * math.sqrt(30))
    assert report.gate("lambda-below-4sqrt(np)").estimate == 1.0
    assert report.gate("sampled-discrepancy-below-lambda").estimate == 1.0


# ============================================================================
# Bounded degree
# ============================================================================


def test_rrg_disagreement_requires_degree_four():
    with pytest.raises(ValueError):
        _run("rrg-disagreement", n=100, d=3, trials=1)


def test_rrg_frozen_cycles_block_unanimity():
    report = _run("rrg-disagreement", n=2000, trials=3, horizon=200)
    for record in report.records:
        if record["both_cycles"]:
            assert not record["ever_unanimous"]
    assert report.regime["in_regime"]


def test_flip_bound_weighted_rrg():
    report = _run("flip-bound", family="rrg", n=200, d=5, weighted="odd", trials=3, horizon=500)
    assert report.passed
    assert all(r["epsilon"] >= 1.0 for r in report.records)


def test_flip_bound_tree_ball():
    report = _run("flip-bound", family="tree-ball", d=3, radius=4, trials=2, horizon=200)
    assert report.gate("every-trial-within-2W/epsilon").passed


def test_flip_bound_rejects_even_self_weight_with_odd_weights():
    with pytest.raises(ValueError):
        _run("flip-bound", family="cycle", n=10, weighted="odd", self_weight=2.0, trials=1)


def test_first_settled_time():
    assert NearPeriodTwoBalance.first_settled_time([None, None, 9, 4, 0], 5) == 1
    assert NearPeriodTwoBalance.first_settled_time([None, None, 9], 5) is None


def test_near_period_two_balance_small():
    report = _run("near-period2-balance", n=1000, d=3, eps=0.1, trials=3, horizon=300)
    assert len(report.tables["balance"].rows) == 3


def test_near_period_two_balance_rejects_family():
    with pytest.raises(ValueError):
        _run("near-period2-balance", family="complete", n=10, d=3, trials=1)


# ============================================================================
# Level graph
# ============================================================================


def test_coin_times():
    assert coin_times(12) == [2, 5, 8, 11]
    assert coin_times(6) == [2, 5]


def test_level_graph_exact_gates():
    report = _run("level-graph", depth=8, trials=30, verify_depth=6)
    for name in ("within-level-agreement", "shift-identity", "bottom-reads-level-s-1"):
        assert report.gate(name).passed, name
    assert report.estimates["operator_cross_check_depth"] == 6
    assert len(report.tables["coins"].rows) == len(coin_times(8))


def test_level_graph_rejects_shallow_depth():
    with pytest.raises(ValueError):
        _run("level-graph", depth=3, trials=1)


def _level_report(coin_rows):
    """Aggregate hand-made level-graph records (depth 12, four coin times)."""
    experiment = LevelGraphExperiment({"depth": 12, "trials": len(coin_rows)}, seed=0)
    report = ExperimentReport(experiment_id="level-graph", params=dict(experiment.params), seed=0,
                              trials=len(coin_rows))
    for i, coins in enumerate(coin_rows):
        report.records.append(TrialRecord(stream_id=i, values={
            "agreement": True, "shift": True, "chain": True, "coins": coins, "converged": False,
        }))
    experiment.aggregate(report)
    return report


def _bit_coins(i):
    # the four low bits of i: every column balanced, columns independent over 0..255
    return [1 if (i >> j) & 1 else -1 for j in range(4)]


def test_level_graph_balanced_coins_pass():
    report = _level_report([_bit_coins(i) for i in range(256)])
    assert report.passed
    assert report.estimates["lag1_autocorrelation"] == pytest.approx(0.0, abs=1e-12)
    for name in ("x_L0-sequence-frequency", "x_L0-per-time-fair-coin", "x_L0-lag1-independence"):
        assert report.gate(name).gated


def test_level_graph_biased_later_coin_fails():
    rows = [_bit_coins(i) for i in range(256)]
    for coins in rows:
        coins[2] = 1  # time 8 always +1
    report = _level_report(rows)
    assert report.gate("x_L0(2)-fair-coin").passed
    assert not report.gate("x_L0-sequence-frequency").passed
    assert not report.gate("x_L0-per-time-fair-coin").passed
    assert not report.passed


def test_level_graph_correlated_coins_fail():
    # each column is balanced, but the whole sequence repeats its first coin
    rows = [[1 if i % 2 == 0 else -1] * 4 for i in range(256)]
    report = _level_report(rows)
    assert report.gate("x_L0-sequence-frequency").passed
    assert report.gate("x_L0-per-time-fair-coin").passed
    assert not report.gate("x_L0-lag1-independence").passed
    assert not report.passed


def test_level_graph_single_coin_time_has_no_lag_gate():
    experiment = LevelGraphExperiment({"depth": 5, "trials": 4}, seed=0)
    report = ExperimentReport(experiment_id="level-graph", params=dict(experiment.params), seed=0, trials=4)
    for i, c in enumerate([1, -1, 1, -1]):
        report.records.append(TrialRecord(stream_id=i, values={
            "agreement": True, "shift": True, "chain": True, "coins": [c], "converged": False,
        }))
    experiment.aggregate(report)
    names = [g.name for g in report.gates]
    assert "x_L0-lag1-independence" not in names
    assert report.estimates["lag1_autocorrelation"] is None
    assert report.passed


# ============================================================================
# Exact checks
# ============================================================================


def test_potential_identity_over_zoo():
    report = _run("potential-identity", trials=12, n_min=10, n_max=60, horizon=500)
    assert report.passed, report.notes
    assert len(report.estimates["runs_by_family"]) == 12


def test_all_states_enumeration():
    X = all_states(3)
    assert X.shape == (3, 8)
    assert X[:, 0].tolist() == [1, 1, 1]
    assert X[:, 5].tolist() == [-1, 1, -1]


def test_exhaustive_zoo_listing():
    zoo = exhaustive_zoo(4, 2)
    assert ("cycle-3", "cycle", 3) in zoo
    assert ("path-1", "path", 1) in zoo
    assert sum(1 for _, family, _ in zoo if family == "gnp") == 2


def test_period_two_exhaustive_small():
    report = _run("period-two-exhaustive", n_max=6, gnp_instances=2, horizon=100)
    assert report.trials == 4 + 6 + 6 + 2
    assert report.passed
    assert report.estimates["states_checked"] > 0


def test_fourier_oracles_small():
    report = _run("fourier-oracles", k_max=7, rho_points=11, samples=2000)
    assert report.trials == 4
    assert report.passed
    assert len(report.tables["stability"].rows) == 4 * 11
    assert "stability" not in report.records[0].values


def test_phase_sweep_is_ungated():
    report = _run("phase-sweep", n=200, d_grid="2,8", q_grid="0.5", trials=2, horizon=200)
    assert report.gates == []
    assert report.passed
    assert len(report.tables["sweep"].rows) == 2


@pytest.mark.slow
def test_gnp_unanimity_desk_scale():
    report = _run("gnp-unanimity", n=4096, p=0.06, trials=200, horizon=10)
    assert report.estimates["fraction_by_t4"] > 0.4


@pytest.mark.slow
def test_rrg_disagreement_desk_scale():
    report = _run("rrg-disagreement", n=100_000, trials=5)
    assert not any(r["ever_unanimous"] for r in report.records)


# ============================================================================
# Statistics helpers
# ============================================================================


def test_wilson_interval_brackets_estimate():
    low, high = wilson_interval(30, 100)
    assert low < 0.3 < high
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_mean_interval_single_value():
    assert mean_interval([2.5]) == (2.5, 2.5, 2.5)


def test_quantiles_keys():
    q = quantiles(range(101))
    assert q["q50"] == pytest.approx(50.0)
    assert set(q) == {"q10", "q25", "q50", "q75", "q90"}
    assert quantiles([]) == {}


def test_fair_coin_pvalue():
    assert fair_coin_pvalue(50, 100) == pytest.approx(1.0)
    assert fair_coin_pvalue(100, 100) < 1e-20


def test_two_sided_z():
    assert two_sided_z(0.95) == pytest.approx(1.959964, abs=1e-5)
    assert two_sided_z(0.99) > two_sided_z(0.95)


def test_lag1_autocorrelation():
    assert lag1_autocorrelation([[1, -1, 1, -1, 1]]) == pytest.approx(-1.0)
    assert lag1_autocorrelation([[1]]) is None


def test_proportion_gate_falls_back_to_point_estimate():
    gate = proportion_gate("g", 3, 3, 0.95, "min", "f")
    assert gate.bound is None
    assert gate.passed
    assert "cannot resolve" in gate.note


def test_proportion_gate_fifty_trials_uses_point_estimates():
    low = proportion_gate("both-sign", 48, 50, 0.95, "min", "f")
    assert low.bound is None and low.passed
    high = proportion_gate("unanimity", 2, 50, 0.05, "max", "f")
    assert high.bound is None and high.passed
    assert not proportion_gate("unanimity", 3, 50, 0.05, "max", "f").passed
    # from 73 trials on, an all-success outcome has a lower bound of at least 0.95
    assert proportion_gate("both-sign", 80, 80, 0.95, "min", "f").bound is not None


def test_proportion_gate_uses_wilson_bound():
    gate = proportion_gate("g", 990, 1000, 0.95, "min", "f")
    assert gate.bound is not None and gate.bound > 0.95
    assert gate.passed


def test_gate_directions():
    assert Gate("a", 0.5, 0.4, "min", "f").passed
    assert not Gate("a", 0.5, 0.4, "max", "f").passed
    assert Gate("a", 0.5, 0.4, "contains", "f", interval=(0.3, 0.6)).passed
    assert not Gate("a", 0.5, 0.7, "contains", "f", interval=(0.3, 0.6)).passed
