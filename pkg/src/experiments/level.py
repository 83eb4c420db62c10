"""
The level graph, whose bottom vertex keeps changing its opinion for as
long as the graph is deep enough.

From t = 1 on, every level except the last agrees internally, and each
level copies the level above it one step later, so L_0 at time s shows
L_{s-1} at time 1. Levels three apart depend on disjoint initial
opinions, which makes x_{L_0}(2), x_{L_0}(5), ... independent fair coins.
"""

import logging
from typing import Any, Dict, List

import numpy as np

from ..dynamics import GraphVotes, LevelVotes, run
from ..errors import InvariantViolation
from ..generators import LevelGraphSpec, Rng, gen_level_graph, gen_opinions_iid
from .base import PREPARE_STREAM, BaseExperiment
from .report import ExperimentReport, Gate, Table
from .stats import fair_coin_pvalue, lag1_autocorrelation, two_sided_z, wilson_interval

logger = logging.getLogger(__name__)

MIN_DEPTH = 5


def coin_times(depth: int) -> List[int]:
    """Times s = 2, 5, 8, ... with s <= depth - 1."""
    return list(range(2, depth, 3))


def cross_check_operators(depth: int, q: float, rng: Rng, steps: int) -> None:
    """
    Run the matrix-free level operator and the explicit graph side by side.

    Raises:
        InvariantViolation: the two disagree at some step
    """
    spec = LevelGraphSpec(depth)
    explicit = GraphVotes(gen_level_graph(spec))
    implicit = LevelVotes(spec)
    x = gen_opinions_iid(spec.n, q, rng).values
    for t in range(steps):
        a = explicit.sums(x)
        b = implicit.sums(x)
        if not np.array_equal(a, b):
            raise InvariantViolation(f"level operator disagrees with the explicit graph at t={t}, depth={depth}")
        x = implicit.next_state(b)


class LevelGraphExperiment(BaseExperiment):
    experiment_id = "level-graph"
    description = "Shift identity and fair-coin opinions at the bottom of the level graph"
    defaults = {"depth": 12, "trials": 10_000, "q": 0.5, "verify_depth": 9}

    def validate(self) -> List[str]:
        if self.params["depth"] < MIN_DEPTH:
            raise ValueError(f"depth must be at least {MIN_DEPTH} to observe a shifted step")
        if not 1 <= self.params["verify_depth"] <= 12:
            raise ValueError("verify_depth must be in [1, 12]")
        return []

    def prepare(self, report: ExperimentReport) -> None:
        vd = self.params["verify_depth"]
        cross_check_operators(vd, self.params["q"], Rng(self.seed, PREPARE_STREAM), steps=vd + 2)
        report.estimates["operator_cross_check_depth"] = vd

    def run_trial(self, stream_id: int, rng: Rng) -> Dict[str, Any]:
        depth = self.params["depth"]
        spec = LevelGraphSpec(depth)
        x0 = gen_opinions_iid(spec.n, self.params["q"], rng)
        trace, outcome = run(spec, x0, max_steps=depth, record_states=True)

        starts = spec.offsets[:-1]
        slices = spec.level_slices()
        agreement = all(
            np.all(trace.state_at(t)[slices[k]] == trace.state_at(t)[starts[k]])
            for t in range(1, depth + 1)
            for k in range(depth - 1)
        )

        def level(k: int, t: int) -> int:
            return int(trace.state_at(t)[starts[k]])

        shift = all(
            level(k, t) == level(k + 1, t - 1)
            for t in range(2, depth - 1)
            for k in range(0, depth - 1 - t)
        )
        times = coin_times(depth)
        coins = [level(0, s) for s in times]
        chain = all(level(0, s) == level(s - 1, 1) for s in times)
        return {
            "agreement": bool(agreement),
            "shift": shift,
            "chain": chain,
            "coins": coins,
            "converged": outcome.converged,
            "_trace": trace,
        }

    def aggregate(self, report: ExperimentReport) -> None:
        confidence = self.threshold("confidence")
        trials = len(report.records)
        exact = (
            ("agreement", "within-level-agreement", "x_i(t) = x_j(t) for i, j in one level, t >= 1"),
            ("shift", "shift-identity", "x_{L_k}(t) = x_{L_{k+1}}(t-1) for t >= 2, k + t <= depth - 2"),
            ("chain", "bottom-reads-level-s-1", "x_{L_0}(s) = x_{L_{s-1}}(1)"),
        )
        for key, name, formula in exact:
            ok = sum(1 for r in report.records if r[key])
            report.gates.append(Gate(name=name, estimate=ok / trials, threshold=1.0, direction="min", formula=formula))

        alpha = 1.0 - confidence
        times = coin_times(self.params["depth"])
        first = [r["coins"][0] for r in report.records]
        heads = sum(1 for c in first if c == 1)
        report.gates.append(Gate(
            name="x_L0(2)-fair-coin",
            estimate=fair_coin_pvalue(heads, trials),
            threshold=alpha,
            direction="min",
            formula=f"two-sided binomial test of P(+1) = 1/2 at level {alpha:.3g}",
            interval=wilson_interval(heads, trials, confidence),
        ))

        pooled = [c for r in report.records for c in r["coins"]]
        pooled_heads = sum(1 for c in pooled if c == 1)
        pooled_pvalue = fair_coin_pvalue(pooled_heads, len(pooled))
        report.estimates["pooled_plus_fraction"] = pooled_heads / len(pooled)
        report.estimates["pooled_pvalue"] = pooled_pvalue
        report.gates.append(Gate(
            name="x_L0-sequence-frequency",
            estimate=pooled_pvalue,
            threshold=alpha,
            direction="min",
            formula=f"two-sided binomial test of P(+1) = 1/2 over all coins at times {times}",
            interval=wilson_interval(pooled_heads, len(pooled), confidence),
        ))

        rows = []
        for j, s in enumerate(times):
            plus = sum(1 for r in report.records if r["coins"][j] == 1)
            rows.append([s, plus, trials, plus / trials, fair_coin_pvalue(plus, trials)])
        report.tables["coins"] = Table(header=["time", "plus", "trials", "fraction", "pvalue"], rows=rows)
        report.gates.append(Gate(
            name="x_L0-per-time-fair-coin",
            estimate=min(row[4] for row in rows),
            threshold=alpha / len(times),
            direction="min",
            formula=f"smallest per-time binomial p-value against Bonferroni level {alpha:.3g}/{len(times)}",
        ))

        lag1 = lag1_autocorrelation([r["coins"] for r in report.records])
        report.estimates["lag1_autocorrelation"] = lag1
        pairs = trials * (len(times) - 1)
        if lag1 is None:
            report.notes.append("lag-1 autocorrelation undefined (fewer than two coin times or a constant sequence)")
        else:
            report.gates.append(Gate(
                name="x_L0-lag1-independence",
                estimate=abs(lag1),
                threshold=two_sided_z(confidence) / pairs ** 0.5,
                direction="max",
                formula=f"|lag-1 autocorrelation| <= z_(1-alpha/2) / sqrt({pairs} pairs)",
            ))
        report.estimates["converged_within_horizon"] = sum(1 for r in report.records if r["converged"]) / trials


def exp_level_graph(depth: int, trials: int, seed: int = 0, **kwargs) -> ExperimentReport:
    return LevelGraphExperiment({"depth": depth, "trials": trials}, seed=seed, **kwargs).run()
