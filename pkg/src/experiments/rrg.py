"""
Experiments on bounded-degree graphs: persistent disagreement on 4-regular
random graphs, the lag-2 flip bound, and the +1 fraction once almost every
vertex has settled into period two.
"""

import logging
from typing import Any, Dict, List, Optional

import numpy as np

from ..dynamics import DEFAULT_MAX_ENUM_DEGREE, DEFAULT_MAX_STEPS, flip_bound, run, validate_regularity
from ..errors import InvariantViolation
from ..generators import Rng, gen_opinions_iid, gen_random_regular, is_connected
from ..percolation import certify_frozen, find_monochromatic_cycle
from .base import FAMILIES, WEIGHTINGS, BaseExperiment, make_graph
from .report import ExperimentReport, Gate, Table
from .stats import proportion_gate, quantiles, wilson_interval

logger = logging.getLogger(__name__)


class RrgDisagreement(BaseExperiment):
    experiment_id = "rrg-disagreement"
    description = "Unanimity never reached on random 4-regular graphs; frozen cycles of both signs"
    defaults = {
        "n": 100_000,
        "d": 4,
        "q": 0.5,
        "trials": 50,
        "horizon": DEFAULT_MAX_STEPS,
        "require_connected": False,
    }

    def validate(self) -> List[str]:
        if self.params["d"] != 4:
            raise ValueError("frozen-cycle certificates need d = 4")
        q = self.params["q"]
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"q must be in [0, 1], got {q}")
        if not self.regime()["in_regime"]:
            return [f"q = {q} is outside (1/3, 2/3); gates are reported but not enforced"]
        return []

    def regime(self) -> Dict[str, Any]:
        q = self.params["q"]
        return {"q": q, "in_regime": 1.0 / 3.0 < q < 2.0 / 3.0}

    def run_trial(self, stream_id: int, rng: Rng) -> Dict[str, Any]:
        n, d = self.params["n"], self.params["d"]
        generators = self.settings("generators")
        g = gen_random_regular(
            n,
            d,
            rng.child(0),
            max_attempts=generators.get("rrg_max_attempts", 10_000),
            require_connected=self.params["require_connected"],
        )
        x0 = gen_opinions_iid(n, self.params["q"], rng.child(1))

        cycles = {s: find_monochromatic_cycle(g, x0, s) for s in (1, -1)}
        frozen = [v for cyc in cycles.values() if cyc is not None and certify_frozen(g, x0, cyc) for v in cyc]
        frozen_idx = np.asarray(frozen, dtype=np.int64)
        frozen_vals = x0.values[frozen_idx]

        def check_frozen(t: int, x: np.ndarray) -> None:
            if frozen_idx.size and not np.array_equal(x[frozen_idx], frozen_vals):
                raise InvariantViolation(f"a certified frozen vertex changed at t={t}")

        trace, outcome = run(g, x0, max_steps=self.params["horizon"], observer=check_frozen)
        flip_bound(trace, validate_regularity(g))
        return {
            "connected": is_connected(g),
            "plus_cycle": len(cycles[1]) if cycles[1] else 0,
            "minus_cycle": len(cycles[-1]) if cycles[-1] else 0,
            "both_cycles": cycles[1] is not None and cycles[-1] is not None,
            "ever_unanimous": trace.ever_unanimous(),
            "kind": outcome.kind.value,
            "entry_time": outcome.entry_time,
            "average_flips": trace.average_flips(),
            "_trace": trace,
        }

    def aggregate(self, report: ExperimentReport) -> None:
        confidence = self.threshold("confidence")
        gated = report.regime["in_regime"]
        trials = len(report.records)
        report.gates.append(proportion_gate(
            name="unanimity-never-reached",
            successes=sum(1 for r in report.records if r["ever_unanimous"]),
            trials=trials,
            threshold=self.threshold("whp_failure"),
            direction="max",
            formula="unanimity fraction at most 5% (with high probability)",
            confidence=confidence,
            gated=gated,
        ))
        report.gates.append(proportion_gate(
            name="both-sign-frozen-cycles",
            successes=sum(1 for r in report.records if r["both_cycles"]),
            trials=trials,
            threshold=self.threshold("whp_success"),
            direction="min",
            formula="both-sign certified cycles at t=0 in at least 95% of trials",
            confidence=confidence,
            gated=gated,
        ))
        report.estimates["connected_fraction"] = sum(1 for r in report.records if r["connected"]) / trials
        converged = [r["entry_time"] for r in report.records if r["entry_time"] is not None]
        report.estimates["entry_time_quantiles"] = quantiles(converged)
        report.notes.append(
            "unanimity is checked up to period-two entry; later states repeat the last two"
        )


class FlipBound(BaseExperiment):
    experiment_id = "flip-bound"
    description = "Per-vertex lag-2 flip count against 2W/epsilon"
    defaults = {
        "family": "rrg",
        "n": 10_000,
        "d": 5,
        "p": None,
        "radius": 5,
        "q": 0.5,
        "weighted": "none",
        "self_weight": 1.0,
        "trials": 20,
        "horizon": DEFAULT_MAX_STEPS,
    }

    def validate(self) -> List[str]:
        if self.params["family"] not in FAMILIES:
            raise ValueError(f"unknown family {self.params['family']!r}")
        if self.params["weighted"] not in WEIGHTINGS:
            raise ValueError(f"unknown weighting {self.params['weighted']!r}")
        if self.params["weighted"] == "odd" and int(self.params["self_weight"]) % 2 == 0:
            raise ValueError("odd weights need an odd self_weight to stay tie-free")
        return []

    def run_trial(self, stream_id: int, rng: Rng) -> Dict[str, Any]:
        g = make_graph(self.params["family"], self.params, rng)
        x0 = gen_opinions_iid(g.n, self.params["q"], rng.child(1))
        self_weight = float(self.params["self_weight"])
        max_enum = self.settings("analysis").get("max_enum_degree", DEFAULT_MAX_ENUM_DEGREE)

        params = validate_regularity(g, self_weight, max_enum)
        trace, outcome = run(g, x0, max_steps=self.params["horizon"], self_weight=self_weight)
        average, bound = flip_bound(trace, params, strict=False)
        return {
            "n": g.n,
            "epsilon": params.epsilon,
            "W": params.W,
            "average_flips": average,
            "bound": bound,
            "within": average <= bound,
            "kind": outcome.kind.value,
            "entry_time": outcome.entry_time,
            "_trace": trace,
        }

    def aggregate(self, report: ExperimentReport) -> None:
        trials = len(report.records)
        within = sum(1 for r in report.records if r["within"])
        ratios = [r["average_flips"] / r["bound"] for r in report.records]
        report.estimates["max_average_flips"] = max(r["average_flips"] for r in report.records)
        report.estimates["max_ratio_to_bound"] = max(ratios)
        report.estimates["bounds"] = sorted({r["bound"] for r in report.records})
        report.gates.append(Gate(
            name="every-trial-within-2W/epsilon",
            estimate=within / trials,
            threshold=1.0,
            direction="min",
            formula="average lag-2 flips <= 2W/epsilon with (epsilon, W) certified per graph",
            interval=wilson_interval(within, trials, self.threshold("confidence")),
        ))
        report.tables["flips"] = Table(
            header=["stream_id", "n", "epsilon", "W", "average_flips", "bound", "entry_time"],
            rows=[
                [r.stream_id, r["n"], r["epsilon"], r["W"], r["average_flips"], r["bound"], r["entry_time"]]
                for r in report.records
            ],
        )


class NearPeriodTwoBalance(BaseExperiment):
    experiment_id = "near-period2-balance"
    description = "+1 fraction at the first time all but eps*n vertices repeat at lag 2"
    defaults = {"family": "rrg", "n": 10_000, "d": 3, "eps": 0.05, "trials": 50, "horizon": DEFAULT_MAX_STEPS}

    def validate(self) -> List[str]:
        family, d, eps = self.params["family"], self.params["d"], self.params["eps"]
        if family == "rrg" and d < 3:
            raise ValueError("rrg needs d >= 3")
        if family == "gnp" and not d > 1:
            raise ValueError("gnp needs mean degree d > 1")
        if family not in ("rrg", "gnp"):
            raise ValueError(f"family must be rrg or gnp, got {family!r}")
        if not 0.0 < eps < 0.5:
            raise ValueError(f"eps must be in (0, 1/2), got {eps}")
        return []

    @staticmethod
    def first_settled_time(flips2: List[Optional[int]], limit: float) -> Optional[int]:
        """First t with #{i : x_i(t+2) != x_i(t)} <= limit."""
        for t in range(len(flips2) - 2):
            if flips2[t + 2] <= limit:
                return t
        return None

    def run_trial(self, stream_id: int, rng: Rng) -> Dict[str, Any]:
        n, eps = self.params["n"], self.params["eps"]
        params = dict(self.params)
        if params["family"] == "gnp":
            params["p"] = params["d"] / n
        g = make_graph(params["family"], params, rng)
        x0 = gen_opinions_iid(n, 0.5, rng.child(1))
        degenerate = x0.is_unanimous()

        trace, outcome = run(g, x0, max_steps=self.params["horizon"])
        t_star = self.first_settled_time(trace.flips2, eps * n)
        if t_star is None:
            return {"degenerate": degenerate, "t_star": None, "plus_fraction": None, "in_band": False}

        fraction = trace.plus_fraction(t_star)
        return {
            "degenerate": degenerate,
            "t_star": t_star,
            "plus_fraction": fraction,
            "in_band": abs(fraction - 0.5) <= eps,
            "entry_time": outcome.entry_time,
            "_trace": trace,
        }

    def aggregate(self, report: ExperimentReport) -> None:
        eps = self.params["eps"]
        floor = self.threshold("balance_fraction")
        kept = [r for r in report.records if not r["degenerate"]]
        excluded = len(report.records) - len(kept)
        if excluded:
            report.notes.append(f"{excluded} unanimous start(s) excluded from the gate")
        if not kept:
            report.notes.append("no non-degenerate trials")
            return

        hits = sum(1 for r in kept if r["in_band"])
        report.estimates["never_settled"] = sum(1 for r in kept if r["t_star"] is None)
        fractions = [r["plus_fraction"] for r in kept if r["plus_fraction"] is not None]
        report.estimates["plus_fraction_quantiles"] = quantiles(fractions)
        report.gates.append(Gate(
            name="plus-fraction-in-band",
            estimate=hits / len(kept),
            threshold=floor,
            direction="min",
            formula=f"+1 fraction in [1/2 - {eps}, 1/2 + {eps}] in at least {floor:.0%} of trials",
            interval=wilson_interval(hits, len(kept), self.threshold("confidence")),
        ))
        report.tables["balance"] = Table(
            header=["stream_id", "t_star", "plus_fraction", "in_band"],
            rows=[[r.stream_id, r["t_star"], r["plus_fraction"], r["in_band"]] for r in report.records],
        )


def exp_rrg_disagreement(n: int, q: float, trials: int, horizon: int = DEFAULT_MAX_STEPS, seed: int = 0, **kwargs) -> ExperimentReport:
    return RrgDisagreement({"n": n, "q": q, "trials": trials, "horizon": horizon}, seed=seed, **kwargs).run()


def exp_flip_bound(family: str, params: Dict[str, Any], trials: int, seed: int = 0, **kwargs) -> ExperimentReport:
    return FlipBound({**params, "family": family, "trials": trials}, seed=seed, **kwargs).run()


def exp_near_period2_balance(n: int, family: str, d: float, eps: float, trials: int, seed: int = 0, **kwargs) -> ExperimentReport:
    return NearPeriodTwoBalance(
        {"n": n, "family": family, "d": d, "eps": eps, "trials": trials}, seed=seed, **kwargs
    ).run()
