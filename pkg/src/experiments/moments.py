"""
Moment checks of the global mean: E[m_0^2], the time-1 moments on G(n,p),
and the growth of m_t^2 per step on sparse G(n, d/n).
"""

import logging
import math
from fractions import Fraction
from typing import Any, Dict, List

import numpy as np

from ..analysis import one_sided_chebyshev
from ..dynamics import run, step
from ..generators import Rng, gen_gnp, gen_opinions_iid
from .base import BaseExperiment
from .report import ExperimentReport, Gate, Table
from .stats import mean_interval, proportion_gate, quantiles

logger = logging.getLogger(__name__)

# Exact enumeration of E[m_0^2] is reported up to this n
EXACT_MEAN_SQ_MAX_N = 64


def exact_initial_mean_sq(n: int) -> Fraction:
    """E[m_0^2] for n uniform +/-1 opinions, summed over the number of +1's."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    total = sum(math.comb(n, k) * (2 * k - n) ** 2 for k in range(n + 1))
    return Fraction(total, n * n * (1 << n))


class InitialMeanSquare(BaseExperiment):
    experiment_id = "initial-mean-sq"
    description = "Monte Carlo E[m_0^2] against 1/n"
    defaults = {"n": 100, "trials": 100_000}

    def validate(self) -> List[str]:
        if self.params["n"] < 1:
            raise ValueError("n must be at least 1")
        return []

    def run_trial(self, stream_id: int, rng: Rng) -> Dict[str, Any]:
        x0 = gen_opinions_iid(self.params["n"], 0.5, rng)
        return {"m0_sq": x0.mean() ** 2}

    def aggregate(self, report: ExperimentReport) -> None:
        n = self.params["n"]
        values = [r["m0_sq"] for r in report.records]
        mean, low, high = mean_interval(values, self.threshold("confidence"))
        report.estimates["mean_m0_sq"] = mean
        report.estimates["interval"] = [low, high]
        if n <= EXACT_MEAN_SQ_MAX_N:
            report.estimates["exact_mean_m0_sq"] = float(exact_initial_mean_sq(n))
        report.gates.append(Gate(
            name="mean-m0-sq-contains-1/n",
            estimate=mean,
            threshold=1.0 / n,
            direction="contains",
            interval=(low, high),
            formula=f"1/n at n={n}",
        ))


class TimeOneMoments(BaseExperiment):
    experiment_id = "time1-moments"
    description = "E[sgn(m_0) m_1] and E[m_1^2] on G(n,p) against their bounds"
    defaults = {"n": 2001, "p": 0.1, "trials": 500}

    def validate(self) -> List[str]:
        n, p = self.params["n"], self.params["p"]
        if n < 1 or n % 2 == 0:
            raise ValueError(f"time1-moments needs an odd n, got {n}")
        if not 0.0 < p <= 1.0:
            raise ValueError(f"p must be in (0, 1], got {p}")
        return []

    def regime(self) -> Dict[str, Any]:
        n, p = self.params["n"], self.params["p"]
        return {"p_sqrt_n": p * math.sqrt(n)}

    def run_trial(self, stream_id: int, rng: Rng) -> Dict[str, Any]:
        n, p = self.params["n"], self.params["p"]
        g = gen_gnp(n, p, rng.child(0))
        x0 = gen_opinions_iid(n, 0.5, rng.child(1))
        x1 = step(g, x0)
        m0, m1 = x0.mean(), x1.mean()
        return {"w": float(np.sign(m0)) * m1, "m1_sq": m1 * m1}

    def aggregate(self, report: ExperimentReport) -> None:
        n, p = self.params["n"], self.params["p"]
        confidence = self.threshold("confidence")
        w = [r["w"] for r in report.records]
        m1_sq = [r["m1_sq"] for r in report.records]

        w_mean, w_low, w_high = mean_interval(w, confidence)
        sq_mean, sq_low, sq_high = mean_interval(m1_sq, confidence)
        report.estimates.update({
            "mean_sgn_m0_m1": w_mean,
            "mean_sgn_m0_m1_interval": [w_low, w_high],
            "mean_m1_sq": sq_mean,
            "mean_m1_sq_interval": [sq_low, sq_high],
        })

        # The estimate may sit one half-width below the bound
        report.gates.append(Gate(
            name="sign-correlation-lower-bound",
            estimate=w_mean,
            threshold=2.0 / math.pi * math.sqrt(p) - 1.0 / (n * math.sqrt(p)),
            direction="min",
            bound=w_high,
            interval=(w_low, w_high),
            formula=f"(2/pi) sqrt(p) - 1/(n sqrt(p)) at n={n}, p={p}",
        ))
        report.gates.append(Gate(
            name="second-moment-upper-bound",
            estimate=sq_mean,
            threshold=p + 3.0 / (p * n),
            direction="max",
            bound=sq_low,
            interval=(sq_low, sq_high),
            formula=f"p + 3/(p n) at n={n}, p={p}",
        ))

        cutoff = 0.006 * math.sqrt(p)
        hits = sum(1 for v in w if v >= cutoff)
        report.gates.append(proportion_gate(
            name="sign-correlation-above-.006sqrt(p)",
            successes=hits,
            trials=len(w),
            threshold=0.4,
            direction="min",
            formula="one-sided Chebyshev: P(W >= .01 E[W]) > .4004 when E[W^2]/E[W]^2 <= pi^2/4",
            confidence=confidence,
            gated=False,
        ))
        if w_mean > 0 and sq_mean >= w_mean * w_mean:
            report.estimates["chebyshev_lower_bound"] = one_sided_chebyshev(w_mean, sq_mean, 0.01)
            report.estimates["moment_ratio"] = sq_mean / (w_mean * w_mean)


class GrowthHeuristic(BaseExperiment):
    experiment_id = "growth-heuristic"
    description = "Per-step growth m_{t+1}^2 / m_t^2 while d m_t^2 is small"
    defaults = {"n": 100_000, "d": 100, "steps": 8, "trials": 50}

    def validate(self) -> List[str]:
        n, d = self.params["n"], self.params["d"]
        if not 0 < d < n:
            raise ValueError(f"need 0 < d < n, got d={d}, n={n}")
        if self.params["steps"] < 2:
            raise ValueError("steps must be at least 2")
        return []

    def run_trial(self, stream_id: int, rng: Rng) -> Dict[str, Any]:
        n, d = self.params["n"], self.params["d"]
        guard = self.threshold("growth_guard")
        g = gen_gnp(n, d / n, rng.child(0))
        x0 = gen_opinions_iid(n, 0.5, rng.child(1))
        trace, _ = run(g, x0, max_steps=self.params["steps"])

        m_sq = [m * m for m in trace.means]
        ratios = []
        for t in range(len(m_sq) - 1):
            if m_sq[t] == 0 or d * m_sq[t] > guard:
                continue
            ratios.append(m_sq[t + 1] / m_sq[t])
        return {"m_sq": m_sq, "ratios": ratios, "_trace": trace}

    def aggregate(self, report: ExperimentReport) -> None:
        n, d = self.params["n"], self.params["d"]
        beta = self.threshold("growth_beta")
        ratios = [r for rec in report.records for r in rec["ratios"]]
        report.estimates["qualifying_steps"] = len(ratios)
        report.estimates["ratio_quantiles"] = quantiles(ratios)

        median = float(np.median(ratios)) if ratios else 0.0
        note = "" if ratios else "no step satisfied d m_t^2 <= guard"
        report.estimates["median_ratio"] = median
        report.gates.append(Gate(
            name="median-growth-at-least-beta-d",
            estimate=median,
            threshold=beta * d,
            direction="min",
            formula=f"beta * d with beta={beta}, d={d}",
            note=note,
        ))
        report.gates.append(Gate(
            name="median-growth-at-most-d-over-beta",
            estimate=median,
            threshold=d / beta,
            direction="max",
            formula=f"d / beta with beta={beta}, d={d}",
            note=note,
        ))

        rows = []
        for rec in report.records:
            for t, value in enumerate(rec["m_sq"]):
                rows.append([rec.stream_id, t, value, d * value, d ** t / n])
        report.tables["trajectory"] = Table(
            header=["stream_id", "t", "m_sq", "d_m_sq", "profile_d^t/n"],
            rows=rows,
        )


def exp_initial_mean_sq(n: int, trials: int, seed: int = 0, **kwargs) -> ExperimentReport:
    return InitialMeanSquare({"n": n, "trials": trials}, seed=seed, **kwargs).run()


def exp_time1_moments(n: int, p: float, trials: int, seed: int = 0, **kwargs) -> ExperimentReport:
    return TimeOneMoments({"n": n, "p": p, "trials": trials}, seed=seed, **kwargs).run()


def exp_growth_heuristic(n: int, d: float, steps: int, trials: int, seed: int = 0, **kwargs) -> ExperimentReport:
    return GrowthHeuristic({"n": n, "d": d, "steps": steps, "trials": trials}, seed=seed, **kwargs).run()
