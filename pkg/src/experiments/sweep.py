"""
Exploratory sweep over mean degree for the consensus/disagreement phase
question. Ungated: the report carries tables only.
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..dynamics import DEFAULT_MAX_STEPS, run
from ..generators import Rng, gen_opinions_iid
from ..validation import parse_grid
from .base import BaseExperiment, make_graph
from .report import ExperimentReport, Table
from .stats import wilson_interval

logger = logging.getLogger(__name__)


def _grid(value: Any, name: str, low: float, high: Optional[float] = None) -> List[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    grid, error = parse_grid(str(value), low, high, name=name)
    if error:
        raise ValueError(error)
    return grid


class PhaseSweep(BaseExperiment):
    experiment_id = "phase-sweep"
    description = "Eventual +1 fraction against mean degree (exploratory, ungated)"
    defaults = {
        "family": "gnp",
        "n": 2000,
        "d_grid": "1,2,3,4,6,8,12,16,24,32",
        "q_grid": "0.5",
        "trials": 20,
        "eps": 0.05,
        "horizon": DEFAULT_MAX_STEPS,
    }

    def points(self) -> List[Tuple[float, float]]:
        d_grid = _grid(self.params["d_grid"], "d grid", 0.0)
        q_grid = _grid(self.params["q_grid"], "q grid", 0.0, 1.0)
        return [(d, q) for d in d_grid for q in q_grid]

    def validate(self) -> List[str]:
        if self.params["family"] not in ("gnp", "rrg"):
            raise ValueError("phase-sweep supports gnp and rrg")
        if not self.points():
            raise ValueError("empty sweep grid")
        return ["exploratory sweep: no gates"]

    def trial_count(self) -> int:
        return len(self.points()) * int(self.params["trials"])

    def run_trial(self, stream_id: int, rng: Rng) -> Dict[str, Any]:
        n = self.params["n"]
        d, q = self.points()[stream_id // int(self.params["trials"])]
        params: Dict[str, Any] = {"n": n, "d": int(d) if self.params["family"] == "rrg" else d}
        if self.params["family"] == "gnp":
            params["p"] = min(1.0, d / n)
        g = make_graph(self.params["family"], params, rng)
        x0 = gen_opinions_iid(n, q, rng.child(1))
        trace, outcome = run(g, x0, max_steps=self.params["horizon"])

        even = outcome.final_states[1] if outcome.final_states[1].time % 2 == 0 else outcome.final_states[0]
        plus = float(np.mean(even.values == 1))
        eps = self.params["eps"]
        return {
            "d": d,
            "q": q,
            "plus_fraction": plus,
            "near_consensus": plus <= eps or plus >= 1.0 - eps,
            "balanced": abs(plus - 0.5) <= eps,
            "unanimous": trace.ever_unanimous(),
            "entry_time": outcome.entry_time,
            "average_flips": trace.average_flips(),
        }

    def aggregate(self, report: ExperimentReport) -> None:
        confidence = self.threshold("confidence")
        rows = []
        for d, q in self.points():
            group = [r for r in report.records if r["d"] == d and r["q"] == q]
            count = len(group)
            unanimous = sum(1 for r in group if r["unanimous"])
            low, high = wilson_interval(unanimous, count, confidence)
            entries = [r["entry_time"] for r in group if r["entry_time"] is not None]
            rows.append([
                d,
                q,
                count,
                unanimous / count,
                low,
                high,
                sum(1 for r in group if r["near_consensus"]) / count,
                sum(1 for r in group if r["balanced"]) / count,
                float(np.mean([r["plus_fraction"] for r in group])),
                float(np.mean(entries)) if entries else None,
                float(np.mean([r["average_flips"] for r in group])),
            ])
        report.tables["sweep"] = Table(
            header=[
                "d", "q", "trials", "unanimity", "unanimity_low", "unanimity_high",
                "near_consensus", "balanced", "mean_plus_fraction", "mean_entry_time", "mean_flips",
            ],
            rows=rows,
        )
        report.estimates["points"] = len(rows)
