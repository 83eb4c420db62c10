"""
Base class for experiments.

Each experiment id implements this interface to turn seeded trials into
an ExperimentReport.

CS Concept: This is the **Template Method Pattern** - run() fixes the
skeleton (validate -> prepare -> trials -> aggregate) and subclasses
implement the experiment-specific steps.

Trial i always draws from Rng(seed, stream_id=i), and records are sorted
by stream id before aggregation, so the report does not depend on the
worker count or on the order in which workers finish.
"""

import logging
import multiprocessing
import time
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Tuple

from .. import __version__
from ..dynamics import Trace
from ..generators import (
    LevelGraphSpec,
    Rng,
    assign_odd_weights,
    assign_uniform_weights,
    gen_complete,
    gen_cycle,
    gen_gnp,
    gen_level_graph,
    gen_path,
    gen_random_regular,
    gen_tree_ball,
)
from ..graph_core import Graph
from ..io_formats import trace_rows
from .report import ExperimentReport, TrialRecord

logger = logging.getLogger(__name__)

# Stream reserved for experiment-level randomness outside the trials
PREPARE_STREAM = 1 << 62

FAMILIES = ("gnp", "rrg", "tree-ball", "cycle", "path", "complete", "level")
WEIGHTINGS = ("none", "odd", "uniform")

DEFAULT_THRESHOLDS: Dict[str, float] = {
    "confidence": 0.95,
    "whp_success": 0.95,
    "whp_failure": 0.05,
    "unanimity_min": 0.4,
    "growth_beta": 0.1,
    "growth_guard": 0.1,
    "balance_fraction": 0.9,
    "regime_c": 3.0,
}


def make_graph(family: str, params: Dict[str, Any], rng: Rng) -> Graph:
    """
    Build a graph of the named family from experiment parameters.

    Keys used: n, p or d, radius (tree-ball), depth (level), weighted,
    max_attempts / require_connected (rrg).
    """
    n = params.get("n")
    if family == "gnp":
        p = params.get("p")
        if p is None:
            p = params["d"] / n
        g = gen_gnp(n, p, rng.child(0))
    elif family == "rrg":
        g = gen_random_regular(
            n,
            params["d"],
            rng.child(0),
            max_attempts=params.get("max_attempts", 10_000),
            require_connected=params.get("require_connected", False),
        )
    elif family == "tree-ball":
        g = gen_tree_ball(params["d"], params.get("radius", 5))
    elif family == "cycle":
        g = gen_cycle(n)
    elif family == "path":
        g = gen_path(n)
    elif family == "complete":
        g = gen_complete(n)
    elif family == "level":
        g = gen_level_graph(LevelGraphSpec(params.get("depth", 6)))
    else:
        raise ValueError(f"unknown graph family {family!r}; expected one of {FAMILIES}")

    weighted = params.get("weighted", "none") or "none"
    if weighted == "odd":
        g = assign_odd_weights(g, rng.child(2))
    elif weighted == "uniform":
        g = assign_uniform_weights(g, rng.child(2))
    elif weighted != "none":
        raise ValueError(f"unknown weighting {weighted!r}; expected one of {WEIGHTINGS}")
    return g


def _trial_worker(args: Dict[str, Any]) -> Tuple[int, Dict[str, Any]]:
    """Module-level worker for multiprocessing (must be picklable)."""
    experiment = args["cls"](
        params=args["params"],
        seed=args["seed"],
        thresholds=args["thresholds"],
        trace_cap=args["trace_cap"],
        config=args["config"],
    )
    return experiment.execute_trial(args["stream_id"])


class BaseExperiment(ABC):
    """
    Abstract base class for experiments.

    Subclasses must implement:
    - experiment_id / description / defaults
    - run_trial(): one seeded trial -> dict of JSON-able values
    - aggregate(): fill estimates, gates and tables of the report

    Example usage:
        class MeanSquare(BaseExperiment):
            experiment_id = "initial-mean-sq"
            defaults = {"n": 100, "trials": 1000}

            def run_trial(self, stream_id, rng):
                x = gen_opinions_iid(self.params["n"], 0.5, rng)
                return {"m0_sq": x.mean() ** 2}
    """

    # Must be set by subclasses
    experiment_id: str = ""
    description: str = ""
    defaults: Dict[str, Any] = {}

    def __init__(
        self,
        params: Optional[Dict[str, Any]] = None,
        seed: int = 0,
        workers: int = 1,
        thresholds: Optional[Dict[str, float]] = None,
        trace_cap: int = 0,
        config: Optional[Dict[str, Any]] = None,
    ):
        """
        Initialize experiment.

        Args:
            params: Overrides for the class defaults (None values ignored)
            seed: Master seed
            workers: Trial-level worker processes
            thresholds: Overrides for DEFAULT_THRESHOLDS
            trace_cap: Number of leading trials whose trace CSV is kept
            config: Resolved run config echoed into the report
        """
        if not self.experiment_id:
            raise NotImplementedError("Subclass must set experiment_id")

        overrides = {k: v for k, v in (params or {}).items() if v is not None}
        self.params: Dict[str, Any] = {**self.defaults, **overrides}
        self.seed = int(seed)
        self.workers = max(1, int(workers or 1))
        self.thresholds = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
        self.trace_cap = int(trace_cap)
        self.config = config or {}

    # ------------------------------------------------------------------
    # Hooks
    # ------------------------------------------------------------------

    def validate(self) -> List[str]:
        """
        Check parameters.

        Returns:
            Regime warnings (recorded in the report, not fatal)

        Raises:
            ValueError: parameters the experiment cannot run with
        """
        return []

    def regime(self) -> Dict[str, Any]:
        """Whether the parameters sit in the regime the claim is stated for."""
        return {}

    def trial_count(self) -> int:
        return int(self.params.get("trials", 1))

    def prepare(self, report: ExperimentReport) -> None:
        """Experiment-level work done once before the trials."""

    @abstractmethod
    def run_trial(self, stream_id: int, rng: Rng) -> Dict[str, Any]:
        """
        Run one trial.

        Args:
            stream_id: Trial index, also the Rng stream id
            rng: Rng(seed, stream_id)

        Returns:
            JSON-able values; key "_trace" may carry a Trace to export
        """
        pass

    @abstractmethod
    def aggregate(self, report: ExperimentReport) -> None:
        """Fill report.estimates, report.gates and report.tables from report.records."""
        pass

    # ------------------------------------------------------------------
    # Template
    # ------------------------------------------------------------------

    def threshold(self, key: str) -> float:
        return float(self.thresholds[key])

    def settings(self, section: str) -> Dict[str, Any]:
        """A section (analysis, generators, ...) of the resolved settings echoed in config."""
        return self.config.get("settings", {}).get(section, {})

    def keep_trace(self, stream_id: int) -> bool:
        return stream_id < self.trace_cap

    def execute_trial(self, stream_id: int) -> Tuple[int, Dict[str, Any]]:
        values = self.run_trial(stream_id, Rng(self.seed, stream_id))
        trace = values.pop("_trace", None)
        if isinstance(trace, Trace) and self.keep_trace(stream_id):
            values["_trace_rows"] = trace_rows(trace)
        return stream_id, values

    def _run_trials(self, count: int) -> List[Tuple[int, Dict[str, Any]]]:
        if self.workers <= 1 or count <= 1:
            return [self.execute_trial(sid) for sid in range(count)]

        worker_args = [
            {
                "cls": type(self),
                "params": self.params,
                "seed": self.seed,
                "thresholds": self.thresholds,
                "trace_cap": self.trace_cap,
                "config": self.config,
                "stream_id": sid,
            }
            for sid in range(count)
        ]
        chunksize = max(1, count // (4 * self.workers))
        with multiprocessing.Pool(self.workers) as pool:
            return list(pool.imap_unordered(_trial_worker, worker_args, chunksize=chunksize))

    def run(self) -> ExperimentReport:
        """
        Full pipeline: validate -> prepare -> trials -> aggregate.

        Returns:
            ExperimentReport (wall_clock_seconds is the only non-reproducible field)
        """
        start = time.perf_counter()
        warnings = self.validate()
        for warning in warnings:
            logger.warning(f"{self.experiment_id}: {warning}")

        count = self.trial_count()
        report = ExperimentReport(
            experiment_id=self.experiment_id,
            params=dict(self.params),
            seed=self.seed,
            trials=count,
            regime=self.regime(),
            notes=list(warnings),
            config=self.config,
            version=__version__,
        )
        self.prepare(report)

        logger.info(f"{self.experiment_id}: {count} trials on {self.workers} worker(s)")
        results = sorted(self._run_trials(count), key=lambda r: r[0])
        for stream_id, values in results:
            rows = values.pop("_trace_rows", None)
            if rows is not None:
                report.traces[stream_id] = rows
            report.records.append(TrialRecord(stream_id=stream_id, values=values))

        self.aggregate(report)
        report.wall_clock_seconds = time.perf_counter() - start

        status = "PASS" if report.passed else "FAIL"
        logger.info(f"{self.experiment_id}: {status} in {report.wall_clock_seconds:.2f}s")
        return report
