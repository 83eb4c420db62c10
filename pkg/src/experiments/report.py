"""
Experiment report data structures.

ExperimentReport is the single output of every experiment: parameters,
per-trial records keyed by stream id, estimates with intervals, gates
with the formula their threshold came from, and named CSV tables.
Everything except wall_clock_seconds is a deterministic function of
(experiment id, parameters, seed).
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..io_formats import write_table_csv, write_trace_rows_csv


def jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays (recursively) into JSON-serializable values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


@dataclass
class TrialRecord:
    """Outcome of one trial; stream_id identifies its random stream."""

    stream_id: int
    values: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def to_dict(self) -> Dict[str, Any]:
        return {"stream_id": self.stream_id, **jsonable(self.values)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrialRecord":
        values = {k: v for k, v in data.items() if k != "stream_id"}
        return cls(stream_id=int(data["stream_id"]), values=values)


@dataclass
class Gate:
    """
    One pass/fail check.

    Attributes:
        estimate: Point estimate
        threshold: Value computed from the formula at the run's parameters
        direction: "min" (must reach threshold), "max" (must stay below) or
            "contains" (threshold must lie inside interval)
        bound: Interval side compared with the threshold, None for point comparison
        interval: Two-sided confidence interval of the estimate
        formula: Provenance of the threshold
        gated: False for informational checks
    """

    name: str
    estimate: float
    threshold: float
    direction: str
    formula: str
    bound: Optional[float] = None
    interval: Optional[Tuple[float, float]] = None
    gated: bool = True
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.direction == "contains":
            return self.interval is not None and self.interval[0] <= self.threshold <= self.interval[1]
        value = self.estimate if self.bound is None else self.bound
        if self.direction == "min":
            return value >= self.threshold
        return value <= self.threshold

    def to_dict(self) -> Dict[str, Any]:
        return jsonable({
            "name": self.name,
            "estimate": self.estimate,
            "threshold": self.threshold,
            "direction": self.direction,
            "bound": self.bound,
            "interval": list(self.interval) if self.interval else None,
            "formula": self.formula,
            "gated": self.gated,
            "passed": self.passed,
            "note": self.note,
        })

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Gate":
        interval = data.get("interval")
        return cls(
            name=data["name"],
            estimate=data["estimate"],
            threshold=data["threshold"],
            direction=data["direction"],
            formula=data.get("formula", ""),
            bound=data.get("bound"),
            interval=tuple(interval) if interval else None,
            gated=data.get("gated", True),
            note=data.get("note", ""),
        )


@dataclass
class Table:
    """Named CSV table written next to report.json."""

    header: List[str]
    rows: List[Sequence[Any]] = field(default_factory=list)


@dataclass
class ExperimentReport:
    """
    Aggregated result of one experiment invocation.

    Attributes:
        experiment_id: Registry id
        params: Resolved parameters
        seed: Master seed
        trials: Number of trials (>= 1)
        records: Per-trial records sorted by stream id
        estimates: Point estimates and derived numbers
        gates: Pass/fail checks (informational ones have gated=False)
        regime: Whether the parameters sit in the asymptotic regime, and why
        notes: Free-form remarks (regime warnings, reductions)
        tables: CSV tables by name
        traces: Trace rows of sampled trials by stream id
        config: Echo of the resolved run configuration
        version: Artifact version
        wall_clock_seconds: Elapsed time (the only non-reproducible field)
    """

    experiment_id: str
    params: Dict[str, Any]
    seed: int
    trials: int
    records: List[TrialRecord] = field(default_factory=list)
    estimates: Dict[str, Any] = field(default_factory=dict)
    gates: List[Gate] = field(default_factory=list)
    regime: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    tables: Dict[str, Table] = field(default_factory=dict)
    traces: Dict[int, list] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    version: str = ""
    wall_clock_seconds: float = 0.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")

    @property
    def passed(self) -> bool:
        """True iff every gated check passed."""
        return all(g.passed for g in self.gates if g.gated)

    def gate(self, name: str) -> Gate:
        for g in self.gates:
            if g.name == name:
                return g
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment_id": self.experiment_id,
            "version": self.version,
            "seed": self.seed,
            "trials": self.trials,
            "params": jsonable(self.params),
            "passed": self.passed,
            "gates": [g.to_dict() for g in self.gates],
            "estimates": jsonable(self.estimates),
            "regime": jsonable(self.regime),
            "notes": list(self.notes),
            "tables": sorted(self.tables),
            "traces": sorted(self.traces),
            "records": [r.to_dict() for r in self.records],
            "config": jsonable(self.config),
            "wall_clock_seconds": self.wall_clock_seconds,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentReport":
        return cls(
            experiment_id=data["experiment_id"],
            params=data.get("params", {}),
            seed=int(data["seed"]),
            trials=int(data["trials"]),
            records=[TrialRecord.from_dict(r) for r in data.get("records", [])],
            estimates=data.get("estimates", {}),
            gates=[Gate.from_dict(g) for g in data.get("gates", [])],
            regime=data.get("regime", {}),
            notes=list(data.get("notes", [])),
            config=data.get("config", {}),
            version=data.get("version", ""),
            wall_clock_seconds=float(data.get("wall_clock_seconds", 0.0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def write(self, out_dir: Path) -> List[Path]:
        """
        Write report.json plus one CSV per table and per sampled trace.

        Returns:
            Paths written
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []

        report_path = out_dir / "report.json"
        with open(report_path, "w") as f:
            f.write(self.to_json())
            f.write("\n")
        written.append(report_path)

        for name, table in sorted(self.tables.items()):
            path = out_dir / f"{name}.csv"
            write_table_csv(path, table.header, table.rows, self.config)
            written.append(path)

        for stream_id, rows in sorted(self.traces.items()):
            path = out_dir / f"trace_{stream_id:04d}.csv"
            write_trace_rows_csv(path, rows, self.config)
            written.append(path)

        return written
