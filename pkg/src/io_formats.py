# ============================================================================
# CHANGELOG (recent first, max 5 entries)
# 10/18/2026 - Config echo as '#' comment lines on every CSV
# 10/17/2026 - Trace CSV with 17 significant digits
# ============================================================================
"""
File formats for run outputs.

Trace CSV: '#' comment lines carrying the version and the resolved config,
then the header t,mean,flips2,potential,unanimous and one row per step.
flips2 is empty for t < 2. Floats use 17 significant digits so they
round-trip exactly.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from . import __version__
from .dynamics import Trace

logger = logging.getLogger(__name__)

TRACE_HEADER = ["t", "mean", "flips2", "potential", "unanimous"]


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_float(value)
    if hasattr(value, "dtype") and getattr(value.dtype, "kind", "") == "f":
        return format_float(value)
    return str(value)


def trace_rows(trace: Trace) -> List[List[str]]:
    """Formatted CSV rows of a trace."""
    return [
        [str(t), format_float(mean), "" if flips is None else str(flips), format_float(pot), "1" if unan else "0"]
        for t, mean, flips, pot, unan in trace.rows()
    ]


def _write_comments(handle, config: Optional[Dict[str, Any]]) -> None:
    handle.write(f"# majdyn {__version__}\n")
    if config:
        handle.write(f"# config {json.dumps(config, sort_keys=True, default=str)}\n")


def write_trace_rows_csv(path: Path, rows: Iterable[Sequence[str]], config: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        _write_comments(f, config)
        writer = csv.writer(f)
        writer.writerow(TRACE_HEADER)
        writer.writerows(rows)
    logger.debug(f"Wrote trace {path}")
    return path


def write_trace_csv(path: Path, trace: Trace, config: Optional[Dict[str, Any]] = None) -> Path:
    return write_trace_rows_csv(path, trace_rows(trace), config)


def read_trace_csv(path: Path) -> List[Dict[str, Any]]:
    """
    Parse a trace CSV back into typed rows.

    Returns:
        One dict per step with keys t, mean, flips2 (None for t < 2),
        potential, unanimous
    """
    with open(path, newline="") as f:
        lines = [line for line in f if not line.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames != TRACE_HEADER:
        raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
    rows = []
    for row in reader:
        rows.append({
            "t": int(row["t"]),
            "mean": float(row["mean"]),
            "flips2": int(row["flips2"]) if row["flips2"] else None,
            "potential": float(row["potential"]),
            "unanimous": row["unanimous"] == "1",
        })
    return rows


def read_config_comment(path: Path) -> Optional[Dict[str, Any]]:
    """The config echoed into a CSV's '# config' line, if any."""
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            if line.startswith("# config "):
                return json.loads(line[len("# config "):])
    return None


def write_table_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        _write_comments(f, config)
        writer = csv.writer(f)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
    logger.debug(f"Wrote table {path}")
    return path


def write_json(path: Path, data: Dict[str, Any]) -> Path:
    path = Path(path)
    with open(path, "w") as f:
        json.dump(data, f, indent=2, default=str)
        f.write("\n")
    return path
