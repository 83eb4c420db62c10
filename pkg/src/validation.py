# ============================================================================
# CHANGELOG (recent first, max 5 entries)
# 10/18/2026 - Added probability, odd-integer and rho-grid validators
# 10/16/2026 - Reworked from the tool-argument validators
# ============================================================================
"""
Validation utilities for CLI arguments.

Every validator returns a (value, error) tuple. If valid, error is None.
Library functions raise instead; these helpers let the CLI report all
bad flags in one pass before any simulation starts.
"""

import math
import os
from typing import List, Optional, Sequence, Tuple

# Limits - configurable via environment variables
MAX_VERTICES = int(os.getenv("MAJDYN_MAX_VERTICES", "10000000"))
MAX_TRIALS = int(os.getenv("MAJDYN_MAX_TRIALS", "1000000"))
MIN_COUNT = 1


def validate_positive_int(
    value,
    name: str,
    min_val: int = MIN_COUNT,
    max_val: int = MAX_VERTICES,
) -> Tuple[Optional[int], Optional[str]]:
    """
    Validate that a value is an integer within bounds.

    Args:
        value: Value to validate
        name: Parameter name for error messages
        min_val: Minimum allowed value
        max_val: Maximum allowed value

    Returns:
        Tuple of (validated_value, error_message). If valid, error_message is None.
    """
    if value is None:
        return None, None

    if isinstance(value, bool):
        return None, f"Invalid {name}: must be an integer, got bool"

    try:
        int_value = int(value)
    except (TypeError, ValueError):
        return None, f"Invalid {name}: must be an integer, got {type(value).__name__}"

    if int_value != value and not isinstance(value, str):
        return None, f"Invalid {name}: must be an integer, got {value!r}"

    if int_value < min_val:
        return None, f"Invalid {name}: must be at least {min_val}, got {int_value}"

    if int_value > max_val:
        return None, f"Invalid {name}: must be at most {max_val}, got {int_value}"

    return int_value, None


def validate_odd(value, name: str) -> Tuple[Optional[int], Optional[str]]:
    """Validate a positive odd integer (majority arity, odd n)."""
    int_value, error = validate_positive_int(value, name)
    if error or int_value is None:
        return int_value, error
    if int_value % 2 == 0:
        return None, f"Invalid {name}: must be odd, got {int_value}"
    return int_value, None


def validate_probability(
    value,
    name: str,
    open_low: bool = False,
    open_high: bool = False,
) -> Tuple[Optional[float], Optional[str]]:
    """Validate a probability in [0, 1]; open_low and open_high exclude the endpoints."""
    if value is None:
        return None, None

    try:
        prob = float(value)
    except (TypeError, ValueError):
        return None, f"Invalid {name}: must be a number, got {type(value).__name__}"

    if math.isnan(prob):
        return None, f"Invalid {name}: NaN"

    low_ok = prob > 0 if open_low else prob >= 0
    high_ok = prob < 1 if open_high else prob <= 1
    if not (low_ok and high_ok):
        lo = "(0" if open_low else "[0"
        hi = "1)" if open_high else "1]"
        return None, f"Invalid {name}: must be in {lo}, {hi}, got {prob}"

    return prob, None


def validate_enum(
    value,
    name: str,
    allowed_values: Sequence[str],
    default: Optional[str] = None,
) -> Tuple[Optional[str], Optional[str]]:
    """Membership check; a missing value falls back to default or is reported as required."""
    if value is None:
        if default is not None:
            return default, None
        return None, f"Missing required parameter: {name}"

    if value not in allowed_values:
        return None, (
            f"Invalid {name}: must be one of {list(allowed_values)}, "
            f"got '{value}'"
        )

    return value, None


def parse_grid(
    spec: str,
    low: Optional[float] = None,
    high: Optional[float] = None,
    name: str = "grid",
) -> Tuple[Optional[List[float]], Optional[str]]:
    """
    Parse a 'start:stop:step' range (inclusive of stop) or a comma list.

    Example:
        parse_grid("0:1:0.1")    # 11 points, last one exactly 1.0
        parse_grid("1,2,4,8")    # 4 points
    """
    spec = str(spec).strip()
    if ":" not in spec:
        try:
            grid = [float(p) for p in spec.split(",") if p.strip()]
        except ValueError:
            return None, f"Invalid {name} '{spec}': non-numeric entry"
        if not grid:
            return None, f"Invalid {name} '{spec}': empty list"
    else:
        parts = spec.split(":")
        if len(parts) != 3:
            return None, f"Invalid {name} '{spec}': expected start:stop:step"
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            return None, f"Invalid {name} '{spec}': non-numeric component"
        if step <= 0 or stop < start:
            return None, f"Invalid {name} '{spec}': need step > 0 and stop >= start"

        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = [min(stop, start + i * step) for i in range(count)]
        # land exactly on stop when the step divides the range
        if abs(grid[-1] - stop) < 1e-9:
            grid[-1] = stop

    if (low is not None and min(grid) < low) or (high is not None and max(grid) > high):
        return None, f"Invalid {name} '{spec}': values must lie in [{low}, {high}]"
    return grid, None


def parse_rho_grid(spec: str) -> Tuple[Optional[List[float]], Optional[str]]:
    """Grid of noise rates in [0, 1]."""
    return parse_grid(spec, 0.0, 1.0, name="rho grid")


def collect_errors(*results: Tuple[object, Optional[str]]) -> List[str]:
    """Gather the error halves of several validator results."""
    return [error for _, error in results if error]


def validate_degree(value, name: str = "d", integral: bool = False) -> Tuple[Optional[float], Optional[str]]:
    """
    Validate a positive degree.

    Exact degrees (random regular graphs, tree balls) must be integers; a
    mean degree may be fractional. Integer-valued input comes back as int.
    """
    if value is None:
        return None, None
    if isinstance(value, bool):
        return None, f"Invalid {name}: must be a number, got bool"
    try:
        degree = float(value)
    except (TypeError, ValueError):
        return None, f"Invalid {name}: must be a number, got {value!r}"
    if math.isnan(degree) or degree <= 0:
        return None, f"Invalid {name}: must be positive, got {value}"
    if degree.is_integer():
        return int(degree), None
    if integral:
        return None, f"Invalid {name}: must be an integer, got {degree}"
    return degree, None
