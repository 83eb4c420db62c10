"""
Confidence intervals and gate helpers for experiment aggregation.

Binomial proportions use Wilson intervals and means use the normal
approximation, both through scipy.stats.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .report import Gate

DEFAULT_CONFIDENCE = 0.95


def wilson_interval(
    successes: int,
    trials: int,
    confidence: float = DEFAULT_CONFIDENCE,
) -> Tuple[float, float]:
    """Two-sided Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial for a proportion interval")
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    return float(ci.low), float(ci.high)


def two_sided_z(confidence: float = DEFAULT_CONFIDENCE) -> float:
    """Standard normal quantile z_{1 - alpha/2} for alpha = 1 - confidence."""
    return float(stats.norm.ppf(0.5 + confidence / 2.0))


def mean_interval(
    values: Sequence[float],
    confidence: float = DEFAULT_CONFIDENCE,
) -> Tuple[float, float, float]:
    """
    Normal-approximation interval for a mean.

    Returns:
        (mean, low, high); a single value gives a zero-width interval
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("need at least one value for a mean interval")
    mean = float(arr.mean())
    if arr.size == 1:
        return mean, mean, mean
    half = two_sided_z(confidence) * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return mean, mean - half, mean + half


def quantiles(values: Sequence[float], qs: Sequence[float] = (0.1, 0.25, 0.5, 0.75, 0.9)) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return {}
    return {f"q{int(round(q * 100)):02d}": float(np.quantile(arr, q)) for q in qs}


def fair_coin_pvalue(heads: int, flips: int) -> float:
    """Two-sided exact binomial test against p = 1/2."""
    if flips < 1:
        return 1.0
    return float(stats.binomtest(int(heads), int(flips), 0.5).pvalue)


def lag1_autocorrelation(sequences: Sequence[Sequence[int]]) -> Optional[float]:
    """Pooled lag-1 correlation of consecutive entries within each sequence."""
    left, right = [], []
    for seq in sequences:
        left.extend(seq[:-1])
        right.extend(seq[1:])
    if len(left) < 2:
        return None
    a = np.asarray(left, dtype=np.float64)
    b = np.asarray(right, dtype=np.float64)
    if a.std() == 0 or b.std() == 0:
        return None
    return float(np.corrcoef(a, b)[0, 1])


def proportion_gate(
    name: str,
    successes: int,
    trials: int,
    threshold: float,
    direction: str,
    formula: str,
    confidence: float = DEFAULT_CONFIDENCE,
    gated: bool = True,
) -> Gate:
    """
    Gate a proportion with its Wilson bound.

    direction "min" compares the lower bound with the threshold, "max" the
    upper bound. When even an all-success (or all-failure) outcome could
    not clear the threshold at this trial count, the point estimate is
    compared instead and the gate says so in its note.
    """
    estimate = successes / trials if trials else 0.0
    low, high = wilson_interval(successes, trials, confidence) if trials else (0.0, 1.0)
    note = ""
    if direction == "min":
        best = wilson_interval(trials, trials, confidence)[0] if trials else 0.0
        bound: Optional[float] = low
        if best < threshold:
            bound = None
            note = f"{trials} trials cannot resolve a lower bound >= {threshold}; point estimate used"
    elif direction == "max":
        best = wilson_interval(0, trials, confidence)[1] if trials else 1.0
        bound = high
        if best > threshold:
            bound = None
            note = f"{trials} trials cannot resolve an upper bound <= {threshold}; point estimate used"
    else:
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")

    return Gate(
        name=name,
        estimate=estimate,
        threshold=threshold,
        direction=direction,
        bound=bound,
        interval=(low, high),
        formula=formula,
        gated=gated,
        note=note,
    )
