# ============================================================================
# CHANGELOG (recent first, max 5 entries)
# 10/18/2026 - Exact overlap correlation by conditioning on the shared count
# 10/17/2026 - Matrix-free lambda estimate and sampled mixing check
# 10/16/2026 - Integer Walsh-Hadamard spectrum, majority oracles
# ============================================================================
"""
Exact Boolean-function oracles and the spectral mixing checker.

Truth tables are indexed by bitmask: bit i of the index set means
x_i = -1. With that convention the Fourier coefficient of subset S is
the Walsh-Hadamard transform entry S divided by 2^k, so spectra are kept
as integer numerators over the common denominator 2^k and Parseval can
be checked exactly.

CS Concept: the **fast Walsh-Hadamard transform** computes all 2^k
coefficients in k * 2^k additions instead of 4^k.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ArityCapError, ConvergenceError
from .generators import Rng
from .graph_core import Graph

logger = logging.getLogger(__name__)

ARITY_CAP = 24
DEFAULT_POWER_TOL = 1e-6
DEFAULT_POWER_MAX_ITER = 5000
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _popcounts(size: int, k: int) -> np.ndarray:
    idx = np.arange(size, dtype=np.int64)
    pc = np.zeros(size, dtype=np.int64)
    for b in range(k):
        pc += (idx >> b) & 1
    return pc


@dataclass
class FourierTable:
    """
    Fourier spectrum of a +/-1 function on k bits.

    Attributes:
        k: Arity
        numerators: coeff(S) * 2^k for every bitmask S (int64)
    """

    k: int
    numerators: np.ndarray
    _levels: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def denominator(self) -> int:
        return 1 << self.k

    @property
    def coefficients(self) -> np.ndarray:
        return self.numerators / float(self.denominator)

    def coefficient(self, subset: Union[int, Sequence[int]]) -> float:
        """Coefficient of a bitmask, or of a collection of 0-based coordinates."""
        mask = subset if isinstance(subset, (int, np.integer)) else sum(1 << i for i in subset)
        return float(self.numerators[int(mask)]) / self.denominator

    def exact_coefficient(self, subset: Union[int, Sequence[int]]) -> Fraction:
        mask = subset if isinstance(subset, (int, np.integer)) else sum(1 << i for i in subset)
        return Fraction(int(self.numerators[int(mask)]), self.denominator)

    def parseval(self) -> float:
        c = self.coefficients
        return float(np.dot(c, c))

    def parseval_exact(self) -> Fraction:
        """Sum of squared coefficients as an exact rational."""
        nonzero = self.numerators[self.numerators != 0]
        total = sum(int(v) * int(v) for v in nonzero)
        return Fraction(total, self.denominator * self.denominator)

    def level_weights(self) -> np.ndarray:
        """W_j = sum over |S| = j of coeff(S)^2, j = 0..k."""
        if self._levels is None:
            sizes = _popcounts(self.numerators.shape[0], self.k)
            c = self.coefficients
            self._levels = np.bincount(sizes, weights=c * c, minlength=self.k + 1)
        return self._levels

    def to_rows(self):
        """(bitmask, coefficient) pairs with non-zero coefficient."""
        for mask in np.flatnonzero(self.numerators):
            yield int(mask), float(self.numerators[mask]) / self.denominator


def majority_truth_table(k: int) -> np.ndarray:
    """Truth table of Maj_k (k odd) as int8 +/-1."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"majority needs an odd arity, got {k}")
    if k > ARITY_CAP:
        raise ArityCapError(f"arity {k} exceeds the enumeration cap {ARITY_CAP}")
    minus = _popcounts(1 << k, k)
    return np.where(2 * minus < k, 1, -1).astype(np.int8)


def fourier_spectrum(truth_table: Sequence[int], k: int) -> FourierTable:
    """
    Exact Fourier spectrum of a +/-1 function.

    Args:
        truth_table: 2^k values in {-1, +1}, bit i of the index set = x_i is -1
        k: Arity (<= 24)

    Raises:
        ArityCapError: k above the cap
        ValueError: wrong length or non +/-1 values
    """
    if k > ARITY_CAP:
        raise ArityCapError(f"arity {k} exceeds the enumeration cap {ARITY_CAP}")
    if k < 0:
        raise ValueError(f"arity must be non-negative, got {k}")
    table = np.asarray(truth_table, dtype=np.int64).reshape(-1)
    size = 1 << k
    if table.shape[0] != size:
        raise ValueError(f"truth table has {table.shape[0]} entries, expected 2^{k} = {size}")
    if not np.all((table == 1) | (table == -1)):
        raise ValueError("truth table values must be -1 or +1")

    a = table.copy()
    h = 1
    while h < size:
        blocks = a.reshape(-1, 2, h)
        upper = blocks[:, 0, :] + blocks[:, 1, :]
        lower = blocks[:, 0, :] - blocks[:, 1, :]
        a = np.stack([upper, lower], axis=1).reshape(size)
        h *= 2

    return FourierTable(k=k, numerators=a)


def maj_singleton_coeff(k: int) -> float:
    """Singleton coefficient of Maj_k: 2 * C(k-1, (k-1)/2) / 2^k."""
    return float(maj_singleton_fraction(k))


def maj_singleton_fraction(k: int) -> Fraction:
    if k < 1 or k % 2 == 0:
        raise ValueError(f"k must be a positive odd integer, got {k}")
    return Fraction(2 * math.comb(k - 1, (k - 1) // 2), 1 << k)


def noise_stability(table: FourierTable, rho: float) -> float:
    """Stab_rho = sum_S rho^|S| coeff(S)^2."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    weights = table.level_weights()
    powers = np.power(float(rho), np.arange(table.k + 1))
    return float(np.dot(powers, weights))


def arcsin_stability(rho: float) -> float:
    """Limit of Stab_rho[Maj_n] as n grows: (2/pi) arcsin(rho)."""
    return 2.0 / math.pi * math.asin(rho)


def sample_noise_stability(
    truth_table: np.ndarray,
    k: int,
    rho: float,
    samples: int,
    rng: Rng,
) -> Tuple[float, float]:
    """
    Monte Carlo E[f(x) f(y)] with y a rho-correlated copy of x.

    Returns:
        (estimate, standard error)
    """
    gen = rng.generator
    bits_x = gen.random((samples, k)) < 0.5
    flips = gen.random((samples, k)) < (1.0 - rho) / 2.0
    bits_y = bits_x ^ flips
    weights = (1 << np.arange(k, dtype=np.int64))
    fx = truth_table[bits_x.astype(np.int64) @ weights].astype(np.float64)
    fy = truth_table[bits_y.astype(np.int64) @ weights].astype(np.float64)
    products = fx * fy
    stderr = float(products.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("inf")
    return float(products.mean()), stderr


def _majority_given_shared(n_total: int, rest: int, shared_plus: int) -> Fraction:
    """E[Maj_{n_total}] given shared_plus +1's among the shared coordinates."""
    need = (n_total + 1) // 2 - shared_plus
    favorable = sum(math.comb(rest, r) for r in range(max(need, 0), rest + 1))
    return Fraction(2 * favorable, 1 << rest) - 1


def overlap_correlation_exact(n1: int, n2: int, m: int) -> Fraction:
    """
    E[Maj_n1(x) Maj_n2(y)] when x and y share m coordinates.

    Conditions on the number of +1's among the shared coordinates; the
    remaining coordinates of x and y are independent given that count.
    """
    for name, v in (("n1", n1), ("n2", n2)):
        if v < 1 or v % 2 == 0:
            raise ValueError(f"{name} must be a positive odd integer, got {v}")
    if not 0 <= m <= min(n1, n2):
        raise ValueError(f"overlap m={m} must lie in [0, min(n1, n2)]")
    if max(n1, n2) > ARITY_CAP:
        raise ArityCapError(f"arity {max(n1, n2)} exceeds the enumeration cap {ARITY_CAP}")

    total = Fraction(0)
    for s in range(m + 1):
        weight = Fraction(math.comb(m, s), 1 << m)
        total += weight * _majority_given_shared(n1, n1 - m, s) * _majority_given_shared(n2, n2 - m, s)
    return total


def overlap_correlation(n1: int, n2: int, m: int) -> float:
    return float(overlap_correlation_exact(n1, n2, m))


def overlap_lower_bound(n1: int, n2: int, m: int) -> float:
    """Singleton-only lower bound m * c(n1) * c(n2)."""
    return m * maj_singleton_coeff(n1) * maj_singleton_coeff(n2)


# ============================================================================
# Spectral mixing
# ============================================================================


@dataclass
class MixingEstimate:
    """
    Operator-norm estimate of P - Q.

    Attributes:
        lam: Estimated ||P - Q||
        p: Edge probability
        n: Vertex count
        iterations: Power-iteration steps used
        tol: Relative tolerance
        loops: Self-loop indicator used for P (reused by the mixing check)
    """

    lam: float
    p: float
    n: int
    iterations: int
    tol: float
    loops: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def reference_bound(self) -> float:
        """4 * sqrt(np)."""
        return 4.0 * math.sqrt(self.n * self.p)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "p": self.p,
            "n": self.n,
            "iterations": self.iterations,
            "tol": self.tol,
            "bound_4_sqrt_np": self.reference_bound,
        }


def _apply_centered(g: Graph, loops: np.ndarray, p: float, v: np.ndarray) -> np.ndarray:
    """(P - Q) v with P = adjacency + diag(loops) and Q = p * ones."""
    out = g.adjacency(weighted=False) @ v + loops * v
    out -= p * v.sum(axis=0)
    return out


def estimate_lambda(
    g: Graph,
    p: float,
    rng: Rng,
    tol: float = DEFAULT_POWER_TOL,
    max_iter: int = DEFAULT_POWER_MAX_ITER,
    loops: Optional[np.ndarray] = None,
) -> MixingEstimate:
    """
    Power iteration for ||P - Q|| without forming either matrix.

    P is g's adjacency plus Bernoulli(p) self-loops, Q has every entry p.
    Since P - Q is symmetric, iterating it twice per round is power
    iteration on (P - Q)^T (P - Q).

    Raises:
        ConvergenceError: relative change still above tol after max_iter rounds
    """
    n = g.n
    gen = rng.generator
    if loops is None:
        loops = gen.random(n) < p
    loops = np.asarray(loops, dtype=bool)
    lf = loops.astype(np.float64)

    v = gen.standard_normal(n)
    norm = np.linalg.norm(v)
    if n == 0 or norm == 0:
        return MixingEstimate(0.0, p, n, 0, tol, loops)
    v /= norm

    # |(P - Q) v| below this is rounding noise around an exact zero
    max_deg = int(g.degrees().max()) if n else 0
    zero_tol = 1e-12 * max(1.0, max_deg + 1.0 + p * n)

    lam = 0.0
    residual = float("inf")
    for iteration in range(1, max_iter + 1):
        u = _apply_centered(g, lf, p, v)
        new_lam = float(np.linalg.norm(u))
        if new_lam <= zero_tol:
            return MixingEstimate(0.0, p, n, iteration, tol, loops)
        w = _apply_centered(g, lf, p, u)
        w_norm = float(np.linalg.norm(w))
        if w_norm <= zero_tol * new_lam:
            return MixingEstimate(0.0, p, n, iteration, tol, loops)
        v = w / w_norm
        residual = abs(new_lam - lam) / new_lam
        lam = new_lam
        if residual < tol:
            logger.debug(f"lambda={lam:.4f} after {iteration} iterations")
            return MixingEstimate(lam, p, n, iteration, tol, loops)

    raise ConvergenceError(max_iter, residual)


def subset_discrepancy(
    g: Graph,
    p: float,
    loops: np.ndarray,
    A: np.ndarray,
    B: np.ndarray,
) -> np.ndarray:
    """
    |E(A,B) - p|A||B|| / sqrt(|A||B|) for boolean masks (columns of A, B).

    E(A,B) counts ordered pairs, both orientations of each edge, and a
    self-loop once when its vertex is in A and B. Empty sets give 0.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim == 1:
        A, B = A[:, None], B[:, None]
    lf = np.asarray(loops, dtype=np.float64)[:, None]
    PB = g.adjacency(weighted=False) @ B + lf * B
    edges = np.sum(A * PB, axis=0)
    size_a = A.sum(axis=0)
    size_b = B.sum(axis=0)
    denom = np.sqrt(size_a * size_b)
    out = np.zeros_like(edges)
    nonempty = denom > 0
    out[nonempty] = np.abs(edges[nonempty] - p * size_a[nonempty] * size_b[nonempty]) / denom[nonempty]
    return out


@dataclass
class MixingReport:
    """Worst sampled discrepancy against lambda."""

    max_discrepancy: float
    lam: float
    samples: int
    worst_sizes: Tuple[int, int]

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.lam

    def to_dict(self) -> dict:
        return {
            "max_discrepancy": self.max_discrepancy,
            "lambda": self.lam,
            "samples": self.samples,
            "worst_sizes": list(self.worst_sizes),
            "passed": self.passed,
        }


def mixing_lemma_check(
    g: Graph,
    p: float,
    lam: float,
    samples: int,
    rng: Rng,
    loops: Optional[np.ndarray] = None,
    batch: int = 256,
) -> MixingReport:
    """
    Sample subset pairs (A, B) of assorted sizes and report the worst discrepancy.

    Each subset keeps every vertex with its own uniformly drawn inclusion
    fraction, so sizes range over [0, n].
    """
    gen = rng.generator
    n = g.n
    if loops is None:
        loops = gen.random(n) < p

    worst = 0.0
    worst_sizes = (0, 0)
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        frac_a = gen.random(size)
        frac_b = gen.random(size)
        A = gen.random((n, size)) < frac_a
        B = gen.random((n, size)) < frac_b
        disc = subset_discrepancy(g, p, loops, A, B)
        k = int(np.argmax(disc)) if disc.size else 0
        if disc.size and disc[k] > worst:
            worst = float(disc[k])
            worst_sizes = (int(A[:, k].sum()), int(B[:, k].sum()))
        done += size

    return MixingReport(max_discrepancy=worst, lam=float(lam), samples=samples, worst_sizes=worst_sizes)


# ============================================================================
# Moment bounds
# ============================================================================


def one_sided_chebyshev(mean: float, second_moment: float, tau: float = 0.01) -> float:
    """
    Lower bound on P(W > tau * E[W]) from the first two moments:
    (1 - tau)^2 / (E[W^2]/E[W]^2 + (1 - tau)^2 - 1).
    """
    if not mean > 0:
        raise ValueError(f"mean must be positive, got {mean}")
    if second_moment < mean * mean * (1 - 1e-12):
        raise ValueError(f"second moment {second_moment} is below mean^2 = {mean * mean}")
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"tau must be in [0, 1), got {tau}")
    ratio = second_moment / (mean * mean)
    keep = (1.0 - tau) ** 2
    return keep / (ratio + keep - 1.0)


def expander_minority_bound(lam: float, alpha: float, p: float, n: int) -> float:
    """Vertices against sgn(m_t) after one step once |m_t| >= alpha: 2 lam^2 / (alpha^2 p^2 n)."""
    if alpha <= 0 or p <= 0 or n <= 0:
        raise ValueError("alpha, p and n must be positive")
    return 2.0 * lam * lam / (alpha * alpha * p * p * n)
