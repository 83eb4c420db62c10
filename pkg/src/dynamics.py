# ============================================================================
# CHANGELOG (recent first, max 5 entries)
# 10/18/2026 - Structured vote operator for level graphs, batched runs
# 10/17/2026 - Potential identity and unanimity checks inside run()
# 10/16/2026 - Synchronous step, weighted step, lag-2 termination detection
# ============================================================================
"""
Synchronous majority dynamics.

Every step computes all vote sums from the previous state, so the update
is order-independent by construction. A run stops the first time the
state repeats at lag two, which covers fixed points (lag one) as well.

CS Concept: the run loop keeps the last three states and a blake2b digest
of each. Digests make the lag-2 comparison cheap, and equality is always
confirmed exactly before the run is declared terminated.

Potential bookkeeping: with V_i the total voter weight of vertex i and
S_i(t) its vote sum, L_t = (sum V_i - sum |S_i(t)|) / (2n). In the
unweighted case the numerator (sum V - sum |S|) / 2 is an integer, so the
potential and its decrement identity are checked exactly.
"""

import hashlib
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from .errors import (
    EnumerationCapError,
    GraphError,
    InvariantViolation,
    RegularityError,
    TieError,
)
from .generators import LevelGraphSpec
from .graph_core import Graph, OpinionState, RegularityParams

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 10_000
DEFAULT_MAX_ENUM_DEGREE = 20
TIE_RTOL = 1e-12
IDENTITY_RTOL = 1e-12

# Enumeration works on blocks of at most this many signed sums
_ENUM_BLOCK = 1 << 22


class TerminalKind(str, Enum):
    FIXED_POINT = "fixed-point"
    PERIOD_TWO = "period-two"
    BUDGET_EXHAUSTED = "step-budget-exhausted"


# ============================================================================
# Vote operators
# ============================================================================


class VoteOperator(ABC):
    """
    Computes every vertex's vote sum for one state (or a batch of states).

    Subclasses must implement:
    - sums(x): vote sums for an (n,) state or an (n, B) batch
    - voter_totals(): total voter weight V_i per vertex
    """

    n: int = 0
    exact: bool = True

    @abstractmethod
    def sums(self, x: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def voter_totals(self) -> np.ndarray:
        pass

    def next_state(self, sums: np.ndarray, time: int = 0) -> np.ndarray:
        """Sign of the vote sums; raises TieError on a zero weighted sum."""
        if not self.exact:
            totals = self.voter_totals()
            if sums.ndim == 2:
                totals = totals[:, None]
            tied = np.abs(sums) <= TIE_RTOL * totals
            if np.any(tied):
                flat = np.argwhere(tied)[0]
                vertex = int(flat[0])
                raise TieError(vertex, time, float(sums[tuple(flat)]))
        return np.where(sums > 0, 1, -1).astype(np.int8)


class GraphVotes(VoteOperator):
    """Vote sums on an explicit Graph, unweighted (int64) or weighted (float64)."""

    def __init__(self, g: Graph, weighted: bool = False, self_weight: float = 1.0):
        if self_weight < 0:
            raise ValueError(f"self_weight must be non-negative, got {self_weight}")
        self.graph = g
        self.n = g.n
        self.exact = not weighted
        self.self_weight = 1.0 if self.exact else float(self_weight)
        self._mask = g.self_vote_mask()
        self._totals: Optional[np.ndarray] = None

    def sums(self, x: np.ndarray) -> np.ndarray:
        mask = self._mask if x.ndim == 1 else self._mask[:, None]
        if self.exact:
            xi = x.astype(np.int64)
            return self.graph.adjacency(weighted=False) @ xi + mask * xi
        xf = x.astype(np.float64)
        return self.graph.adjacency(weighted=True) @ xf + (self.self_weight * mask) * xf

    def voter_totals(self) -> np.ndarray:
        if self._totals is None:
            if self.exact:
                self._totals = self.graph.voter_counts()
            else:
                row = np.asarray(self.graph.adjacency(weighted=True).sum(axis=1)).reshape(-1)
                self._totals = row + self.self_weight * self._mask
        return self._totals


class LevelVotes(VoteOperator):
    """
    Vote sums on the level graph without materializing its edges.

    A vertex v of level k hears every vertex of levels k-1, k, k+1 except
    itself, plus itself when its degree is even, so
    S_v = T_{k-1} + T_k + T_{k+1} + (self_k - 1) * x_v with T the level sums.
    """

    def __init__(self, spec: LevelGraphSpec):
        self.spec = spec
        self.n = spec.n
        self.exact = True
        self._sizes = np.array(spec.level_sizes, dtype=np.int64)
        self._starts = np.array(spec.offsets[:-1], dtype=np.int64)
        degrees = spec.degrees()
        self_vote = (degrees % 2 == 0).astype(np.int64)
        self._coef = np.repeat(self_vote - 1, self._sizes)
        self._totals = np.repeat(degrees + self_vote, self._sizes)

    def sums(self, x: np.ndarray) -> np.ndarray:
        xi = x.astype(np.int64)
        level = np.add.reduceat(xi, self._starts, axis=0)
        pad = np.zeros((1,) + level.shape[1:], dtype=np.int64)
        padded = np.concatenate([pad, level, pad], axis=0)
        around = padded[:-2] + padded[1:-1] + padded[2:]
        coef = self._coef if x.ndim == 1 else self._coef[:, None]
        return np.repeat(around, self._sizes, axis=0) + coef * xi

    def voter_totals(self) -> np.ndarray:
        return self._totals


def make_operator(
    g: Union[Graph, LevelGraphSpec, VoteOperator],
    step_kind: str = "auto",
    self_weight: float = 1.0,
) -> VoteOperator:
    """
    Pick the vote operator for a graph.

    Args:
        g: Graph, LevelGraphSpec, or an operator (returned unchanged)
        step_kind: "unweighted", "weighted", or "auto" (weighted iff g has weights)
        self_weight: Self-vote weight for weighted steps
    """
    if isinstance(g, VoteOperator):
        return g
    if isinstance(g, LevelGraphSpec):
        return LevelVotes(g)
    if step_kind not in ("auto", "unweighted", "weighted"):
        raise ValueError(f"unknown step kind {step_kind!r}")
    weighted = g.is_weighted if step_kind == "auto" else step_kind == "weighted"
    return GraphVotes(g, weighted=weighted, self_weight=self_weight)


def _values(x: Union[OpinionState, np.ndarray]) -> np.ndarray:
    return x.values if isinstance(x, OpinionState) else np.asarray(x, dtype=np.int8)


def _time(x: Union[OpinionState, np.ndarray]) -> int:
    return x.time if isinstance(x, OpinionState) else 0


# ============================================================================
# Single steps
# ============================================================================


def step(g: Graph, x: OpinionState) -> OpinionState:
    """
    One synchronous unweighted majority step.

    Each vertex takes the sign of the sum over its effective neighborhood
    (self included when its degree is even). The voter count is odd, so
    the sum is never zero.
    """
    if x.n != g.n:
        raise GraphError(f"state has {x.n} entries, graph has {g.n} vertices")
    op = GraphVotes(g)
    return OpinionState(op.next_state(op.sums(x.values)), time=x.time + 1)


def weighted_step(g: Graph, x: OpinionState, self_weight: float = 1.0) -> OpinionState:
    """
    One synchronous weighted majority step.

    Graphs without weights are treated as all-ones weights.

    Raises:
        TieError: a vote sum is zero (within 1e-12 of the voter weight total)
    """
    if x.n != g.n:
        raise GraphError(f"state has {x.n} entries, graph has {g.n} vertices")
    op = GraphVotes(g, weighted=True, self_weight=self_weight)
    return OpinionState(op.next_state(op.sums(x.values), time=x.time), time=x.time + 1)


def vote_sum_at(g: Graph, x: np.ndarray, i: int, self_weight: float = 1.0) -> float:
    """Vote sum of a single vertex, evaluated from its neighbor list."""
    nbrs = g.neighbors(i)
    if g.is_weighted:
        total = sum(g.weight(i, int(j)) * float(x[j]) for j in nbrs)
        if nbrs.shape[0] % 2 == 0:
            total += self_weight * float(x[i])
        return total
    total = int(np.sum(x[nbrs], dtype=np.int64))
    if nbrs.shape[0] % 2 == 0:
        total += int(x[i])
    return total


# ============================================================================
# (epsilon, W)-regularity
# ============================================================================


def _sign_patterns(c: int) -> np.ndarray:
    """(2^c, c) matrix of +/-1; bit b of the row index set means voter b is -1."""
    rows = np.arange(1 << c, dtype=np.int64)[:, None]
    bits = (rows >> np.arange(c, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.float64)


def validate_regularity(
    g: Graph,
    self_weight: float = 1.0,
    max_enum_degree: int = DEFAULT_MAX_ENUM_DEGREE,
) -> RegularityParams:
    """
    Certify (epsilon, W) for the weighted dynamics on g.

    Unweighted graphs are analytic: epsilon = 1 (integer sums of an odd
    number of +/-1) and W = max voter count. Weighted graphs enumerate all
    sign patterns of every vertex's voters.

    Raises:
        RegularityError: some sign pattern sums to zero, with the witness
            vertex and pattern (+1/-1 per voter, neighbors first, self last)
        EnumerationCapError: a vertex degree exceeds max_enum_degree
    """
    if g.n == 0:
        raise GraphError("regularity is undefined on the empty vertex set")

    if not g.is_weighted:
        return RegularityParams(epsilon=1.0, W=float(g.voter_counts().max()))

    degrees = g.degrees()
    too_big = np.flatnonzero(degrees > max_enum_degree)
    if too_big.size:
        v = int(too_big[0])
        raise EnumerationCapError(
            f"vertex {v} has degree {int(degrees[v])} > max_enum_degree={max_enum_degree}; "
            "rely on runtime tie detection instead",
            vertex=v,
        )

    mask = g.self_vote_mask()
    entry_w = g.entry_weights()
    indptr = g.indptr

    epsilon = np.inf
    W = 0.0
    voter_counts = degrees + mask
    for c in np.unique(voter_counts):
        c = int(c)
        members = np.flatnonzero(voter_counts == c)
        rows = np.zeros((members.shape[0], c), dtype=np.float64)
        for r, v in enumerate(members):
            nbr_w = entry_w[indptr[v]:indptr[v + 1]]
            rows[r, :nbr_w.shape[0]] = nbr_w
            if mask[v]:
                rows[r, -1] = self_weight
        totals = rows.sum(axis=1)
        W = max(W, float(totals.max()))

        patterns = _sign_patterns(c)
        block = max(1, _ENUM_BLOCK // patterns.shape[0])
        for start in range(0, members.shape[0], block):
            chunk = rows[start:start + block]
            signed = np.abs(chunk @ patterns.T)
            best = signed.argmin(axis=1)
            best_val = signed[np.arange(chunk.shape[0]), best]
            tied = best_val <= TIE_RTOL * totals[start:start + block]
            if np.any(tied):
                r = int(np.flatnonzero(tied)[0])
                v = int(members[start + r])
                pattern = patterns[best[r]].astype(int).tolist()
                raise RegularityError(
                    f"vertex {v} admits a tie: weights {chunk[r].tolist()} with signs {pattern}",
                    vertex=v,
                    pattern=pattern,
                )
            epsilon = min(epsilon, float(best_val.min()))

    logger.debug(f"regularity certified: epsilon={epsilon}, W={W}")
    return RegularityParams(epsilon=epsilon, W=W)


# ============================================================================
# Potential
# ============================================================================


def potential(
    g: Graph,
    x_t: Union[OpinionState, np.ndarray],
    x_next: Union[OpinionState, np.ndarray],
    self_weight: float = 1.0,
) -> Union[Fraction, float]:
    """
    L_t = (1/(4n)) * sum_i sum_{j in effective N(i)} w(i,j) (x_i(t+1) - x_j(t))^2.

    Evaluated term by term from the definition. Exact Fraction for
    unweighted graphs, float for weighted ones.
    """
    a, b = _values(x_t), _values(x_next)
    if g.n == 0:
        return Fraction(0)
    rows = np.repeat(np.arange(g.n), g.degrees())
    diff = b[rows].astype(np.int64) - a[g.indices].astype(np.int64)
    self_diff = (b.astype(np.int64) - a.astype(np.int64)) * g.self_vote_mask()

    if not g.is_weighted:
        total = int(np.sum(diff * diff)) + int(np.sum(self_diff * self_diff))
        return Fraction(total, 4 * g.n)

    total = float(np.sum(g.entry_weights() * (diff * diff)))
    total += float(self_weight * np.sum(self_diff * self_diff))
    return total / (4.0 * g.n)


def potential_decrement_check(
    g: Graph,
    x_prev: Union[OpinionState, np.ndarray],
    x_t: Union[OpinionState, np.ndarray],
    x_next: Union[OpinionState, np.ndarray],
    self_weight: float = 1.0,
) -> Tuple[Union[Fraction, float], Union[Fraction, float]]:
    """
    Both sides of the potential decrement identity.

    lhs = L_t - L_{t-1}
    rhs = -(1/n) * sum_i 1[x_i(t+1) != x_i(t-1)] * |S_i(t)|

    Returns:
        (lhs, rhs), exact Fractions for unweighted graphs
    """
    a, b, c = _values(x_prev), _values(x_t), _values(x_next)
    lhs = potential(g, b, c, self_weight) - potential(g, a, b, self_weight)

    op = make_operator(g, "auto", self_weight)
    changed = c != a
    sums = op.sums(b)
    if op.exact:
        rhs: Union[Fraction, float] = Fraction(-int(np.abs(sums[changed]).sum()), g.n)
    else:
        rhs = -float(np.abs(sums[changed]).sum()) / g.n
    return lhs, rhs


# ============================================================================
# Runs
# ============================================================================


@dataclass
class Trace:
    """
    Per-step statistics of one run, rows t = 0..last.

    Attributes:
        means: Global mean m_t
        flips2: #{i : x_i(t) != x_i(t-2)}, None for t < 2
        potentials: L_t as float
        potential_numerators: P_t with L_t = P_t / n (unweighted runs only)
        unanimous: |m_t| == 1
        flip_counts: Per-vertex cumulative lag-2 flip counters
        states: Full states when recorded
    """

    n: int
    means: List[float] = field(default_factory=list)
    flips2: List[Optional[int]] = field(default_factory=list)
    potentials: List[float] = field(default_factory=list)
    potential_numerators: Optional[List[int]] = None
    unanimous: List[bool] = field(default_factory=list)
    flip_counts: Optional[np.ndarray] = None
    states: Optional[List[np.ndarray]] = None

    def __len__(self) -> int:
        return len(self.means)

    def exact_potential(self, t: int) -> Fraction:
        if self.potential_numerators is None:
            raise ValueError("exact potentials are only kept for unweighted runs")
        return Fraction(self.potential_numerators[t], self.n)

    def average_flips(self) -> float:
        """Per-vertex average of the lag-2 flip counters."""
        if self.flip_counts is None or self.n == 0:
            return 0.0
        return float(self.flip_counts.mean())

    def ever_unanimous(self) -> bool:
        return any(self.unanimous)

    def state_at(self, t: int) -> np.ndarray:
        """
        Recorded state at time t.

        Times past the last row are read off the terminal orbit, which is
        only meaningful when the run ended by a lag-2 repeat.
        """
        if self.states is None:
            raise ValueError("states were not recorded for this run")
        last = len(self.states) - 1
        if t <= last:
            return self.states[t]
        return self.states[last - ((t - last) % 2)]

    def plus_fraction(self, t: int) -> float:
        return (1.0 + self.means[t]) / 2.0

    def rows(self):
        """(t, mean, flips2, potential, unanimous) per step."""
        for t in range(len(self)):
            yield t, self.means[t], self.flips2[t], self.potentials[t], self.unanimous[t]


@dataclass
class RunOutcome:
    """
    How a run ended.

    entry_time is T*, the first t >= 2 with x(t) = x(t-2); None when the
    budget ran out. final_states holds (x(last-1), x(last)).
    """

    kind: TerminalKind
    entry_time: Optional[int]
    final_states: Tuple[OpinionState, OpinionState]
    steps: int

    @property
    def converged(self) -> bool:
        return self.kind != TerminalKind.BUDGET_EXHAUSTED

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "entry_time": self.entry_time,
            "steps": self.steps,
            "final_mean": self.final_states[1].mean(),
        }


def _digest(x: np.ndarray) -> bytes:
    return hashlib.blake2b(x.tobytes(), digest_size=16).digest()


def run(
    g: Union[Graph, LevelGraphSpec, VoteOperator],
    x0: OpinionState,
    step_kind: str = "auto",
    max_steps: int = DEFAULT_MAX_STEPS,
    self_weight: float = 1.0,
    check_invariants: bool = True,
    record_states: bool = False,
    observer: Optional[Callable[[int, np.ndarray], None]] = None,
) -> Tuple[Trace, RunOutcome]:
    """
    Iterate the dynamics until the state repeats at lag two.

    Args:
        g: Graph, LevelGraphSpec, or a prepared VoteOperator
        x0: Initial state
        step_kind: "auto", "unweighted" or "weighted"
        max_steps: Budget T_max (>= 2); rows 0..T_max are produced at most
        self_weight: Self-vote weight for weighted steps
        check_invariants: Assert the potential identity, monotonicity and
            absorbing unanimity at every step
        record_states: Keep every state in trace.states
        observer: Called with (t, x_t) for every t

    Returns:
        (Trace, RunOutcome); budget exhaustion is an outcome, not an error

    Raises:
        TieError: weighted vote sum of zero
        InvariantViolation: a checked identity failed
    """
    if max_steps < 2:
        raise ValueError(f"max_steps must be at least 2, got {max_steps}")
    op = make_operator(g, step_kind, self_weight)
    n = op.n
    if x0.n != n:
        raise GraphError(f"state has {x0.n} entries, graph has {n} vertices")

    totals = op.voter_totals()
    total_voters = int(totals.sum()) if op.exact else float(totals.sum())
    scale = max(1.0, float(total_voters) / max(n, 1))

    trace = Trace(n=n, potential_numerators=[] if op.exact else None)
    trace.flip_counts = np.zeros(n, dtype=np.int64)
    if record_states:
        trace.states = []

    prev2: Optional[np.ndarray] = None
    prev1: Optional[np.ndarray] = None
    digests: List[bytes] = []
    cur = x0.values
    t = 0
    last_numerator: Optional[int] = None
    last_potential: Optional[float] = None
    kind = TerminalKind.BUDGET_EXHAUSTED
    entry_time: Optional[int] = None

    while True:
        digest = _digest(cur)
        repeated = (
            prev2 is not None
            and digest == digests[-2]
            and np.array_equal(cur, prev2)
        )
        if prev2 is not None:
            changed2 = cur != prev2
            trace.flip_counts += changed2
            trace.flips2.append(int(changed2.sum()))
        else:
            trace.flips2.append(None)

        total = int(cur.sum(dtype=np.int64))
        trace.means.append(total / n if n else 0.0)
        trace.unanimous.append(n > 0 and abs(total) == n)
        if record_states:
            trace.states.append(cur.copy())
        if observer is not None:
            observer(t, cur)

        sums = op.sums(cur)
        nxt = op.next_state(sums, time=t)
        abs_sums = np.abs(sums)

        if op.exact:
            numerator = (total_voters - int(abs_sums.sum())) // 2
            trace.potential_numerators.append(numerator)
            pot = numerator / n if n else 0.0
        else:
            pot = (total_voters - float(abs_sums.sum())) / (2.0 * n) if n else 0.0
        trace.potentials.append(pot)

        if check_invariants and n:
            if trace.unanimous[-1] and not np.array_equal(nxt, cur):
                raise InvariantViolation(f"unanimous state changed at t={t}")
            if prev1 is not None:
                changed = nxt != prev1
                if op.exact:
                    lhs = numerator - last_numerator
                    rhs = -int(abs_sums[changed].sum())
                    if lhs != rhs:
                        raise InvariantViolation(
                            f"potential identity failed at t={t}: "
                            f"n*(L_t - L_t-1) = {lhs}, expected {rhs}"
                        )
                    if numerator > last_numerator:
                        raise InvariantViolation(f"potential increased at t={t}")
                else:
                    lhs_f = pot - last_potential
                    rhs_f = -float(abs_sums[changed].sum()) / n
                    if abs(lhs_f - rhs_f) > IDENTITY_RTOL * scale:
                        raise InvariantViolation(
                            f"potential identity failed at t={t}: {lhs_f!r} vs {rhs_f!r}"
                        )
                    if pot > last_potential + IDENTITY_RTOL * scale:
                        raise InvariantViolation(f"potential increased at t={t}")

        if repeated:
            entry_time = t
            kind = (
                TerminalKind.FIXED_POINT
                if np.array_equal(cur, prev1)
                else TerminalKind.PERIOD_TWO
            )
            break
        if t >= max_steps:
            break

        last_numerator = numerator if op.exact else None
        last_potential = pot
        prev2, prev1 = prev1, cur
        digests = (digests + [digest])[-2:]
        cur = nxt
        t += 1

    final = (
        OpinionState(prev1 if prev1 is not None else cur, time=max(t - 1, 0)),
        OpinionState(cur, time=t),
    )
    outcome = RunOutcome(kind=kind, entry_time=entry_time, final_states=final, steps=t)
    logger.debug(f"run finished: {kind.value} at t={t} (n={n})")
    return trace, outcome


@dataclass
class BatchOutcome:
    """
    Per-column results of run_batch().

    entry_times[b] is T* for column b, or -1 when the budget ran out.
    """

    entry_times: np.ndarray
    fixed_point: np.ndarray

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.entry_times >= 0))


def run_batch(
    g: Union[Graph, LevelGraphSpec, VoteOperator],
    X0: np.ndarray,
    max_steps: int = DEFAULT_MAX_STEPS,
    step_kind: str = "auto",
    self_weight: float = 1.0,
) -> BatchOutcome:
    """
    Evolve many initial states at once; columns of X0 are states.

    Used for exhaustive checks over all 2^n initial states of small graphs.
    """
    op = make_operator(g, step_kind, self_weight)
    X = np.asarray(X0, dtype=np.int8)
    if X.ndim != 2 or X.shape[0] != op.n:
        raise ValueError(f"expected an ({op.n}, B) state matrix, got {X.shape}")
    batch = X.shape[1]
    entry = np.full(batch, -1, dtype=np.int64)
    fixed = np.zeros(batch, dtype=bool)
    active = np.ones(batch, dtype=bool)

    prev2: Optional[np.ndarray] = None
    prev1: Optional[np.ndarray] = None
    cur = X
    for t in range(max_steps + 1):
        if prev2 is not None:
            same2 = np.all(cur == prev2, axis=0)
            newly = same2 & active
            entry[newly] = t
            fixed[newly] = np.all(cur[:, newly] == prev1[:, newly], axis=0)
            active &= ~same2
            if not active.any():
                break
        if t == max_steps:
            break
        nxt = op.next_state(op.sums(cur), time=t)
        prev2, prev1, cur = prev1, cur, nxt

    return BatchOutcome(entry_times=entry, fixed_point=fixed)


def flip_bound(
    trace: Trace,
    params: RegularityParams,
    strict: bool = True,
) -> Tuple[float, float]:
    """
    Compare the per-vertex average lag-2 flip count with 2W/epsilon.

    Returns:
        (average flips, bound)

    Raises:
        InvariantViolation: average exceeds the bound and strict is set
    """
    average = trace.average_flips()
    bound = params.flip_bound
    if strict and average > bound:
        raise InvariantViolation(f"average flips {average} exceed 2W/epsilon = {bound}")
    return average, bound
