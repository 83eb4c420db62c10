# ============================================================================
# CHANGELOG (recent first, max 5 entries)
# 10/18/2026 - Level-graph spec with slices, weight assignment helpers
# 10/17/2026 - Configuration-model sampler with rejection budget
# 10/16/2026 - Seeded Rng streams, Gnp skip sampler, tree balls
# ============================================================================
"""
Seed-deterministic graph families and initial opinions.

Every generator is a pure function of its parameters and an Rng. An Rng
is identified by (seed, stream_id) plus an optional child path, and maps
to a numpy PCG64 generator through SeedSequence spawn keys, so trials
that use distinct stream ids get independent streams.

CS Concept: Gnp sampling uses **geometric skipping** - instead of flipping
a coin for each of the n(n-1)/2 pairs, we draw the gap to the next present
pair from a geometric distribution. The cost is proportional to the number
of edges, not the number of pairs.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csgraph

from .errors import GraphError, RejectionBudgetError
from .graph_core import Graph, OpinionState

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATTEMPTS = 10_000
_SEED_MASK = (1 << 64) - 1


class Rng:
    """
    Seeded random stream.

    Two instances with equal (seed, stream_id, path) produce identical
    sequences; distinct stream ids or paths are independent streams.

    Example:
        rng = Rng(seed=7, stream_id=3)
        graph_rng, opinion_rng = rng.child(0), rng.child(1)
    """

    def __init__(self, seed: int, stream_id: int = 0, path: Tuple[int, ...] = ()):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)
        seq = np.random.SeedSequence(
            entropy=self.seed & _SEED_MASK,
            spawn_key=(self.stream_id & _SEED_MASK,) + self.path,
        )
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def child(self, k: int) -> "Rng":
        """Independent sub-stream k of this stream."""
        return Rng(self.seed, self.stream_id, self.path + (int(k),))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"


def _check_probability(p: float, name: str) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {p}")
    return p


def _sorted_graph(n: int, lo: np.ndarray, hi: np.ndarray) -> Graph:
    order = np.lexsort((hi, lo))
    return Graph(n, np.stack([lo[order], hi[order]], axis=1))


# ============================================================================
# Random families
# ============================================================================


def _decode_pairs(k: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Map linear pair indices k = j(j-1)/2 + i (0 <= i < j) back to (i, j)."""
    j = np.floor((1.0 + np.sqrt(1.0 + 8.0 * k.astype(np.float64))) / 2.0).astype(np.int64)
    # float rounding is off by at most one either way
    j = np.where(j * (j - 1) // 2 > k, j - 1, j)
    j = np.where((j + 1) * j // 2 <= k, j + 1, j)
    i = k - j * (j - 1) // 2
    return i, j


def gen_gnp(n: int, p: float, rng: Rng) -> Graph:
    """
    Erdos-Renyi graph: each unordered pair present independently with probability p.

    Args:
        n: Vertex count (>= 1)
        p: Edge probability in [0, 1]
        rng: Random stream

    Returns:
        Graph with sorted canonical edges
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    p = _check_probability(p, "p")
    total = n * (n - 1) // 2

    if p == 0.0 or total == 0:
        return Graph(n, np.empty((0, 2), dtype=np.int64))
    if p == 1.0:
        lo, hi = np.triu_indices(n, k=1)
        return Graph(n, np.stack([lo, hi], axis=1))

    gen = rng.generator
    expected = total * p
    chunk = int(expected + 5.0 * math.sqrt(expected) + 64)
    blocks: List[np.ndarray] = []
    position = -1
    while True:
        gaps = gen.geometric(p, size=chunk)
        positions = position + np.cumsum(gaps)
        inside = positions[positions < total]
        blocks.append(inside)
        if inside.shape[0] < positions.shape[0]:
            break
        position = int(positions[-1])
        chunk = max(64, chunk // 4)

    k = np.concatenate(blocks)
    i, j = _decode_pairs(k)
    logger.debug(f"gnp n={n} p={p}: {k.shape[0]} edges (expected {expected:.1f})")
    return _sorted_graph(n, i, j)


def _try_pairing(n: int, d: int, gen: np.random.Generator) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    stubs = gen.permutation(np.repeat(np.arange(n, dtype=np.int64), d)).reshape(-1, 2)
    lo = np.minimum(stubs[:, 0], stubs[:, 1])
    hi = np.maximum(stubs[:, 0], stubs[:, 1])
    if np.any(lo == hi):
        return None
    keys = np.sort(lo * n + hi)
    if keys.shape[0] > 1 and np.any(keys[1:] == keys[:-1]):
        return None
    return lo, hi


def gen_random_regular(
    n: int,
    d: int,
    rng: Rng,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    require_connected: bool = False,
) -> Graph:
    """
    Random simple d-regular graph from the configuration (pairing) model.

    Whole pairings containing a self-loop or multi-edge are rejected and
    redrawn, which makes the output uniform over simple d-regular graphs.

    Args:
        n: Vertex count
        d: Degree, d < n and n*d even
        rng: Random stream
        max_attempts: Rejection budget
        require_connected: Also reject disconnected samples

    Raises:
        ValueError: n*d odd or d >= n
        RejectionBudgetError: no acceptable pairing within max_attempts
    """
    if n < 1 or d < 0:
        raise ValueError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    if int(d) != d:
        raise ValueError(f"degree must be an integer, got d={d}")
    d = int(d)
    if d >= n:
        raise ValueError(f"degree d={d} must be less than n={n}")
    if (n * d) % 2:
        raise ValueError(f"n*d must be even, got n={n}, d={d}")

    gen = rng.generator
    for attempt in range(1, max_attempts + 1):
        pairing = _try_pairing(n, d, gen)
        if pairing is None:
            continue
        g = _sorted_graph(n, *pairing)
        if require_connected and not is_connected(g):
            continue
        logger.debug(f"rrg n={n} d={d}: accepted on attempt {attempt}")
        return g

    raise RejectionBudgetError(max_attempts, n, d)


def pairing_acceptance_rate(n: int, d: int, attempts: int, rng: Rng) -> Tuple[float, float]:
    """
    Monte Carlo acceptance probability of a uniform pairing.

    Returns:
        (empirical rate, asymptotic reference exp(-(d^2 - 1) / 4))
    """
    gen = rng.generator
    accepted = sum(_try_pairing(n, d, gen) is not None for _ in range(attempts))
    return accepted / attempts, math.exp(-(d * d - 1) / 4.0)


# ============================================================================
# Deterministic families
# ============================================================================


def gen_tree_ball(d: int, radius: int) -> Graph:
    """
    Ball of the given radius around the root of the infinite d-regular tree.

    The root has d children, other internal vertices d - 1 children, and
    leaves have degree 1. Vertices are numbered breadth-first.
    """
    if d < 2 or radius < 0:
        raise ValueError(f"need d >= 2 and radius >= 0, got d={d}, radius={radius}")
    if int(d) != d:
        raise ValueError(f"degree must be an integer, got d={d}")
    d = int(d)

    parents: List[np.ndarray] = []
    children: List[np.ndarray] = []
    layer = np.array([0], dtype=np.int64)
    next_id = 1
    for depth in range(radius):
        fanout = d if depth == 0 else d - 1
        kids = np.arange(next_id, next_id + layer.shape[0] * fanout, dtype=np.int64)
        parents.append(np.repeat(layer, fanout))
        children.append(kids)
        next_id += kids.shape[0]
        layer = kids

    if not parents:
        return Graph(1, np.empty((0, 2), dtype=np.int64))
    return Graph(next_id, np.stack([np.concatenate(parents), np.concatenate(children)], axis=1))


@dataclass(frozen=True)
class LevelGraphSpec:
    """
    Layered graph with levels L_0, L_1, ... of sizes 2^(k+1) - 1.

    Each vertex is adjacent to every other vertex of its own level and of
    the two neighboring levels.
    """

    depth: int

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be at least 1, got {self.depth}")

    @property
    def level_sizes(self) -> List[int]:
        return [(1 << (k + 1)) - 1 for k in range(self.depth)]

    @property
    def offsets(self) -> List[int]:
        """Start index of every level, plus n at the end."""
        out = [0]
        for size in self.level_sizes:
            out.append(out[-1] + size)
        return out

    @property
    def n(self) -> int:
        return self.offsets[-1]

    def level_slices(self) -> List[slice]:
        off = self.offsets
        return [slice(off[k], off[k + 1]) for k in range(self.depth)]

    def level_of(self) -> np.ndarray:
        """Level index of every vertex."""
        return np.repeat(np.arange(self.depth), self.level_sizes)

    def degrees(self) -> np.ndarray:
        """Per-level degree."""
        sizes = self.level_sizes
        deg = []
        for k, size in enumerate(sizes):
            below = sizes[k - 1] if k > 0 else 0
            above = sizes[k + 1] if k + 1 < self.depth else 0
            deg.append(below + size - 1 + above)
        return np.array(deg, dtype=np.int64)


def gen_level_graph(spec: LevelGraphSpec) -> Graph:
    """
    Materialize the level graph described by spec.

    For interior levels strictly more than half of every vertex's voters
    sit one level up.
    """
    lo_parts: List[np.ndarray] = []
    hi_parts: List[np.ndarray] = []
    off = spec.offsets
    for k, size in enumerate(spec.level_sizes):
        a, b = np.triu_indices(size, k=1)
        lo_parts.append(a + off[k])
        hi_parts.append(b + off[k])
        if k > 0:
            below = np.arange(off[k - 1], off[k], dtype=np.int64)
            here = np.arange(off[k], off[k + 1], dtype=np.int64)
            lo_parts.append(np.repeat(below, here.shape[0]))
            hi_parts.append(np.tile(here, below.shape[0]))

    lo = np.concatenate(lo_parts).astype(np.int64)
    hi = np.concatenate(hi_parts).astype(np.int64)
    logger.debug(f"level graph depth={spec.depth}: n={spec.n}, m={lo.shape[0]}")
    return _sorted_graph(spec.n, lo, hi)


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError(f"a cycle needs at least 3 vertices, got {n}")
    lo = np.arange(n - 1, dtype=np.int64)
    edges = np.concatenate([np.stack([lo, lo + 1], axis=1), [[0, n - 1]]])
    return _sorted_graph(n, edges[:, 0], edges[:, 1])


def gen_path(n: int) -> Graph:
    if n < 1:
        raise ValueError(f"a path needs at least 1 vertex, got {n}")
    lo = np.arange(n - 1, dtype=np.int64)
    return Graph(n, np.stack([lo, lo + 1], axis=1))


def gen_complete(n: int) -> Graph:
    if n < 1:
        raise ValueError(f"need at least 1 vertex, got {n}")
    lo, hi = np.triu_indices(n, k=1)
    return Graph(n, np.stack([lo, hi], axis=1))


# ============================================================================
# Opinions and weights
# ============================================================================


def gen_opinions_iid(n: int, q: float, rng: Rng) -> OpinionState:
    """Each opinion +1 independently with probability q, else -1; time 0."""
    q = _check_probability(q, "q")
    values = np.where(rng.generator.random(n) < q, 1, -1).astype(np.int8)
    return OpinionState(values, time=0)


def constant_opinions(n: int, sign: int) -> OpinionState:
    if sign not in (-1, 1):
        raise ValueError(f"sign must be -1 or +1, got {sign}")
    return OpinionState(np.full(n, sign, dtype=np.int8), time=0)


def assign_odd_weights(g: Graph, rng: Rng, choices: Sequence[int] = (1, 3, 5)) -> Graph:
    """
    Weight every edge with an odd integer drawn from choices.

    With an odd self-weight every vote sum is a sum of an odd number of odd
    integers, so |sum| >= 1 and epsilon = 1 exactly.
    """
    if any(int(c) % 2 == 0 or c <= 0 for c in choices):
        raise GraphError(f"weight choices must be positive odd integers, got {list(choices)}")
    w = rng.generator.choice(np.asarray(choices, dtype=np.float64), size=g.m)
    return g.with_weights(w)


def assign_uniform_weights(g: Graph, rng: Rng, low: float = 0.5, high: float = 1.5) -> Graph:
    """Weight every edge uniformly in [low, high); ties have probability zero."""
    if not 0 <= low < high:
        raise GraphError(f"need 0 <= low < high, got [{low}, {high})")
    return g.with_weights(rng.generator.uniform(low, high, size=g.m))


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    count, _ = csgraph.connected_components(g.adjacency(), directed=False)
    return count == 1
