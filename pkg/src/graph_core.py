# ============================================================================
# CHANGELOG (recent first, max 5 entries)
# 10/18/2026 - Edge-list reader reports the offending line for duplicate edges
# 10/17/2026 - Lazy CSR adjacency (scipy csr_array), weighted entries
# 10/16/2026 - Initial Graph / OpinionState / RegularityParams types
# ============================================================================
"""
Graph representation for majority dynamics.

A Graph is an immutable undirected simple graph on vertices 0..n-1. Edges
are stored once per undirected pair as (i, j) with i < j, sorted, with an
optional aligned weight vector. The compressed (CSR) adjacency is built
lazily the first time a neighbor query or a matrix product needs it.

CS Concept: storing each undirected edge exactly once makes symmetry of
the weights hold by construction - w(i,j) and w(j,i) are literally the
same float, so there is nothing to keep in sync.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np
from scipy import sparse

from .errors import EdgeListFormatError, GraphError

logger = logging.getLogger(__name__)


class Graph:
    """
    Immutable undirected simple graph with optional per-edge weights.

    Attributes:
        n: Vertex count
        edges: (m, 2) int64 array of canonical pairs, i < j, sorted
        weights: (m,) float64 array aligned with edges, or None
    """

    __slots__ = ("n", "edges", "weights", "_indptr", "_indices", "_entry_edge", "_adj_cache")

    def __init__(self, n: int, edges: np.ndarray, weights: Optional[np.ndarray] = None):
        # Callers outside this module go through build_graph(), which validates.
        self.n = int(n)
        self.edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        self.edges.setflags(write=False)
        if weights is not None:
            weights = np.ascontiguousarray(weights, dtype=np.float64)
            weights.setflags(write=False)
        self.weights = weights
        self._indptr: Optional[np.ndarray] = None
        self._indices: Optional[np.ndarray] = None
        self._entry_edge: Optional[np.ndarray] = None
        self._adj_cache: dict = {}

    # ------------------------------------------------------------------
    # Size queries
    # ------------------------------------------------------------------

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return int(self.edges.shape[0])

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    def degrees(self) -> np.ndarray:
        """Degree of every vertex (int64)."""
        return np.diff(self.indptr)

    def degree(self, i: int) -> int:
        self._check_vertex(i)
        return int(self.indptr[i + 1] - self.indptr[i])

    def self_vote_mask(self) -> np.ndarray:
        """True where the degree is even (including 0), so the vertex votes for itself."""
        return self.degrees() % 2 == 0

    def voter_counts(self) -> np.ndarray:
        """Effective voter count deg(i) + [deg(i) even]; always odd."""
        deg = self.degrees()
        return deg + (deg % 2 == 0)

    # ------------------------------------------------------------------
    # CSR structure
    # ------------------------------------------------------------------

    def _build_csr(self) -> None:
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        edge_id = np.concatenate([np.arange(self.m), np.arange(self.m)])
        order = np.lexsort((dst, src))
        counts = np.bincount(src, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])

        self._indptr = indptr
        self._indices = dst[order]
        self._entry_edge = edge_id[order]
        for arr in (self._indptr, self._indices, self._entry_edge):
            arr.setflags(write=False)
        logger.debug(f"Built CSR for n={self.n}, m={self.m}")

    @property
    def indptr(self) -> np.ndarray:
        if self._indptr is None:
            self._build_csr()
        return self._indptr

    @property
    def indices(self) -> np.ndarray:
        if self._indices is None:
            self._build_csr()
        return self._indices

    def entry_weights(self) -> np.ndarray:
        """Weight of every directed CSR entry (ones when unweighted)."""
        if self._entry_edge is None:
            self._build_csr()
        if self.weights is None:
            return np.ones(self._entry_edge.shape[0], dtype=np.float64)
        return self.weights[self._entry_edge]

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted neighbor indices of vertex i."""
        self._check_vertex(i)
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def weight(self, i: int, j: int) -> float:
        """
        Weight of edge {i, j} (1.0 for unweighted graphs).

        Raises:
            GraphError: if the edge does not exist
        """
        nbrs = self.neighbors(i)
        pos = int(np.searchsorted(nbrs, j))
        if pos >= nbrs.shape[0] or nbrs[pos] != j:
            raise GraphError(f"no edge between {i} and {j}", edge=(i, j))
        if self.weights is None:
            return 1.0
        if self._entry_edge is None:
            self._build_csr()
        return float(self.weights[self._entry_edge[self.indptr[i] + pos]])

    def adjacency(self, weighted: bool = False) -> sparse.csr_array:
        """
        Symmetric adjacency as a scipy CSR array.

        Args:
            weighted: Use edge weights (float64); otherwise int64 ones

        Returns:
            n x n csr_array without diagonal entries
        """
        key = bool(weighted and self.weights is not None)
        if key not in self._adj_cache:
            if key:
                data = self.entry_weights()
            else:
                data = np.ones(self.indices.shape[0], dtype=np.int64)
            self._adj_cache[key] = sparse.csr_array(
                (data, self.indices, self.indptr), shape=(self.n, self.n)
            )
        return self._adj_cache[key]

    # ------------------------------------------------------------------

    def with_weights(self, weights: Sequence[float]) -> "Graph":
        """Copy of this graph carrying the given weights (aligned with .edges)."""
        w = np.asarray(weights, dtype=np.float64)
        _check_weights(w, self.m, self.edges)
        return Graph(self.n, self.edges, w)

    def edge_list(self) -> List[Tuple[int, int]]:
        return [(int(i), int(j)) for i, j in self.edges]

    def _check_vertex(self, i: int) -> None:
        if not 0 <= int(i) < self.n:
            raise GraphError(f"vertex {i} out of range [0, {self.n})", index=int(i))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        if self.n != other.n or not np.array_equal(self.edges, other.edges):
            return False
        if self.weights is None or other.weights is None:
            return self.weights is None and other.weights is None
        return bool(np.array_equal(self.weights, other.weights))

    __hash__ = None

    def __repr__(self) -> str:
        kind = "weighted " if self.is_weighted else ""
        return f"<{kind}Graph n={self.n} m={self.m}>"


@dataclass(frozen=True, eq=False)
class OpinionState:
    """
    Vector of +/-1 opinions at a given time step.

    The values array is int8 and read-only; steps produce new states.
    """

    values: np.ndarray
    time: int = 0

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.int8, copy=True).reshape(-1)
        if vals.size and not np.all((vals == 1) | (vals == -1)):
            bad = int(np.flatnonzero((vals != 1) & (vals != -1))[0])
            raise ValueError(f"opinion at vertex {bad} is {self.values[bad]!r}, expected -1 or +1")
        if self.time < 0:
            raise ValueError(f"time must be non-negative, got {self.time}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def mean(self) -> float:
        return float(self.values.mean()) if self.n else 0.0

    def is_unanimous(self) -> bool:
        return self.n > 0 and bool(np.all(self.values == self.values[0]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OpinionState):
            return NotImplemented
        return self.time == other.time and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class RegularityParams:
    """
    (epsilon, W) pair: every achievable vote sum is at least epsilon in
    magnitude, and W bounds the weighted voter total.
    """

    epsilon: float
    W: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.W > 0:
            raise ValueError(f"W must be positive, got {self.W}")

    @property
    def flip_bound(self) -> float:
        """Per-vertex average lag-2 flip bound 2W/epsilon."""
        return 2.0 * self.W / self.epsilon


def _check_weights(w: np.ndarray, m: int, edges: np.ndarray) -> None:
    if w.shape != (m,):
        raise GraphError(f"expected {m} weights, got {w.shape[0] if w.ndim else 0}")
    bad = np.flatnonzero(~np.isfinite(w) | (w < 0))
    if bad.size:
        k = int(bad[0])
        raise GraphError(
            f"weight {w[k]!r} of edge {tuple(int(v) for v in edges[k])} must be finite and non-negative",
            edge=(int(edges[k, 0]), int(edges[k, 1])),
            index=k,
        )


def build_graph(
    edge_list: Iterable[Tuple[int, int]],
    n: int,
    weights: Optional[Sequence[float]] = None,
) -> Graph:
    """
    Validate an edge list and build a Graph.

    Args:
        edge_list: Unordered pairs (i, j)
        n: Vertex count
        weights: Optional non-negative weight per edge, aligned with edge_list

    Returns:
        Graph with canonical sorted edges

    Raises:
        GraphError: self-loop, duplicate edge, index out of range or bad weight,
            with the offending edge and its position in edge_list
    """
    if n < 0:
        raise GraphError(f"vertex count must be non-negative, got {n}")

    arr = np.asarray(list(edge_list) if not isinstance(edge_list, np.ndarray) else edge_list,
                     dtype=np.int64).reshape(-1, 2)
    m = arr.shape[0]

    def _offender(mask: np.ndarray, what: str) -> None:
        hits = np.flatnonzero(mask)
        if hits.size:
            k = int(hits[0])
            edge = (int(arr[k, 0]), int(arr[k, 1]))
            raise GraphError(f"{what} {edge} at position {k}", edge=edge, index=k)

    _offender((arr < 0).any(axis=1) | (arr >= n).any(axis=1), f"index out of range [0, {n}) in edge")
    _offender(arr[:, 0] == arr[:, 1], "self-loop")

    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keys = lo * max(n, 1) + hi
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    dup = np.zeros(m, dtype=bool)
    if m > 1:
        repeats = order[1:][sorted_keys[1:] == sorted_keys[:-1]]
        dup[repeats] = True
    _offender(dup, "duplicate edge")

    canonical = np.stack([lo, hi], axis=1)[order]
    w = None
    if weights is not None:
        w_in = np.asarray(weights, dtype=np.float64)
        _check_weights(w_in, m, np.stack([lo, hi], axis=1))
        w = w_in[order]

    return Graph(n, canonical, w)


def effective_neighborhood(g: Graph, i: int) -> Tuple[np.ndarray, bool]:
    """
    Voters of vertex i under the self-vote tie rule.

    Returns:
        (neighbors, include_self) where include_self is True iff deg(i) is even,
        so that len(neighbors) + include_self is odd
    """
    nbrs = g.neighbors(i)
    return nbrs, nbrs.shape[0] % 2 == 0


# ============================================================================
# Edge-list text format
# ============================================================================


def write_edge_list(g: Graph, sink: TextIO) -> None:
    """
    Write g as "n m" followed by one "i j" or "i j w" line per edge.

    Weights use repr(), the shortest decimal that round-trips exactly.
    """
    sink.write(f"{g.n} {g.m}\n")
    if g.weights is None:
        for i, j in g.edges:
            sink.write(f"{i} {j}\n")
    else:
        for (i, j), w in zip(g.edges, g.weights):
            sink.write(f"{i} {j} {float(w)!r}\n")


def read_edge_list(source: TextIO) -> Graph:
    """
    Parse the edge-list format written by write_edge_list().

    Blank lines and lines starting with '#' are ignored.

    Raises:
        EdgeListFormatError: with the 1-based line number of the bad line
    """
    header: Optional[Tuple[int, int]] = None
    pairs: List[Tuple[int, int]] = []
    weights: List[float] = []
    line_numbers: List[int] = []
    weighted: Optional[bool] = None
    last_line = 0

    for line_number, raw in enumerate(source, start=1):
        last_line = line_number
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()

        if header is None:
            if len(fields) != 2:
                raise EdgeListFormatError(f"expected header 'n m', got {line!r}", line_number)
            try:
                header = (int(fields[0]), int(fields[1]))
            except ValueError:
                raise EdgeListFormatError(f"non-integer header {line!r}", line_number)
            if header[0] < 0 or header[1] < 0:
                raise EdgeListFormatError("negative count in header", line_number)
            continue

        if len(fields) not in (2, 3):
            raise EdgeListFormatError(f"expected 'i j' or 'i j w', got {line!r}", line_number)
        try:
            i, j = int(fields[0]), int(fields[1])
        except ValueError:
            raise EdgeListFormatError(f"non-integer vertex in {line!r}", line_number)

        has_weight = len(fields) == 3
        if weighted is None:
            weighted = has_weight
        elif weighted != has_weight:
            raise EdgeListFormatError("mixed weighted and unweighted lines", line_number, edge=(i, j))

        n = header[0]
        if i == j:
            raise EdgeListFormatError(f"self-loop ({i}, {j})", line_number, edge=(i, j))
        if not (0 <= i < n and 0 <= j < n):
            raise EdgeListFormatError(f"vertex out of range [0, {n}) in ({i}, {j})", line_number, edge=(i, j))
        if i > j:
            raise EdgeListFormatError(f"expected i < j, got ({i}, {j})", line_number, edge=(i, j))
        if has_weight:
            try:
                weights.append(float(fields[2]))
            except ValueError:
                raise EdgeListFormatError(f"bad weight {fields[2]!r}", line_number, edge=(i, j))

        pairs.append((i, j))
        line_numbers.append(line_number)

    if header is None:
        raise EdgeListFormatError("missing header 'n m'", max(last_line, 1))
    if len(pairs) != header[1]:
        raise EdgeListFormatError(
            f"header declares {header[1]} edges, found {len(pairs)}", max(last_line, 1)
        )

    try:
        return build_graph(pairs, header[0], weights if weighted else None)
    except GraphError as e:
        line = line_numbers[e.index] if e.index is not None and e.index < len(line_numbers) else last_line
        raise EdgeListFormatError(str(e), line, edge=e.edge) from e
