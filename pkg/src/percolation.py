# ============================================================================
# CHANGELOG (recent first, max 5 entries)
# 10/18/2026 - Two-stage (sprinkled) site percolation report
# 10/17/2026 - Frozen-cycle certificate with a one-step dynamic check
# 10/16/2026 - Sign-induced components and DFS cycle witnesses
# ============================================================================
"""
Opinion-induced site percolation.

The vertices holding opinion s form a site-percolation configuration;
this module labels its components (scipy csgraph), extracts a witness
cycle by depth-first search, and certifies cycles that can never flip on
4-regular graphs: each cycle vertex hears itself and its two cycle
neighbors, 3 of its 5 votes.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.sparse import csgraph

from .dynamics import step
from .errors import GraphError, InvalidCycleError, InvariantViolation
from .generators import Rng
from .graph_core import Graph, OpinionState

logger = logging.getLogger(__name__)

_WHITE, _GRAY, _BLACK = 0, 1, 2


@dataclass
class SignComponents:
    """
    Components of the subgraph induced by a vertex mask.

    Attributes:
        vertices: Vertex ids in the mask, ascending
        labels: Component label per entry of vertices
        sizes: Vertex count per component label
        edge_counts: Induced edge count per component label
    """

    vertices: np.ndarray
    labels: np.ndarray
    sizes: np.ndarray
    edge_counts: np.ndarray

    @property
    def count(self) -> int:
        return int(self.sizes.shape[0])

    @property
    def largest(self) -> int:
        return int(self.sizes.max()) if self.count else 0

    @property
    def cycle_rank(self) -> int:
        """Dimension of the cycle space: edges - vertices + components."""
        return int(self.edge_counts.sum()) - int(self.vertices.shape[0]) + self.count

    def largest_component(self) -> np.ndarray:
        """Vertex ids of the largest component (lowest label on ties)."""
        if not self.count:
            return np.empty(0, dtype=np.int64)
        return self.vertices[self.labels == int(np.argmax(self.sizes))]

    def histogram(self) -> Dict[int, int]:
        """Component size -> number of components of that size."""
        values, counts = np.unique(self.sizes, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


def _components(g: Graph, mask: np.ndarray) -> SignComponents:
    vertices = np.flatnonzero(mask)
    if vertices.shape[0] == 0:
        empty = np.empty(0, dtype=np.int64)
        return SignComponents(vertices, empty, empty, empty)
    sub = g.adjacency(weighted=False)[vertices][:, vertices]
    count, labels = csgraph.connected_components(sub, directed=False)
    sizes = np.bincount(labels, minlength=count)
    entry_rows = np.repeat(np.arange(vertices.shape[0]), np.diff(sub.indptr))
    edge_counts = np.bincount(labels[entry_rows], minlength=count) // 2
    return SignComponents(vertices, labels.astype(np.int64), sizes, edge_counts)


def induced_subgraph_by_sign(g: Graph, x: OpinionState, s: int) -> SignComponents:
    """Connected components of the subgraph induced by {i : x_i = s}."""
    if s not in (-1, 1):
        raise ValueError(f"sign must be -1 or +1, got {s}")
    if x.n != g.n:
        raise GraphError(f"state has {x.n} entries, graph has {g.n} vertices")
    return _components(g, x.values == s)


def find_cycle_in_mask(g: Graph, mask: np.ndarray) -> Optional[List[int]]:
    """
    First DFS back-edge cycle of the subgraph induced by mask.

    Roots are tried in increasing order and neighbors in sorted order, so
    the witness is reproducible. Returns None iff the subgraph is a forest.
    """
    indptr, indices = g.indptr, g.indices
    color = np.zeros(g.n, dtype=np.int8)
    stack_pos = np.full(g.n, -1, dtype=np.int64)

    for root in np.flatnonzero(mask):
        root = int(root)
        if color[root] != _WHITE:
            continue
        # frames: [vertex, parent, next neighbor offset]
        stack: List[List[int]] = [[root, -1, int(indptr[root])]]
        path: List[int] = [root]
        color[root] = _GRAY
        stack_pos[root] = 0

        while stack:
            frame = stack[-1]
            v, parent, ptr = frame
            end = int(indptr[v + 1])
            advanced = False
            while ptr < end:
                u = int(indices[ptr])
                ptr += 1
                if u == parent or not mask[u]:
                    continue
                if color[u] == _GRAY:
                    return path[int(stack_pos[u]):]
                if color[u] == _WHITE:
                    frame[2] = ptr
                    color[u] = _GRAY
                    stack_pos[u] = len(path)
                    path.append(u)
                    stack.append([u, v, int(indptr[u])])
                    advanced = True
                    break
            if not advanced:
                color[v] = _BLACK
                stack_pos[v] = -1
                path.pop()
                stack.pop()
    return None


def find_monochromatic_cycle(g: Graph, x: OpinionState, s: int) -> Optional[List[int]]:
    """Witness cycle among the vertices of opinion s, or None."""
    if s not in (-1, 1):
        raise ValueError(f"sign must be -1 or +1, got {s}")
    return find_cycle_in_mask(g, x.values == s)


def cycle_rank(g: Graph, mask: np.ndarray) -> int:
    return _components(g, np.asarray(mask, dtype=bool)).cycle_rank


def validate_cycle(g: Graph, cycle: Sequence[int]) -> List[int]:
    """
    Check that cycle is a simple cycle of g (last vertex adjacent to the first).

    Raises:
        InvalidCycleError: too short, repeated vertex, or a missing edge
    """
    cyc = [int(v) for v in cycle]
    if len(cyc) < 3:
        raise InvalidCycleError(f"a cycle needs at least 3 vertices, got {len(cyc)}")
    if len(set(cyc)) != len(cyc):
        raise InvalidCycleError(f"cycle repeats a vertex: {cyc}")
    for v in cyc:
        if not 0 <= v < g.n:
            raise InvalidCycleError(f"vertex {v} out of range [0, {g.n})", index=v)
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        nbrs = g.neighbors(a)
        pos = int(np.searchsorted(nbrs, b))
        if pos >= nbrs.shape[0] or nbrs[pos] != b:
            raise InvalidCycleError(f"({a}, {b}) is not an edge", edge=(a, b))
    return cyc


def certify_frozen(g: Graph, x: OpinionState, cycle: Sequence[int]) -> bool:
    """
    Certify that a monochromatic cycle of a 4-regular graph never flips.

    Every cycle vertex has even degree, so it votes for itself, and its two
    cycle neighbors agree with it: 3 of 5 votes are fixed. One step of the
    dynamics is run as a dynamic check.

    Raises:
        GraphError: g is not 4-regular
        InvalidCycleError: not a valid monochromatic cycle
        InvariantViolation: a certified vertex flipped under step
    """
    degrees = g.degrees()
    if g.n == 0 or not np.all(degrees == 4):
        raise GraphError("frozen-cycle certificates need a 4-regular graph")
    cyc = validate_cycle(g, cycle)
    signs = x.values[cyc]
    if not np.all(signs == signs[0]):
        raise InvalidCycleError(f"cycle is not monochromatic: signs {signs.tolist()}")

    members = set(cyc)
    for v in cyc:
        agreeing = sum(1 for u in g.neighbors(v) if int(u) in members and x.values[u] == signs[0])
        if agreeing < 2:
            raise InvalidCycleError(f"vertex {v} has {agreeing} same-sign cycle neighbors")

    y = step(g, x)
    if not np.array_equal(y.values[cyc], x.values[cyc]):
        raise InvariantViolation(f"certified cycle {cyc} changed under one step")
    return True


# ============================================================================
# Reports
# ============================================================================


@dataclass
class SignSummary:
    sign: int
    components: int
    largest: int
    cycle_rank: int
    cycle: Optional[List[int]]
    histogram: Dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sign": self.sign,
            "components": self.components,
            "largest": self.largest,
            "cycle_rank": self.cycle_rank,
            "has_cycle": self.cycle is not None,
            "cycle": self.cycle,
            "histogram": {str(k): v for k, v in self.histogram.items()},
        }


def _summarize(g: Graph, mask: np.ndarray, sign: int) -> SignSummary:
    comps = _components(g, mask)
    return SignSummary(
        sign=sign,
        components=comps.count,
        largest=comps.largest,
        cycle_rank=comps.cycle_rank,
        cycle=find_cycle_in_mask(g, mask),
        histogram=comps.histogram(),
    )


@dataclass
class ClusterReport:
    """Per-sign components and witness cycles of one opinion state."""

    n: int
    plus: SignSummary
    minus: SignSummary

    def by_sign(self, s: int) -> SignSummary:
        return self.plus if s == 1 else self.minus

    @property
    def both_cycles(self) -> bool:
        return self.plus.cycle is not None and self.minus.cycle is not None

    def to_dict(self) -> dict:
        return {"n": self.n, "plus": self.plus.to_dict(), "minus": self.minus.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def cluster_report(g: Graph, x: OpinionState) -> ClusterReport:
    return ClusterReport(
        n=g.n,
        plus=_summarize(g, x.values == 1, 1),
        minus=_summarize(g, x.values == -1, -1),
    )


@dataclass
class TwoStageReport:
    """
    Open set of a base sample plus an independent sprinkle.

    effective_probability is 1 - (1 - p_base)(1 - eps), the exact marking
    probability of the union.
    """

    p_base: float
    eps: float
    effective_probability: float
    open_fraction: float
    base: SignSummary
    opened: SignSummary
    giant_cycle: Optional[List[int]]
    merged_components: int

    @property
    def cycle_rank_added(self) -> int:
        return self.opened.cycle_rank - self.base.cycle_rank

    def to_dict(self) -> dict:
        return {
            "p_base": self.p_base,
            "eps": self.eps,
            "effective_probability": self.effective_probability,
            "open_fraction": self.open_fraction,
            "base": self.base.to_dict(),
            "open": self.opened.to_dict(),
            "giant_cycle": self.giant_cycle,
            "merged_components": self.merged_components,
            "cycle_rank_added": self.cycle_rank_added,
        }


def two_stage_percolation(g: Graph, p_base: float, eps: float, rng: Rng) -> TwoStageReport:
    """
    Mark sites with probability p_base, then sprinkle an independent eps layer.

    Args:
        g: Graph
        p_base: First-stage probability (0 < eps < p_base <= 1)
        eps: Sprinkle probability
        rng: Random stream

    Returns:
        TwoStageReport for the union of the two stages
    """
    if not 0.0 < eps < p_base <= 1.0:
        raise ValueError(f"need 0 < eps < p_base <= 1, got p_base={p_base}, eps={eps}")
    gen = rng.generator
    base = gen.random(g.n) < p_base
    sprinkle = gen.random(g.n) < eps
    opened = base | sprinkle

    base_summary = _summarize(g, base, 1)
    open_comps = _components(g, opened)
    giant = np.zeros(g.n, dtype=bool)
    giant[open_comps.largest_component()] = True
    only_sprinkled = int(np.sum(opened & ~base))

    report = TwoStageReport(
        p_base=float(p_base),
        eps=float(eps),
        effective_probability=1.0 - (1.0 - p_base) * (1.0 - eps),
        open_fraction=float(opened.mean()) if g.n else 0.0,
        base=base_summary,
        opened=SignSummary(
            sign=1,
            components=open_comps.count,
            largest=open_comps.largest,
            cycle_rank=open_comps.cycle_rank,
            cycle=find_cycle_in_mask(g, opened),
            histogram=open_comps.histogram(),
        ),
        giant_cycle=find_cycle_in_mask(g, giant) if giant.any() else None,
        merged_components=base_summary.components + only_sprinkled - open_comps.count,
    )
    logger.debug(
        f"two-stage percolation: open fraction {report.open_fraction:.4f}, "
        f"largest {report.opened.largest}, cycle rank +{report.cycle_rank_added}"
    )
    return report
