"""
Unit tests for sign clusters, witness cycles and frozen-cycle certificates.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import GraphError, InvalidCycleError
from src.generators import Rng, gen_cycle, gen_opinions_iid, gen_path, gen_random_regular
from src.graph_core import OpinionState, build_graph
from src.percolation import (
    certify_frozen,
    cluster_report,
    cycle_rank,
    find_cycle_in_mask,
    find_monochromatic_cycle,
    induced_subgraph_by_sign,
    two_stage_percolation,
    validate_cycle,
)


def circulant(n, offsets=(1, 2)):
    """4-regular circulant graph: i ~ i + k (mod n) for k in offsets."""
    edges = {tuple(sorted((i, (i + k) % n))) for i in range(n) for k in offsets}
    return build_graph(sorted(edges), n)


@pytest.fixture
def alternating_path():
    # + + - - + on a path of five vertices
    return gen_path(5), OpinionState(np.array([1, 1, -1, -1, 1]))


def test_components_by_sign(alternating_path):
    g, x = alternating_path
    plus = induced_subgraph_by_sign(g, x, 1)
    minus = induced_subgraph_by_sign(g, x, -1)
    assert plus.count == 2
    assert plus.largest == 2
    assert plus.histogram() == {1: 1, 2: 1}
    assert minus.count == 1
    assert minus.largest_component().tolist() == [2, 3]
    assert plus.cycle_rank == 0


def test_components_reject_bad_sign(alternating_path):
    g, x = alternating_path
    with pytest.raises(ValueError):
        induced_subgraph_by_sign(g, x, 0)


def test_empty_sign_class():
    g = gen_cycle(5)
    x = OpinionState(np.ones(5))
    minus = induced_subgraph_by_sign(g, x, -1)
    assert minus.count == 0
    assert minus.largest == 0
    assert find_monochromatic_cycle(g, x, -1) is None


def test_cycle_found_on_unanimous_cycle():
    g = gen_cycle(6)
    x = OpinionState(np.ones(6))
    cyc = find_monochromatic_cycle(g, x, 1)
    assert sorted(cyc) == list(range(6))
    assert validate_cycle(g, cyc) == cyc
    assert induced_subgraph_by_sign(g, x, 1).cycle_rank == 1


def test_forest_has_no_cycle():
    g = gen_path(10)
    assert find_cycle_in_mask(g, np.ones(10, dtype=bool)) is None
    assert cycle_rank(g, np.ones(10, dtype=bool)) == 0


def test_witness_agrees_with_cycle_rank():
    rng = Rng(44)
    g = gen_random_regular(300, 4, rng.child(0))
    x = gen_opinions_iid(g.n, 0.5, rng.child(1))
    for s in (1, -1):
        comps = induced_subgraph_by_sign(g, x, s)
        cyc = find_monochromatic_cycle(g, x, s)
        assert (cyc is not None) == (comps.cycle_rank > 0)
        if cyc is not None:
            validate_cycle(g, cyc)
            assert np.all(x.values[cyc] == s)


def test_validate_cycle_errors():
    g = gen_cycle(6)
    with pytest.raises(InvalidCycleError):
        validate_cycle(g, [0, 1])
    with pytest.raises(InvalidCycleError):
        validate_cycle(g, [0, 1, 2, 1])
    with pytest.raises(InvalidCycleError) as exc:
        validate_cycle(g, [0, 1, 2])
    assert exc.value.edge == (2, 0)


def test_certify_frozen_unanimous_circulant():
    g = circulant(8)
    x = OpinionState(np.ones(8))
    assert certify_frozen(g, x, list(range(8)))


def test_certify_frozen_triangle_in_minority_sea():
    g = circulant(12)
    values = -np.ones(12)
    values[[0, 1, 2]] = 1
    assert certify_frozen(g, OpinionState(values), [0, 1, 2])


def test_certify_frozen_requires_four_regular():
    g = gen_cycle(6)
    with pytest.raises(GraphError):
        certify_frozen(g, OpinionState(np.ones(6)), list(range(6)))


def test_certify_frozen_rejects_mixed_cycle():
    g = circulant(8)
    values = np.ones(8)
    values[3] = -1
    with pytest.raises(InvalidCycleError):
        certify_frozen(g, OpinionState(values), list(range(8)))


def test_cluster_report(alternating_path):
    g, x = alternating_path
    report = cluster_report(g, x)
    assert report.by_sign(1).components == 2
    assert report.by_sign(-1).largest == 2
    assert not report.both_cycles
    data = report.to_dict()
    assert data["plus"]["has_cycle"] is False
    assert data["minus"]["histogram"] == {"2": 1}


def test_two_stage_percolation():
    g = gen_random_regular(400, 4, Rng(6).child(0))
    report = two_stage_percolation(g, 0.4, 0.1, Rng(6).child(3))
    assert report.effective_probability == pytest.approx(1 - 0.6 * 0.9)
    assert report.cycle_rank_added >= 0
    assert report.merged_components >= 0
    assert report.opened.largest >= report.base.largest
    if report.giant_cycle is not None:
        validate_cycle(g, report.giant_cycle)
    assert report.to_dict()["cycle_rank_added"] == report.cycle_rank_added


def test_two_stage_rejects_bad_probabilities():
    g = gen_cycle(10)
    with pytest.raises(ValueError):
        two_stage_percolation(g, 0.1, 0.2, Rng(0))
    with pytest.raises(ValueError):
        two_stage_percolation(g, 0.5, 0.0, Rng(0))
