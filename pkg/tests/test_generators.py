"""
Unit tests for seeded streams and graph/opinion generators.
"""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import GraphError, RejectionBudgetError
from src.generators import (
    LevelGraphSpec,
    Rng,
    assign_odd_weights,
    assign_uniform_weights,
    constant_opinions,
    gen_complete,
    gen_cycle,
    gen_gnp,
    gen_level_graph,
    gen_opinions_iid,
    gen_path,
    gen_random_regular,
    gen_tree_ball,
    is_connected,
    pairing_acceptance_rate,
)
from src.graph_core import build_graph


def test_rng_same_stream_same_draws():
    a = Rng(7, 3).generator.random(5)
    b = Rng(7, 3).generator.random(5)
    assert np.array_equal(a, b)


def test_rng_streams_and_children_differ():
    base = Rng(7, 3)
    assert not np.array_equal(base.generator.random(5), Rng(7, 4).generator.random(5))
    assert not np.array_equal(base.child(0).generator.random(5), base.child(1).generator.random(5))
    assert np.array_equal(base.child(2).generator.random(5), Rng(7, 3).child(2).generator.random(5))


def test_gnp_extremes():
    assert gen_gnp(20, 0.0, Rng(1)).m == 0
    assert gen_gnp(20, 1.0, Rng(1)).m == 190


def test_gnp_reproducible():
    assert gen_gnp(500, 0.02, Rng(11)) == gen_gnp(500, 0.02, Rng(11))


def test_gnp_edge_count_near_expectation():
    n, p = 2000, 0.01
    g = gen_gnp(n, p, Rng(5))
    expected = p * n * (n - 1) / 2
    sd = math.sqrt(expected * (1 - p))
    assert abs(g.m - expected) < 5 * sd
    assert np.all(g.edges[:, 0] < g.edges[:, 1])


@pytest.mark.parametrize("d", [4, 10])
def test_gnp_mean_degree_within_five_percent(d):
    n = 10_000
    g = gen_gnp(n, d / n, Rng(d))
    mean_degree = 2 * g.m / n
    assert abs(mean_degree - d) <= 0.05 * d
    assert float(g.degrees().mean()) == pytest.approx(mean_degree)


def test_gnp_rejects_bad_probability():
    with pytest.raises(ValueError):
        gen_gnp(10, 1.5, Rng(0))


def test_random_regular_degrees():
    g = gen_random_regular(1000, 4, Rng(3))
    assert np.all(g.degrees() == 4)
    assert g.m == 2000


def test_random_regular_rejects_odd_product():
    with pytest.raises(ValueError):
        gen_random_regular(11, 3, Rng(0))
    with pytest.raises(ValueError):
        gen_random_regular(4, 4, Rng(0))


def test_random_regular_degree_must_be_integral():
    with pytest.raises(ValueError):
        gen_random_regular(10, 2.5, Rng(0))
    g = gen_random_regular(10, 4.0, Rng(0))
    assert np.all(g.degrees() == 4)


def test_random_regular_budget_exhausted():
    # acceptance ~ exp(-(d^2-1)/4) is effectively zero at d = 40
    with pytest.raises(RejectionBudgetError):
        gen_random_regular(50, 40, Rng(0), max_attempts=2)


def test_random_regular_connected_option():
    g = gen_random_regular(200, 3, Rng(9), require_connected=True)
    assert is_connected(g)


def test_pairing_acceptance_reference():
    rate, reference = pairing_acceptance_rate(200, 3, 200, Rng(1))
    assert reference == pytest.approx(math.exp(-2.0))
    assert 0.0 < rate < 1.0


def test_tree_ball_shape():
    g = gen_tree_ball(3, 2)
    assert g.n == 1 + 3 + 6
    deg = g.degrees()
    assert deg[0] == 3
    assert np.all(deg[1:4] == 3)
    assert np.all(deg[4:] == 1)
    assert is_connected(g)


def test_level_spec_sizes_and_degrees():
    spec = LevelGraphSpec(3)
    assert spec.level_sizes == [1, 3, 7]
    assert spec.n == 11
    assert spec.degrees().tolist() == [3, 10, 9]


def test_level_graph_matches_spec():
    spec = LevelGraphSpec(3)
    g = gen_level_graph(spec)
    assert g.m == 48
    assert np.array_equal(g.degrees(), np.repeat(spec.degrees(), spec.level_sizes))


def test_deterministic_families():
    assert np.all(gen_cycle(7).degrees() == 2)
    assert gen_path(5).degrees().tolist() == [1, 2, 2, 2, 1]
    assert gen_complete(6).m == 15
    with pytest.raises(ValueError):
        gen_cycle(2)


def test_opinions_iid_extremes():
    assert np.all(gen_opinions_iid(50, 1.0, Rng(0)).values == 1)
    assert np.all(gen_opinions_iid(50, 0.0, Rng(0)).values == -1)
    assert constant_opinions(4, -1).is_unanimous()


def test_opinions_iid_fair_mean():
    x = gen_opinions_iid(100_000, 0.5, Rng(2))
    # sd of the mean is 1/sqrt(n)
    assert abs(x.mean()) < 5 / math.sqrt(100_000)


def test_odd_weights():
    g = assign_odd_weights(gen_cycle(30), Rng(4))
    assert set(g.weights.tolist()) <= {1.0, 3.0, 5.0}
    with pytest.raises(GraphError):
        assign_odd_weights(gen_cycle(5), Rng(4), choices=(1, 2))


def test_uniform_weights_range():
    g = assign_uniform_weights(gen_complete(10), Rng(4))
    assert np.all((g.weights >= 0.5) & (g.weights < 1.5))


def test_is_connected():
    assert is_connected(gen_path(4))
    assert not is_connected(build_graph([(0, 1), (2, 3)], 4))
