"""
Unit tests for the Fourier, noise-stability, overlap and spectral oracles.
"""
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import ArityCapError, ConvergenceError
from src.generators import Rng, gen_complete, gen_gnp
from src.analysis import (
    SQRT_2_OVER_PI,
    arcsin_stability,
    estimate_lambda,
    expander_minority_bound,
    fourier_spectrum,
    maj_singleton_coeff,
    maj_singleton_fraction,
    majority_truth_table,
    mixing_lemma_check,
    noise_stability,
    one_sided_chebyshev,
    overlap_correlation,
    overlap_correlation_exact,
    overlap_lower_bound,
    sample_noise_stability,
    subset_discrepancy,
)


@pytest.fixture
def maj3():
    return fourier_spectrum(majority_truth_table(3), 3)


# ============================================================================
# Fourier
# ============================================================================


def test_majority_truth_table_small():
    # bit i set means coordinate i is -1
    assert majority_truth_table(3).tolist() == [1, 1, 1, -1, 1, -1, -1, -1]


def test_majority_truth_table_rejects_even_and_large():
    with pytest.raises(ValueError):
        majority_truth_table(4)
    with pytest.raises(ArityCapError):
        majority_truth_table(25)


def test_maj3_coefficients(maj3):
    for i in range(3):
        assert maj3.exact_coefficient([i]) == Fraction(1, 2)
    assert maj3.exact_coefficient(0b111) == Fraction(-1, 2)
    assert maj3.exact_coefficient(0) == 0
    assert maj3.exact_coefficient([0, 1]) == 0


def test_parseval_is_exact(maj3):
    assert maj3.parseval_exact() == 1
    table = fourier_spectrum(majority_truth_table(11), 11)
    assert table.parseval_exact() == 1


def test_level_weights(maj3):
    assert maj3.level_weights().tolist() == pytest.approx([0.0, 0.75, 0.0, 0.25])


def test_majority_has_only_odd_levels():
    weights = fourier_spectrum(majority_truth_table(9), 9).level_weights()
    assert np.allclose(weights[0::2], 0.0)


def test_to_rows_lists_nonzero_coefficients(maj3):
    rows = dict(maj3.to_rows())
    assert rows == {1: 0.5, 2: 0.5, 4: 0.5, 7: -0.5}


def test_fourier_rejects_bad_tables():
    with pytest.raises(ValueError):
        fourier_spectrum([1, -1, 1], 2)
    with pytest.raises(ValueError):
        fourier_spectrum([1, 0, 1, 1], 2)


def test_parity_is_a_single_character():
    k = 4
    idx = np.arange(1 << k)
    parity = np.array([(-1) ** bin(i).count("1") for i in idx])
    table = fourier_spectrum(parity, k)
    assert table.exact_coefficient(0b1111) == 1
    assert np.count_nonzero(table.numerators) == 1


def test_singleton_closed_form_matches_transform():
    for k in (3, 5, 7, 13):
        table = fourier_spectrum(majority_truth_table(k), k)
        assert table.exact_coefficient([0]) == maj_singleton_fraction(k)
    assert maj_singleton_fraction(5) == Fraction(3, 8)


def test_singleton_tends_to_sqrt_2_over_pi():
    scaled = maj_singleton_coeff(1001) * math.sqrt(1001)
    assert scaled == pytest.approx(SQRT_2_OVER_PI, rel=1e-3)


# ============================================================================
# Noise stability
# ============================================================================


def test_noise_stability_maj3(maj3):
    rho = 0.5
    assert noise_stability(maj3, rho) == pytest.approx(0.75 * rho + 0.25 * rho ** 3)
    assert noise_stability(maj3, 1.0) == pytest.approx(1.0)
    assert noise_stability(maj3, 0.0) == 0.0


def test_noise_stability_rejects_bad_rho(maj3):
    with pytest.raises(ValueError):
        noise_stability(maj3, 1.5)


def test_stability_approaches_arcsin_from_above():
    table = fourier_spectrum(majority_truth_table(21), 21)
    for rho in (0.2, 0.5, 0.8):
        stab = noise_stability(table, rho)
        assert stab >= arcsin_stability(rho) - 1e-12
        assert stab - arcsin_stability(rho) < 0.05


def test_sampled_stability_agrees(maj3):
    table = majority_truth_table(3)
    estimate, stderr = sample_noise_stability(table, 3, 0.5, 20_000, Rng(99))
    assert abs(estimate - noise_stability(maj3, 0.5)) < 5 * stderr


# ============================================================================
# Overlap correlation
# ============================================================================


def test_overlap_small_case_is_tight():
    assert overlap_correlation_exact(3, 3, 1) == Fraction(1, 4)
    assert overlap_lower_bound(3, 3, 1) == pytest.approx(0.25)


def test_overlap_extremes():
    assert overlap_correlation_exact(7, 7, 7) == 1
    assert overlap_correlation_exact(5, 9, 0) == 0


def test_overlap_bound_holds_on_grid():
    for n1 in (3, 5, 7):
        for n2 in (3, 5, 9):
            for m in range(min(n1, n2) + 1):
                exact = overlap_correlation(n1, n2, m)
                assert exact >= overlap_lower_bound(n1, n2, m) - 1e-12, (n1, n2, m)


def test_overlap_rejects_bad_arguments():
    with pytest.raises(ValueError):
        overlap_correlation_exact(4, 3, 1)
    with pytest.raises(ValueError):
        overlap_correlation_exact(3, 5, 4)


# ============================================================================
# Spectral mixing
# ============================================================================


def test_lambda_of_complete_graph_with_all_loops_is_zero():
    estimate = estimate_lambda(gen_complete(30), 1.0, Rng(0))
    assert estimate.lam == 0.0


def test_lambda_within_reference_bound():
    rng = Rng(17)
    g = gen_gnp(500, 0.1, rng.child(0))
    estimate = estimate_lambda(g, 0.1, rng.child(1), tol=1e-4)
    assert 0.0 < estimate.lam <= estimate.reference_bound
    assert estimate.loops.shape == (500,)
    assert estimate.to_dict()["bound_4_sqrt_np"] == pytest.approx(4 * math.sqrt(50))


def test_lambda_convergence_error():
    g = gen_gnp(200, 0.1, Rng(1))
    with pytest.raises(ConvergenceError):
        estimate_lambda(g, 0.1, Rng(2), max_iter=1)


def test_mixing_lemma_holds_for_sampled_subsets():
    rng = Rng(31)
    g = gen_gnp(400, 0.1, rng.child(0))
    estimate = estimate_lambda(g, 0.1, rng.child(1), tol=1e-4)
    report = mixing_lemma_check(g, 0.1, estimate.lam, 300, rng.child(2), loops=estimate.loops)
    assert report.passed
    assert report.samples == 300
    assert report.to_dict()["passed"] is True


def test_subset_discrepancy_empty_sets():
    g = gen_complete(4)
    loops = np.zeros(4, dtype=bool)
    empty = np.zeros(4, dtype=bool)
    full = np.ones(4, dtype=bool)
    assert subset_discrepancy(g, 0.5, loops, empty, full).tolist() == [0.0]


def test_subset_discrepancy_counts_ordered_pairs():
    g = gen_complete(4)
    loops = np.zeros(4, dtype=bool)
    full = np.ones(4, dtype=bool)
    # E(V, V) = 12 ordered pairs, p|A||B| = 0
    assert subset_discrepancy(g, 0.0, loops, full, full)[0] == pytest.approx(12 / 4)


# ============================================================================
# Moment bounds
# ============================================================================


def test_one_sided_chebyshev():
    assert one_sided_chebyshev(1.0, 1.0, tau=0.0) == pytest.approx(1.0)
    assert one_sided_chebyshev(1.0, 2.0, tau=0.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        one_sided_chebyshev(1.0, 0.5)


def test_expander_minority_bound():
    assert expander_minority_bound(1.0, 1.0, 1.0, 2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        expander_minority_bound(1.0, 0.0, 0.5, 10)
