import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from airygap.errors import ConditioningError, ValidationError
from airygap.fredholm import PartitionSpec, fredholm_det
from airygap.rmt_montecarlo import (
    edge_rescale,
    edge_unscale,
    empirical_generating,
    finite_n_det,
    gaussian_hankel_det,
    gaussian_moment,
    hankel_ratio,
    sample_gue,
    sample_gue_batch,
)
from airygap.verification import random_partitions
from oracles import GENERATING_VALUES, TW_VALUES


def double_factorial(k):
    return math.prod(range(k, 0, -2))


# -- sampling ----------------------------------------------------------------------


def test_sample_shape_and_order():
    smp = sample_gue(20, seed=3)
    assert smp.n == 20 and smp.eigenvalues.shape == (20,)
    assert np.all(np.diff(smp.eigenvalues) <= 0)
    with pytest.raises(ValueError):
        smp.eigenvalues[0] = 0.0


@pytest.mark.parametrize("n", [9, 2001, 10.5])
def test_sample_size_range(n):
    with pytest.raises(ValidationError):
        sample_gue(n)


def test_unknown_method():
    with pytest.raises(ValidationError):
        sample_gue(10, method="wishart")


def test_trace_mean_centered():
    tr = np.array([smp.eigenvalues.mean() for smp in sample_gue_batch(50, 1000, seed=1)])
    se = tr.std(ddof=1) / math.sqrt(tr.size)
    assert abs(tr.mean()) <= 3 * se
    # variance of tr H / n is 1/n for unit-variance diagonal entries
    assert tr.var(ddof=1) == pytest.approx(1 / 50, rel=0.15)


def test_second_moment_normalization():
    # E tr H^2 = n^2 for the exp(-tr H^2 / 2) weight
    m2 = np.mean([np.sum(smp.eigenvalues**2) for smp in sample_gue_batch(30, 1000, seed=2)])
    assert m2 == pytest.approx(900.0, rel=0.02)


@pytest.fixture(scope="module")
def largest_400():
    return np.array([smp.eigenvalues[0] for smp in sample_gue_batch(400, 10_000, seed=5, method="tridiagonal")])


@pytest.mark.slow
def test_edge_concentrates_at_twice_sqrt_n(largest_400):
    first = largest_400[:1000]
    assert abs(np.median(first) - 40.0) < 5 * 400 ** (-1 / 6)
    assert np.mean(np.abs(first - 40.0) <= 5 * 400 ** (-1 / 6)) >= 0.99


@pytest.mark.slow
def test_rescaled_max_cdf_at_zero(largest_400):
    hits = edge_rescale(largest_400, 400) < 0.0
    p = hits.mean()
    se = math.sqrt(p * (1 - p) / hits.size)
    assert abs(p - TW_VALUES[0.0]) <= 3 * se


def test_dense_and_tridiagonal_same_law():
    a = [smp.rescaled()[0] for smp in sample_gue_batch(40, 2000, seed=10, method="dense")]
    b = [smp.rescaled()[0] for smp in sample_gue_batch(40, 2000, seed=11, method="tridiagonal")]
    assert ks_2samp(a, b).pvalue > 1e-3


def test_rescale_round_trip():
    lam = np.array([39.0, 40.0, 41.5])
    assert np.allclose(edge_unscale(edge_rescale(lam, 400), 400), lam, rtol=0, atol=1e-12)
    assert edge_rescale(40.0, 400) == 0.0


def test_seed_reproducibility_bit_for_bit():
    p = PartitionSpec((0.0, -1.0), (0.0, 0.5))
    a = empirical_generating(sample_gue_batch(12, 1000, seed=42), p, target=0.5)
    b = empirical_generating(sample_gue_batch(12, 1000, seed=42), p, target=0.5)
    assert a == b
    c = empirical_generating(sample_gue_batch(12, 1000, seed=43), p, target=0.5)
    assert c.estimate != a.estimate


def test_sample_depends_only_on_seed_and_index():
    short = sample_gue_batch(15, 3, seed=9)
    long = sample_gue_batch(15, 5, seed=9)
    for x, y in zip(short, long):
        assert np.array_equal(x.eigenvalues, y.eigenvalues)
        assert x.seed == y.seed


# -- empirical generating function -----------------------------------------------------


def test_all_ones_is_exactly_one():
    r = empirical_generating(sample_gue_batch(10, 1000, seed=0), PartitionSpec((1.0, 0.0), (1.0, 1.0)), target=1.0)
    assert r.estimate == 1.0 and r.std_error == 0.0 and r.z_score == 0.0


def test_too_few_samples():
    with pytest.raises(ValidationError):
        empirical_generating(sample_gue_batch(10, 999, seed=0), PartitionSpec((0.0,), (0.0,)))


def test_z_score_definition():
    r = empirical_generating(sample_gue_batch(10, 1000, seed=0), PartitionSpec((0.0,), (0.5,)), target=0.8)
    assert r.z_score == pytest.approx((r.estimate - r.target) / r.std_error, rel=1e-14)


@pytest.mark.slow
@pytest.mark.parametrize(
    "x, s", [((0.0,), (0.0,)), ((1.0, -1.0), (1.0, 0.0))], ids=["largest", "gap"]
)
def test_limit_within_three_sigma(gue_samples_200, x, s):
    p = PartitionSpec(x, s)
    r = empirical_generating(gue_samples_200, p)
    assert r.target == pytest.approx(fredholm_det(p).det, abs=0)
    assert abs(r.z_score) <= 3.0


# -- finite n and Hankel ---------------------------------------------------------------


def test_finite_n_all_ones():
    assert finite_n_det(20, (5.0, 0.0), (1.0, 1.0)) == 1.0


def test_finite_n_rescaled_matches_limit_trend():
    # |F_n - F| decreases as n grows for a fixed rescaled partition
    cases = [((0.0,), (0.0,), TW_VALUES[0.0])] + GENERATING_VALUES[:2]
    for x, s, target in cases:
        errs = [abs(finite_n_det(n, edge_unscale(x, n), s) - target) for n in (50, 100, 200)]
        assert errs[0] > errs[1] > errs[2]


def test_finite_n_size_cap():
    with pytest.raises(ValidationError):
        finite_n_det(401, (0.0,), (0.0,))


@pytest.mark.parametrize("m", range(7))
def test_gaussian_moments(m):
    exact = double_factorial(2 * m - 1) * math.sqrt(2 * math.pi)
    assert gaussian_moment(2 * m) == pytest.approx(exact, rel=1e-13)
    assert gaussian_moment(2 * m + 1) == 0.0


def test_gaussian_hankel_det_matches_numeric_determinant():
    n = 5
    h = np.array([[gaussian_moment(i + j) for j in range(n)] for i in range(n)])
    assert gaussian_hankel_det(n) == pytest.approx(np.linalg.det(h), rel=1e-12)


def test_hankel_all_ones():
    assert hankel_ratio(8, (1.0, -1.0), (1.0, 1.0)) == pytest.approx(1.0, abs=1e-14)


def test_hankel_vs_finite_n_single_point():
    assert hankel_ratio(6, (0.0,), (0.0,)) == pytest.approx(finite_n_det(6, (0.0,), (0.0,)), abs=1e-10)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_hankel_vs_finite_n_random(n):
    for p in random_partitions(4, seed=100 + n):
        assert abs(hankel_ratio(n, p.x, p.s) - finite_n_det(n, p.x, p.s)) <= 1e-10


def test_hankel_small_n_closed_form():
    # n = 1: ratio is the weighted mass of the Gaussian
    x0, s0 = 0.3, 0.25
    tail = 0.5 * math.erfc(x0 / math.sqrt(2))
    assert hankel_ratio(1, (x0,), (s0,)) == pytest.approx(1 - (1 - s0) * tail, rel=1e-14)


def test_hankel_size_cap():
    with pytest.raises(ValidationError):
        hankel_ratio(13, (0.0,), (0.0,))


def test_hankel_refuses_ill_conditioned():
    # almost all mass removed: the moment matrix is nearly singular
    with pytest.raises(ConditioningError):
        hankel_ratio(12, (-3.0,), (0.0,))
