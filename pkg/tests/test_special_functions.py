import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airygap.errors import DomainError
from airygap.special_functions import (
    AIRY_WINDOW,
    DELTA_DIAG,
    _asymptotic_positive,
    _laplace_real,
    airy_ai_aip,
    airy_eval,
    airy_kernel,
    airy_kernel_diagonal,
    airy_kernel_matrix,
    composite_gauss_legendre,
    gauss_legendre,
    hermite_functions,
    hermite_orthonormal,
)

mpmath.mp.dps = 30


def mp_airy(x):
    return float(mpmath.airyai(x)), float(mpmath.airyai(x, derivative=1))


# -- Airy function -------------------------------------------------------------


def test_airy_at_zero_matches_closed_form():
    a = airy_eval(0.0)
    ai0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
    aip0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
    assert a.ai == pytest.approx(ai0, rel=1e-15)
    assert a.aip == pytest.approx(aip0, rel=1e-15)
    assert a.ai == pytest.approx(0.3550280539, abs=1e-10)
    assert a.aip == pytest.approx(-0.2588194038, abs=1e-10)


def test_airy_at_ten_matches_leading_asymptotics():
    a = airy_eval(10.0)
    lead = math.exp(-(2.0 / 3.0) * 10**1.5) / (2 * math.sqrt(math.pi) * 10**0.25)
    assert a.ai > 0 and a.aip < 0
    assert a.ai == pytest.approx(1.1047e-10, rel=1e-4)
    assert a.ai == pytest.approx(lead, rel=1e-2)


def test_airy_ode_residual_at_one():
    h = 1e-4
    ai = [airy_eval(1.0 + d).ai for d in (-h, 0.0, h)]
    second = (ai[0] - 2 * ai[1] + ai[2]) / h**2
    assert abs(second - ai[1]) <= 1e-6


@pytest.mark.parametrize("x", np.concatenate([np.linspace(0, 100, 41), [1.5, 1.50001, 7.999, 8.0, 8.001, 12.5]]))
def test_airy_relative_accuracy_positive(x):
    ai, aip = airy_ai_aip(x)
    ref_ai, ref_aip = mp_airy(x)
    assert abs(ai - ref_ai) <= 1e-13 * abs(ref_ai)
    assert abs(aip - ref_aip) <= 1e-13 * abs(ref_aip)


@pytest.mark.parametrize("x", np.concatenate([np.linspace(-50, 0, 51), [-3.0, -2.9999, -8.0, -8.0001, -7.9999]]))
def test_airy_envelope_accuracy_negative(x):
    ai, aip = airy_ai_aip(x)
    ref_ai, ref_aip = mp_airy(x)
    env = max(abs(x), 1.0) ** -0.25 / math.sqrt(math.pi)
    envp = max(abs(x), 1.0) ** 0.25 / math.sqrt(math.pi)
    assert abs(ai - ref_ai) <= 1e-13 * env
    assert abs(aip - ref_aip) <= 1e-13 * envp


def test_airy_underflows_cleanly_beyond_double_range():
    # |Ai| < 1e-290 past x ~ 100; values must underflow to zero, not NaN
    for x in (150.0, 199.0, 200.0):
        ai, aip = airy_ai_aip(x)
        assert np.isfinite(ai) and np.isfinite(aip)
        assert 0.0 <= ai < 1e-290 and -1e-290 < aip <= 0.0


def test_asymptotic_and_laplace_branches_agree_in_overlap_band():
    # the expansion reaches 1e-13 from x ~ 7.4 on, so the switch at 8 sits inside the band
    x = np.linspace(7.5, 12.0, 46)
    a1, p1 = _asymptotic_positive(x)
    a2, p2 = _laplace_real(x)
    assert np.max(np.abs(a1 / a2 - 1)) <= 1e-13
    assert np.max(np.abs(p1 / p2 - 1)) <= 1e-13


@pytest.mark.parametrize("x", [-50.0001, 200.1, math.nan, math.inf])
def test_airy_outside_window_raises(x):
    with pytest.raises(DomainError):
        airy_eval(x)


def test_airy_window_constant():
    assert AIRY_WINDOW == (-50.0, 200.0)


def test_airy_scalar_and_array_agree():
    xs = np.array([-7.0, -1.0, 0.3, 5.0, 20.0])
    ai, aip = airy_ai_aip(xs)
    for x, a, b in zip(xs, ai, aip):
        pair = airy_eval(float(x))
        assert isinstance(pair.ai, float)
        assert pair.ai == a and pair.aip == b


def test_airy_sign_pattern_for_nonnegative_x():
    x = np.linspace(0, 100, 501)
    ai, aip = airy_ai_aip(x)
    assert np.all(ai > 0) and np.all(aip < 0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 30.0), st.floats(1e-3, 30.0))
def test_airy_monotone_decay(x, dx):
    y = min(x + dx, 30.0)
    if y > x:
        assert airy_eval(y).ai < airy_eval(x).ai


# -- Airy kernel ------------------------------------------------------------


def test_kernel_at_origin():
    assert airy_kernel(0.0, 0.0) == pytest.approx(0.06698748377966399, rel=1e-14)
    assert airy_kernel(0.0, 0.0) == pytest.approx(airy_eval(0.0).aip ** 2, rel=1e-15)


def test_kernel_diagonal_matches_two_point_formula_at_small_separation():
    u, v = 0.5e-5, -0.5e-5
    ai_u, aip_u = mp_airy(u)
    ai_v, aip_v = mp_airy(v)
    two_point = (ai_u * aip_v - aip_u * ai_v) / (u - v)
    assert airy_kernel_diagonal(0.0) == pytest.approx(two_point, rel=1e-9)


def test_kernel_symmetry_exact():
    assert airy_kernel(1.3, -0.4) == airy_kernel(-0.4, 1.3)


def test_kernel_near_diagonal_pair_five():
    # the plain diagonal value at the midpoint differs by 5.3e-6 relative;
    # the second-order corrected expansion closes the gap
    exact = mpmath.mpf(0)
    a5, ap5 = mpmath.airyai(5), mpmath.airyai(5, derivative=1)
    a501, ap501 = mpmath.airyai(mpmath.mpf("5.01")), mpmath.airyai(mpmath.mpf("5.01"), derivative=1)
    exact = float((a5 * ap501 - ap5 * a501) / (5 - mpmath.mpf("5.01")))
    diag_mid = float(airy_kernel_diagonal(5.005))
    assert abs(diag_mid / exact - 1) == pytest.approx(5.3e-6, rel=0.05)
    assert abs(airy_kernel(5.0, 5.01) / exact - 1) < 1e-8


def test_kernel_continuous_across_switch():
    m = 0.7
    for d in (0.49 * DELTA_DIAG, 0.51 * DELTA_DIAG):
        val = airy_kernel(m + d, m - d)
        ai_u, aip_u = mp_airy(m + d)
        ai_v, aip_v = mp_airy(m - d)
        ref = mpmath.mpf(0)
        mu, mv = mpmath.mpf(m) + d, mpmath.mpf(m) - d
        ref = float((mpmath.airyai(mu) * mpmath.airyai(mv, 1) - mpmath.airyai(mu, 1) * mpmath.airyai(mv)) / (mu - mv))
        # two-point branch cancels about eps / delta of relative accuracy
        assert abs(val - ref) <= 1e-10 * abs(ref)


@settings(max_examples=60, deadline=None)
@given(st.floats(-12.0, 20.0))
def test_kernel_diagonal_positive(x):
    assert airy_kernel_diagonal(x) > 0


@settings(max_examples=40, deadline=None)
@given(st.floats(-10.0, 10.0), st.floats(-10.0, 10.0))
def test_kernel_symmetric_property(u, v):
    assert airy_kernel(u, v) == airy_kernel(v, u)


def test_kernel_matrix_matches_scalar_kernel():
    t = np.array([-2.0, -0.3, 0.0, 1e-6, 1.7])
    k = airy_kernel_matrix(t)
    for i in range(t.size):
        for j in range(t.size):
            assert k[i, j] == pytest.approx(airy_kernel(t[i], t[j]), rel=1e-12, abs=1e-16)


# -- Gauss-Legendre ------------------------------------------------------------


def test_two_point_rule():
    q = gauss_legendre(2, -1.0, 1.0)
    assert q.nodes == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)], abs=3e-16)
    assert q.weights == pytest.approx([1.0, 1.0], abs=1e-15)
    assert q.interval == (-1.0, 1.0)


def test_eight_point_rule_exact_for_degree_seven():
    q = gauss_legendre(8, 0.0, 1.0)
    assert abs(q.integrate(lambda x: x**7) - 1 / 8) <= 1e-15


def test_integral_of_airy_over_zero_ten():
    # the integral over [0, inf) is 1/3 and the tail beyond 10 is ~1e-11
    ref = float(mpmath.quad(mpmath.airyai, [0, 10]))
    val = gauss_legendre(50, 0.0, 10.0).integrate(lambda x: airy_ai_aip(x)[0])
    assert val == pytest.approx(ref, abs=1e-13)
    assert val == pytest.approx(0.33333333330, abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 40, 101, 500, 2000])
def test_rule_invariants(n):
    q = gauss_legendre(n, -2.0, 3.0)
    assert np.all(q.weights > 0)
    assert np.all(np.diff(q.nodes) > 0)
    assert q.nodes[0] > -2.0 and q.nodes[-1] < 3.0
    assert abs(q.weights.sum() - 5.0) <= 1e-13 * 5.0


@pytest.mark.parametrize("n", [3, 10, 25])
def test_polynomial_exactness(n):
    q = gauss_legendre(n, -1.0, 2.0)
    for deg in range(2 * n):
        exact = (2.0 ** (deg + 1) - (-1.0) ** (deg + 1)) / (deg + 1)
        assert q.integrate(lambda x: x**deg) == pytest.approx(exact, rel=1e-13, abs=1e-13)


def test_rule_convergence_under_doubling():
    f = lambda x: airy_ai_aip(x)[0]  # noqa: E731
    for n in (40, 60):
        a = gauss_legendre(n, 0.0, 10.0).integrate(f)
        b = gauss_legendre(2 * n, 0.0, 10.0).integrate(f)
        assert abs(a - b) < 1e-12


def test_composite_rule_covers_edges():
    t, w = composite_gauss_legendre(np.array([0.0, 0.5, 2.0]), 6)
    assert t.size == 12
    assert w.sum() == pytest.approx(2.0, rel=1e-14)


def test_invalid_rule_arguments():
    with pytest.raises(ValueError):
        gauss_legendre(0, 0.0, 1.0)
    with pytest.raises(ValueError):
        gauss_legendre(3, 1.0, 1.0)


# -- Hermite -------------------------------------------------------------------


def test_hermite_zero_is_constant():
    assert hermite_orthonormal(0, 3.7) == pytest.approx((2 * math.pi) ** -0.25, rel=1e-15)


def _hermite_rule():
    return gauss_legendre(200, -12.0, 12.0)


def test_hermite_orthogonality():
    q = _hermite_rule()
    f = lambda x: hermite_orthonormal(2, x) * hermite_orthonormal(3, x) * np.exp(-x * x / 2)  # noqa: E731
    assert abs(q.integrate(f)) <= 1e-12


def test_hermite_normalization():
    q = _hermite_rule()
    f = lambda x: hermite_orthonormal(5, x) ** 2 * np.exp(-x * x / 2)  # noqa: E731
    assert abs(q.integrate(f) - 1.0) <= 1e-12


def test_hermite_gram_matrix_up_to_degree_sixty():
    q = gauss_legendre(400, -20.0, 20.0)
    phi = hermite_functions(61, q.nodes)
    gram = (phi * q.weights) @ phi.T
    assert np.max(np.abs(gram - np.eye(61))) <= 1e-12


def test_hermite_functions_match_polynomials():
    x = np.linspace(-5, 5, 11)
    phi = hermite_functions(8, x)
    for j in range(8):
        assert phi[j] == pytest.approx(hermite_orthonormal(j, x) * np.exp(-x * x / 4), rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("j", [-1, 61, 2.5])
def test_hermite_degree_out_of_range(j):
    with pytest.raises(DomainError):
        hermite_orthonormal(j, 0.0)
