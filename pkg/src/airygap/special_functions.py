"""Airy functions, the Airy kernel, Gauss-Legendre rules and Hermite functions.

Everything here is a pure function of its arguments.  The Airy pair is
evaluated piecewise:

* ``-3 <= x <= 1.5``: Maclaurin series.
* ``1.5 < x <= 8`` and ``-8 <= x < -3``: the Laplace-type integral for
  ``K_{1/3}`` and ``K_{2/3}`` (real argument, or rotated by ``e^{i pi/3}``
  on the negative axis), discretized with generalized Gauss-Laguerre rules.
* ``|x| > 8``: asymptotic expansions truncated at the smallest term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError

AIRY_WINDOW = (-50.0, 200.0)
X_SWITCH = 8.0
DELTA_DIAG = 1e-4
HERMITE_MAX_DEGREE = 60

_SERIES_LO = -3.0
_SERIES_HI = 1.5
_LAGUERRE_NODES = 60
_ASYMPTOTIC_TERMS = 40

# Ai(0) = 3^{-2/3}/Gamma(2/3), -Ai'(0) = 3^{-1/3}/Gamma(1/3)
_AI0 = 0.355028053887817239260063186004183176397979174199177
_AIP0 = -0.258819403792806798405183560189203963479091138354934


@dataclass(frozen=True)
class AiryPair:
    ai: float | np.ndarray
    aip: float | np.ndarray


@dataclass(frozen=True)
class QuadRule:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


# -- Airy pair ---------------------------------------------------------------


def _airy_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Ai = Ai(0) f + Ai'(0) g,  f = sum a_k x^{3k},  g = sum b_k x^{3k+1}
    x3 = x**3
    tf = np.ones_like(x)  # a_k x^{3k}
    tg = x.copy()  # b_k x^{3k+1}
    pf = x * x / 6.0  # a_k x^{3k-1}, starting at k = 1
    pg = np.ones_like(x)  # b_k x^{3k}
    f, g = tf.copy(), tg.copy()
    fd, gd = 3.0 * pf, pg.copy()
    for k in range(1, 200):
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        pg = pg * x3 / ((3 * k) * (3 * k + 1))
        if k > 1:
            pf = pf * x3 / ((3 * k - 1) * (3 * k))
            fd += 3 * k * pf
        f += tf
        g += tg
        gd += (3 * k + 1) * pg
        last = np.abs(np.concatenate([tf, tg, pf, pg])) * (3 * k + 1)
        if np.all(last <= 1e-17 * (np.abs(np.concatenate([f, g, fd, gd])) + 1e-300)):
            break
    return _AI0 * f + _AIP0 * g, _AI0 * fd + _AIP0 * gd


@lru_cache(maxsize=4)
def _gen_laguerre(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Golub-Welsch nodes/weights for the weight t^alpha e^{-t} on (0, inf)."""
    i = np.arange(1, n)
    diag = 2.0 * np.arange(n) + alpha + 1.0
    off = np.sqrt(i * (i + alpha))
    jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    t, vec = np.linalg.eigh(jac)
    w = vec[0] ** 2 * math.gamma(alpha + 1.0)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _airy_laplace(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # K_nu(zeta) = sqrt(pi/(2 zeta)) e^{-zeta}/Gamma(nu+1/2)
    #              * int_0^inf e^{-t} t^{nu-1/2} (1 + t/(2 zeta))^{nu-1/2} dt
    zeta = (2.0 / 3.0) * z**1.5
    t1, w1 = _gen_laguerre(_LAGUERRE_NODES, -1.0 / 6.0)
    t2, w2 = _gen_laguerre(_LAGUERRE_NODES, 1.0 / 6.0)
    r = 1.0 / (2.0 * zeta[:, None])
    i13 = (w1 * (1.0 + t1 * r) ** (-1.0 / 6.0)).sum(axis=1)
    i23 = (w2 * (1.0 + t2 * r) ** (1.0 / 6.0)).sum(axis=1)
    pref = np.sqrt(np.pi / (2.0 * zeta)) * np.exp(-zeta)
    k13 = pref * i13 / math.gamma(5.0 / 6.0)
    k23 = pref * i23 / math.gamma(7.0 / 6.0)
    ai = np.sqrt(z / 3.0) / np.pi * k13
    aip = -z / (np.pi * math.sqrt(3.0)) * k23
    return ai, aip


def _laplace_real(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ai, aip = _airy_laplace(x.astype(complex))
    return ai.real, aip.real


def _laplace_negative(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Ai(-y) = 2 Re[e^{i pi/3} Ai(y e^{i pi/3})]
    rot = np.exp(1j * np.pi / 3.0)
    ai, aip = _airy_laplace(-x * rot)
    return 2.0 * (rot * ai).real, -2.0 * (rot * rot * aip).real


@lru_cache(maxsize=1)
def _asymptotic_coefficients() -> tuple[np.ndarray, np.ndarray]:
    u = [1.0]
    for k in range(1, _ASYMPTOTIC_TERMS):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    u_arr = np.array(u)
    k = np.arange(_ASYMPTOTIC_TERMS)
    v_arr = -(6 * k + 1) / (6 * k - 1) * u_arr
    u_arr.setflags(write=False)
    v_arr.setflags(write=False)
    return u_arr, v_arr


def _truncated_sum(coef: np.ndarray, zeta: np.ndarray, sign: float) -> np.ndarray:
    """sum_k sign^k coef_k zeta^{-k}, stopped before the smallest term."""
    k = np.arange(coef.size)
    terms = coef[None, :] * (sign / zeta[:, None]) ** k[None, :]
    size = np.where(coef[None, :] != 0.0, np.abs(terms), np.inf)
    stop = np.argmin(size, axis=1)
    mask = k[None, :] < stop[:, None]
    return np.where(mask, terms, 0.0).sum(axis=1)


def _two_product(a, b):
    # Dekker: a*b = p + e exactly
    p = a * b
    split = 134217729.0  # 2^27 + 1
    ca = split * a
    a_hi = ca - (ca - a)
    a_lo = a - a_hi
    cb = split * b
    b_hi = cb - (cb - b)
    b_lo = b - b_hi
    e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, e


_TWO_THIRDS_LO = float(Fraction(2, 3) - Fraction(2.0 / 3.0))


def _zeta_double_double(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(2/3) x^{3/2} as an unevaluated sum hi + lo."""
    s = np.sqrt(x)
    sq, sq_err = _two_product(s, s)
    s_lo = ((x - sq) - sq_err) / (2.0 * s)
    p, p_err = _two_product(x, s)
    p_lo = p_err + x * s_lo
    c = 2.0 / 3.0
    z, z_err = _two_product(p, c)
    z_lo = z_err + p * _TWO_THIRDS_LO + p_lo * c
    hi = z + z_lo
    return hi, z_lo - (hi - z)


def _asymptotic_positive(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u, v = _asymptotic_coefficients()
    zeta, zeta_lo = _zeta_double_double(x)
    e = np.exp(-zeta) * (1.0 - zeta_lo) / (2.0 * math.sqrt(math.pi))
    ai = e / x**0.25 * _truncated_sum(u, zeta, -1.0)
    aip = -e * x**0.25 * _truncated_sum(v, zeta, -1.0)
    return ai, aip


def _asymptotic_negative(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u, v = _asymptotic_coefficients()
    y = -x
    zeta = (2.0 / 3.0) * y**1.5
    # even/odd parts with alternating signs: P, Q for Ai and R, S for Ai'
    alt_u = u * np.array([1, 1, -1, -1] * (u.size // 4 + 1))[: u.size]
    alt_v = v * np.array([1, 1, -1, -1] * (v.size // 4 + 1))[: v.size]
    even = np.arange(u.size) % 2 == 0
    p = _truncated_sum(np.where(even, alt_u, 0.0), zeta, 1.0)
    q = _truncated_sum(np.where(~even, alt_u, 0.0), zeta, 1.0)
    r = _truncated_sum(np.where(even, alt_v, 0.0), zeta, 1.0)
    s = _truncated_sum(np.where(~even, alt_v, 0.0), zeta, 1.0)
    theta = zeta - math.pi / 4.0
    c, sn = np.cos(theta), np.sin(theta)
    ai = y**-0.25 / math.sqrt(math.pi) * (c * p + sn * q)
    aip = y**0.25 / math.sqrt(math.pi) * (sn * r - c * s)
    return ai, aip


def airy_ai_aip(x) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``(Ai(x), Ai'(x))`` for real ``x`` in the accuracy window."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    lo, hi = AIRY_WINDOW
    if x.size and (np.any(~np.isfinite(x)) or x.min() < lo or x.max() > hi):
        raise DomainError(f"Airy argument outside [{lo}, {hi}]")
    ai = np.empty_like(x)
    aip = np.empty_like(x)
    branches = (
        (x < -X_SWITCH, _asymptotic_negative),
        ((x >= -X_SWITCH) & (x < _SERIES_LO), _laplace_negative),
        ((x >= _SERIES_LO) & (x <= _SERIES_HI), _airy_series),
        ((x > _SERIES_HI) & (x <= X_SWITCH), _laplace_real),
        (x > X_SWITCH, _asymptotic_positive),
    )
    with np.errstate(under="ignore"):
        for mask, fn in branches:
            if mask.any():
                ai[mask], aip[mask] = fn(x[mask])
    return ai.reshape(shape), aip.reshape(shape)


def airy_eval(x) -> AiryPair:
    """Evaluate Ai and Ai' at ``x`` (scalar or array).

    Relative accuracy is about 1e-14 on the positive axis while Ai does not
    underflow; on the negative axis the error is of that size relative to the
    envelope ``|x|^{-1/4}/sqrt(pi)`` (relative error is meaningless at zeros).
    """
    ai, aip = airy_ai_aip(x)
    if np.ndim(x) == 0:
        return AiryPair(float(ai), float(aip))
    return AiryPair(ai, aip)


# -- Airy kernel -------------------------------------------------------------


def airy_kernel_diagonal(x, ai=None, aip=None) -> np.ndarray:
    """K(x, x) = Ai'(x)^2 - x Ai(x)^2."""
    if ai is None:
        ai, aip = airy_ai_aip(x)
    return aip * aip - np.asarray(x) * ai * ai


def _near_diagonal_curvature(m, ai, aip):
    # K(m+d, m-d) = K(m, m) + d^2 C(m) + O(d^4)
    return (-2.0 / 3.0) * m * m * ai * ai + (2.0 / 3.0) * m * aip * aip + ai * aip / 3.0


def airy_kernel_from_values(u, v, ai_u, aip_u, ai_v, aip_v, delta=DELTA_DIAG):
    """Airy kernel on a broadcast grid given precomputed Airy values.

    Pairs with ``|u - v| <= delta`` use the near-diagonal expansion about the
    midpoint (Airy values re-evaluated there).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    diff = u - v
    near = np.abs(diff) <= delta
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (ai_u * aip_v - aip_u * ai_v) / diff
    if np.any(near):
        m = np.broadcast_to((u + v) / 2.0, near.shape)[near]
        d = np.broadcast_to(diff / 2.0, near.shape)[near]
        am, apm = airy_ai_aip(m)
        out = np.array(out, copy=True)
        out[near] = apm * apm - m * am * am + d * d * _near_diagonal_curvature(m, am, apm)
    return out


def airy_kernel(u, v, delta: float = DELTA_DIAG):
    """K^Ai(u, v) = (Ai(u)Ai'(v) - Ai'(u)Ai(v)) / (u - v).

    Scalars give a float; arrays broadcast.
    """
    ai_u, aip_u = airy_ai_aip(u)
    ai_v, aip_v = airy_ai_aip(v)
    out = airy_kernel_from_values(u, v, ai_u, aip_u, ai_v, aip_v, delta)
    if np.ndim(out) == 0:
        return float(out)
    return out


def airy_kernel_matrix(t: np.ndarray, s: np.ndarray | None = None) -> np.ndarray:
    """Kernel matrix K(t_a, s_b); ``s`` defaults to ``t``."""
    t = np.asarray(t, dtype=float)
    ai_t, aip_t = airy_ai_aip(t)
    if s is None:
        s, ai_s, aip_s = t, ai_t, aip_t
    else:
        s = np.asarray(s, dtype=float)
        ai_s, aip_s = airy_ai_aip(s)
    return airy_kernel_from_values(
        t[:, None], s[None, :], ai_t[:, None], aip_t[:, None], ai_s[None, :], aip_s[None, :]
    )


# -- Gauss-Legendre ----------------------------------------------------------


@lru_cache(maxsize=256)
def _legendre_reference(n: int) -> tuple[np.ndarray, np.ndarray]:
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        if n == 1:
            p1, p0 = x, np.ones_like(x)
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        raise ConvergenceError(f"Legendre Newton iteration failed for n={n}")
    # one more derivative evaluation at the converged nodes
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    if n == 1:
        p1, p0 = x, np.ones_like(x)
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadRule:
    """n-point Gauss-Legendre rule on (a, b), exact through degree 2n-1."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not a < b:
        raise DomainError(f"need a < b, got ({a}, {b})")
    x, w = _legendre_reference(int(n))
    half = 0.5 * (b - a)
    return QuadRule(nodes=a + half * (x + 1.0), weights=half * w, interval=(float(a), float(b)))


def composite_gauss_legendre(edges, n_per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    """Concatenated Gauss rules on consecutive panels ``edges[i], edges[i+1]``."""
    x, w = _legendre_reference(int(n_per_panel))
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (x + 1.0)).ravel(), (half * w).ravel()


# -- Hermite -----------------------------------------------------------------


def hermite_orthonormal(j: int, x):
    """Orthonormal Hermite polynomial p_j for the weight exp(-x^2/2)."""
    if int(j) != j or j < 0 or j > HERMITE_MAX_DEGREE:
        raise DomainError(f"degree must be in [0, {HERMITE_MAX_DEGREE}], got {j}")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.full_like(x, (2.0 * math.pi) ** -0.25)
    for i in range(int(j)):
        prev, cur = cur, (x * cur - math.sqrt(i) * prev) / math.sqrt(i + 1)
    return float(cur) if cur.ndim == 0 else cur


def hermite_functions(n: int, x) -> np.ndarray:
    """Rows phi_l(x) = p_l(x) exp(-x^2/4) for l = 0..n-1.

    The Gaussian factor is carried through the recurrence, so large degrees
    neither overflow nor lose the orthonormal scaling.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n,) + x.shape)
    prev = np.zeros_like(x)
    cur = (2.0 * math.pi) ** -0.25 * np.exp(-x * x / 4.0)
    for i in range(n):
        out[i] = cur
        prev, cur = cur, (x * cur - math.sqrt(i) * prev) / math.sqrt(i + 1)
    return out
