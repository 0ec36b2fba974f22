"""Probability laws of the largest particles of the Airy point process.

Everything is computed on the Fredholm side: occupancy probabilities are
Taylor coefficients of ``F(x; s)`` in ``s`` and x-derivatives come from the
resolvent identity.  The Painleve route is available as a cross-check for
the gap probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import PreconditionError, ToleranceError, ValidationError
from .fredholm import (
    DEFAULT_L_TRUNC,
    DEFAULT_NODES_PER_UNIT,
    PartitionSpec,
    build_scheme,
    fredholm_det,
    mixed_taylor_coefficients,
    resolvent_on_points,
    s_derivatives,
    taylor_coefficients,
    contour_points,
    _log_det_value,
    _resolvent_at,
)
from .special_functions import composite_gauss_legendre

ZETA_WINDOW = (-8.0, 4.0)
PANEL_WIDTH = 0.5
PANEL_NODES = 10
V_CHECK_TOL = 1e-5
FD_STEP = 1e-4
MAX_TOTAL_ORDER = 20


@dataclass(frozen=True)
class DistributionCurve:
    abscissae: np.ndarray
    values: np.ndarray
    kind: str  # cdf, survival or density
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("cdf", "survival", "density"):
            raise ValidationError(f"unknown curve kind {self.kind!r}")
        a = np.asarray(self.abscissae, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if a.shape != v.shape or a.ndim != 1:
            raise ValidationError("abscissae and values must be 1-d arrays of equal length")
        if np.any(np.diff(a) <= 0):
            raise ValidationError("abscissae must be strictly increasing")
        object.__setattr__(self, "abscissae", a)
        object.__setattr__(self, "values", v)

    def first_violation(self, slack: float = 1e-10) -> int | None:
        """Index of the first grid point breaking range or monotonicity, else None."""
        v = self.values
        if self.kind == "density":
            bad = np.flatnonzero(v < -slack)
            return int(bad[0]) if bad.size else None
        out_of_range = np.flatnonzero((v < -slack) | (v > 1 + slack))
        step = np.diff(v) if self.kind == "cdf" else -np.diff(v)
        wrong_way = np.flatnonzero(step < -slack) + 1
        bad = np.concatenate([out_of_range, wrong_way])
        return int(bad.min()) if bad.size else None

    def check(self, slack: float = 1e-10) -> "DistributionCurve":
        i = self.first_violation(slack)
        if i is not None:
            raise ToleranceError(
                f"{self.kind} curve fails range/monotonicity at x = {self.abscissae[i]:.17g} "
                f"(value {self.values[i]:.17g})"
            )
        return self


def _scheme(p, nodes_per_unit, L_trunc):
    return build_scheme(p, nodes_per_unit, L_trunc)


# -- occupancy laws -----------------------------------------------------------


def occupancy_probabilities(x: float, max_count: int, nodes_per_unit=DEFAULT_NODES_PER_UNIT, L_trunc=DEFAULT_L_TRUNC):
    """``P(n_{(x, inf)} = i)`` for ``i = 0..max_count``."""
    p = PartitionSpec((float(x),), (0.0,))
    coeffs = s_derivatives(p, _scheme(p, nodes_per_unit, L_trunc), 1, max(int(max_count), 1))
    return np.asarray(coeffs[: max_count + 1], dtype=float)


def kth_largest_cdf(ell: int, x: float, nodes_per_unit=DEFAULT_NODES_PER_UNIT, L_trunc=DEFAULT_L_TRUNC) -> float:
    """``P(zeta_ell < x)``: fewer than ``ell`` particles above ``x``."""
    if int(ell) != ell or not 1 <= ell <= MAX_TOTAL_ORDER:
        raise ValidationError(f"ell must be an integer in 1..{MAX_TOTAL_ORDER}, got {ell}")
    ell = int(ell)
    if ell == 1:
        p = PartitionSpec((float(x),), (0.0,))
        return float(fredholm_det(p, _scheme(p, nodes_per_unit, L_trunc), estimate_error=False).det)
    probs = occupancy_probabilities(x, ell - 1, nodes_per_unit, L_trunc)
    return float(np.clip(sum(probs[:ell]), 0.0, 1.0))


def joint_cdf(m, x, nodes_per_unit=DEFAULT_NODES_PER_UNIT, L_trunc=DEFAULT_L_TRUNC) -> float:
    """``P(zeta_{m_1} < x_1, ..., zeta_{m_k} < x_k)``.

    ``m`` is strictly increasing and ``x`` strictly decreasing.  The event
    is ``n_{A_1} + ... + n_{A_i} < m_i`` for every ``i``, so the answer is a
    constrained sum of mixed Taylor coefficients of ``F(x; s)`` at ``s = 0``.
    """
    m = [int(v) for v in m]
    x = tuple(float(v) for v in x)
    if len(m) != len(x) or not m:
        raise ValidationError("m and x must be non-empty and of equal length")
    if m[0] < 1 or any(b <= a for a, b in zip(m, m[1:])):
        raise ValidationError(f"m must be strictly increasing positive integers, got {m}")
    if sum(m) > MAX_TOTAL_ORDER:
        raise ValidationError(f"sum of m must be <= {MAX_TOTAL_ORDER}, got {sum(m)}")
    p = PartitionSpec(x, (0.0,) * len(x))
    orders = [mi - 1 for mi in m]
    coeffs = mixed_taylor_coefficients(p, orders, _scheme(p, nodes_per_unit, L_trunc))
    total = 0.0
    for idx in np.ndindex(*coeffs.shape):
        partial = np.cumsum(idx)
        if np.all(partial < np.array(m)):
            total += coeffs[idx]
    return float(np.clip(total, 0.0, 1.0))


def gap_probability(
    x2: float,
    x1: float,
    nodes_per_unit=DEFAULT_NODES_PER_UNIT,
    L_trunc=DEFAULT_L_TRUNC,
    cross_check: bool = False,
    check_tol: float = 1e-6,
) -> float:
    """Probability of no particle in ``(x2, x1)``, i.e. ``F(x1, x2; 1, 0)``.

    With ``cross_check`` the value is compared with the Painleve route and
    ToleranceError is raised if they differ by more than ``check_tol``.
    """
    if not x2 < x1:
        raise ValidationError(f"need x2 < x1, got x2={x2}, x1={x1}")
    p = PartitionSpec((float(x1), float(x2)), (1.0, 0.0))
    val = float(fredholm_det(p, _scheme(p, nodes_per_unit, L_trunc), estimate_error=False).det)
    if cross_check:
        from .painleve import solve_coupled_pii, tw_log_integral

        other = math.exp(tw_log_integral(solve_coupled_pii(p)))
        if abs(other - val) > check_tol:
            raise ToleranceError(f"gap probability routes disagree: {val!r} vs {other!r}")
    return val


def conditional_largest_cdf(
    x1: float, x2: float, s: float, nodes_per_unit=DEFAULT_NODES_PER_UNIT, L_trunc=DEFAULT_L_TRUNC
) -> float:
    """``P(zeta_1 < x1 | xi_1 < x2)`` for the thinning with retention ``1 - s``.

    ``xi_1`` is the largest observed particle when each particle is removed
    independently with probability ``s``.
    """
    if not 0 < s < 1:
        raise ValidationError(f"s must lie in (0, 1), got {s}")
    x1, x2 = float(x1), float(x2)
    q = PartitionSpec((x2,), (float(s),))
    den = fredholm_det(q, _scheme(q, nodes_per_unit, L_trunc), estimate_error=False).det
    if x1 > x2:
        p = PartitionSpec((x1, x2), (0.0, float(s)))
    else:
        p = PartitionSpec((x1,), (0.0,))
    num = fredholm_det(p, _scheme(p, nodes_per_unit, L_trunc), estimate_error=False).det
    return float(num / den)


# -- the two-particle kernel v(x1, x2) ----------------------------------------


def _ds2_dF(p_x, nodes_per_unit, L_trunc):
    """``dF/ds_2`` at ``s = (0, 0)``."""
    p = PartitionSpec(p_x, (0.0, 0.0))
    return s_derivatives(p, _scheme(p, nodes_per_unit, L_trunc), 2, 1)[1]


def v_kernel(
    x1: float,
    x2: float,
    method: str = "contour",
    check: bool = True,
    nodes_per_unit=DEFAULT_NODES_PER_UNIT,
    L_trunc=DEFAULT_L_TRUNC,
) -> float:
    """``v(x1, x2) = d^2 F(x1, x2; 0, s2) / ds2 dx1 at s2 = 0``, divided by ``F(x2; 0)``.

    ``method="contour"`` extracts the ``s2``-coefficient of
    ``dF/dx1 = F * dlogF/dx1`` (resolvent identity) on a circle;
    ``method="resolvent"`` uses that this equals the resolvent diagonal of
    the Airy kernel on ``(x2, inf)`` at ``x1``.  With ``check`` the result is
    compared with central differences in ``x1`` of ``dF/ds2`` and
    ToleranceError is raised beyond ``1e-5``.
    """
    x1, x2 = float(x1), float(x2)
    if not x1 > x2:
        raise PreconditionError(f"v(x1, x2) needs x1 > x2, got x1={x1}, x2={x2}")
    base = PartitionSpec((x2,), (0.0,))
    base_scheme = _scheme(base, nodes_per_unit, L_trunc)
    f2 = fredholm_det(base, base_scheme, estimate_error=False).det
    if method == "resolvent":
        val = float(resolvent_on_points(base, [x1], base_scheme)[0])
    elif method == "contour":
        p = PartitionSpec((x1, x2), (0.0, 0.0))
        scheme = _scheme(p, nodes_per_unit, L_trunc)

        def dF_dx1(z):
            s = np.array([0.0, z], dtype=complex)
            # dlogF/dx1 = (s_2 - s_1) g(x1) with the right-sided multiplier 1 - s_1 = 1
            g = _resolvent_at(scheme, s, x1, 1.0)
            return _log_det_value(scheme, s) * z * g

        coeffs = taylor_coefficients(dF_dx1, contour_points(1))
        if abs(coeffs[1].imag) > 1e-9:
            raise ToleranceError(f"imaginary residue {abs(coeffs[1].imag):.3e} in the s2-coefficient")
        val = float(coeffs[1].real) / f2
    else:
        raise ValidationError(f"unknown method {method!r}")
    if check:
        h = min(FD_STEP, 0.5 * (x1 - x2))
        fd = (_ds2_dF((x1 + h, x2), nodes_per_unit, L_trunc) - _ds2_dF((x1 - h, x2), nodes_per_unit, L_trunc)) / (2 * h)
        fd /= f2
        if abs(fd - val) > V_CHECK_TOL:
            raise ToleranceError(
                f"v({x1}, {x2}): resolvent/contour value {val:.10g} vs finite difference {fd:.10g}"
            )
    return val


@lru_cache(maxsize=32)
def _tw_curve(window: tuple[float, float], nodes_per_unit: float, L_trunc: float):
    """Gauss nodes on ``window`` and ``F(zeta; 0)`` there (read-only)."""
    lo, hi = window
    n_panels = max(1, int(math.ceil((hi - lo) / PANEL_WIDTH)))
    t, w = composite_gauss_legendre(np.linspace(lo, hi, n_panels + 1), PANEL_NODES)
    f = np.array([_tw_value(z, nodes_per_unit, L_trunc) for z in t])
    for arr in (t, w, f):
        arr.setflags(write=False)
    return t, w, f


def _tw_value(z, nodes_per_unit, L_trunc):
    p = PartitionSpec((float(z),), (0.0,))
    return fredholm_det(p, _scheme(p, nodes_per_unit, L_trunc), estimate_error=False).det


def _check_window(window):
    lo, hi = (float(v) for v in window)
    if not lo < hi:
        raise ValidationError(f"window must satisfy lo < hi, got {window}")
    return lo, hi


def spacing_survival(
    sigma,
    window=ZETA_WINDOW,
    nodes_per_unit=DEFAULT_NODES_PER_UNIT,
    L_trunc=DEFAULT_L_TRUNC,
):
    """``P(zeta_1 - zeta_2 > sigma) = int v(zeta + sigma, zeta) F(zeta; 0) dzeta``.

    Accepts a scalar or an array of ``sigma``; the integral runs over
    ``window`` with Gauss panels.
    """
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    if np.any(sig < 0) or not np.all(np.isfinite(sig)):
        raise ValidationError("sigma must be finite and nonnegative")
    lo, hi = _check_window(window)
    t, w, f = _tw_curve((lo, hi), float(nodes_per_unit), float(L_trunc))
    # x1 = x2 is the limit of v; nudge it off the node so the resolvent is one-sided
    shifts = np.maximum(sig, 1e-12)
    total = np.zeros(sig.size)
    for zeta, wz, fz in zip(t, w, f):
        base = PartitionSpec((float(zeta),), (0.0,))
        r = resolvent_on_points(base, zeta + shifts, _scheme(base, nodes_per_unit, L_trunc))
        total += wz * fz * np.real(r)
    total = np.clip(total, 0.0, 1.0)
    return float(total[0]) if np.ndim(sigma) == 0 else total


def sum_two_cdf(
    sigma,
    window=ZETA_WINDOW,
    nodes_per_unit=DEFAULT_NODES_PER_UNIT,
    L_trunc=DEFAULT_L_TRUNC,
):
    """``P(zeta_1 + zeta_2 < sigma)``.

    Split on ``zeta_1``: if ``zeta_1 < sigma/2`` the constraint on
    ``zeta_2 < zeta_1`` is automatic and contributes ``F(sigma/2; 0)``;
    otherwise ``v`` is evaluated with ordered arguments, giving
    ``int_{zeta < sigma/2} v(sigma - zeta, zeta) F(zeta; 0) dzeta``.
    """
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    if not np.all(np.isfinite(sig)):
        raise ValidationError("sigma must be finite")
    lo, hi = _check_window(window)
    out = np.zeros(sig.size)
    for i, s in enumerate(sig):
        out[i] = _tw_value(0.5 * s, nodes_per_unit, L_trunc) if 0.5 * s > lo else 0.0
        top = min(hi, 0.5 * s)
        if top <= lo:
            continue
        n_panels = max(1, int(math.ceil((top - lo) / PANEL_WIDTH)))
        t, w = composite_gauss_legendre(np.linspace(lo, top, n_panels + 1), PANEL_NODES)
        acc = 0.0
        for zeta, wz in zip(t, w):
            base = PartitionSpec((float(zeta),), (0.0,))
            scheme = _scheme(base, nodes_per_unit, L_trunc)
            fz = fredholm_det(base, scheme, estimate_error=False).det
            acc += wz * fz * float(np.real(resolvent_on_points(base, [s - zeta], scheme)[0]))
        out[i] += acc
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(sigma) == 0 else out


def spacing_curve(sigmas, **kw) -> DistributionCurve:
    sig = np.asarray(sigmas, dtype=float)
    return DistributionCurve(sig, spacing_survival(sig, **kw), "survival", {"law": "spacing"}).check()


def sum_two_curve(sigmas, **kw) -> DistributionCurve:
    sig = np.asarray(sigmas, dtype=float)
    return DistributionCurve(sig, sum_two_cdf(sig, **kw), "cdf", {"law": "sum2"}).check()
