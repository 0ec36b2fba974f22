"""Nystrom evaluation of the multi-interval Airy generating function.

For a partition ``x_1 > ... > x_k`` with weights ``s_1, ..., s_k`` the
generating function is

    F(x; s) = det(I - K),  K(u, v) = 1_{u > x_k} sum_j (1 - s_j) K^Ai(u, v) 1_{A_j}(v),

with ``A_j = (x_j, x_{j-1})`` and ``x_0 = +inf``.  The unbounded interval is
truncated at ``x_1 + L_trunc``.  After discretization with nodes ``t`` and
weights ``w`` the determinant is that of ``I - M`` with
``M_ab = sqrt(w_a) sqrt(w_b) (1 - s_b) K^Ai(t_a, t_b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    NumericalError,
    PreconditionError,
    SingularSystemError,
    ToleranceError,
    ValidationError,
)
from .special_functions import airy_kernel_diagonal, airy_kernel_matrix, composite_gauss_legendre

DEFAULT_NODES_PER_UNIT = 10.0
DEFAULT_L_TRUNC = 14.0
MAX_PANEL_NODES = 40
MIN_INTERVAL_NODES = 4


@dataclass(frozen=True)
class PartitionSpec:
    """Decreasing partition points with their weights (``s_{k+1} = 1`` implied)."""

    x: tuple[float, ...]
    s: tuple[complex | float, ...]
    allow_complex: bool = field(default=False, repr=False)

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        s_raw = np.atleast_1d(self.s)
        if len(x) == 0 or len(x) != len(s_raw):
            raise ValidationError(f"x and s must be nonempty and of equal length, got {len(x)} and {len(s_raw)}")
        if any(not math.isfinite(v) for v in x):
            raise ValidationError("partition points must be finite")
        if any(a <= b for a, b in zip(x, x[1:])):
            raise ValidationError(f"partition points must be strictly decreasing, got {x}")
        if self.allow_complex:
            s = tuple(complex(v) for v in s_raw)
        else:
            if np.iscomplexobj(s_raw) and np.any(np.imag(s_raw) != 0):
                raise ValidationError("complex weights are only allowed internally")
            s = tuple(float(np.real(v)) for v in s_raw)
            if any(not 0.0 <= v <= 1.0 for v in s):
                raise ValidationError(f"weights must lie in [0, 1], got {s}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "s", s)

    @property
    def k(self) -> int:
        return len(self.x)

    @property
    def s_ext(self) -> tuple:
        """Weights with the implicit ``s_{k+1} = 1`` appended."""
        return self.s + (1.0,)

    @property
    def is_real(self) -> bool:
        return not self.allow_complex or all(complex(v).imag == 0 for v in self.s)

    def intervals(self, L_trunc: float = DEFAULT_L_TRUNC) -> list[tuple[float, float]]:
        """``A_1, ..., A_k`` with ``A_1`` truncated at ``x_1 + L_trunc``."""
        upper = (self.x[0] + L_trunc,) + self.x[:-1]
        return list(zip(self.x, upper))

    def with_s(self, s) -> "PartitionSpec":
        return PartitionSpec(self.x, tuple(s), allow_complex=True)


@dataclass(frozen=True)
class QuadratureScheme:
    """Composite Gauss-Legendre layout over ``(x_k, x_1 + L_trunc)``.

    ``interval_index[a]`` is the 0-based ``j`` with node ``a`` in ``A_{j+1}``.
    ``multipliers`` holds ``1 - s_j`` per node for the partition the scheme
    was built from.
    """

    nodes: np.ndarray
    weights: np.ndarray
    interval_index: np.ndarray
    multipliers: np.ndarray
    panels: tuple[tuple[float, float, int], ...]
    x: tuple[float, ...]
    nodes_per_unit: float
    L_trunc: float
    tail_bound: float
    kernel: np.ndarray = field(repr=False)  # sqrt(w_a) K^Ai(t_a, t_b) sqrt(w_b)

    @property
    def N(self) -> int:
        return int(self.nodes.size)

    def multipliers_for(self, s) -> np.ndarray:
        s = np.asarray(s)
        return (1.0 - s)[self.interval_index]

    def matrix(self, s=None) -> np.ndarray:
        """The Nystrom matrix ``M`` (without the identity)."""
        m = self.multipliers if s is None else self.multipliers_for(s)
        return self.kernel * m[None, :]


@dataclass(frozen=True)
class FredholmResult:
    det: complex | float
    log_det: complex | float
    err_est: float
    N: int


def _check_resolution(nodes_per_unit: float, L_trunc: float) -> None:
    if not nodes_per_unit >= 4:
        raise ConfigError(f"nodes_per_unit must be >= 4, got {nodes_per_unit}")
    if not L_trunc >= 8:
        raise ConfigError(f"L_trunc must be >= 8, got {L_trunc}")


def build_scheme(
    p: PartitionSpec,
    nodes_per_unit: float = DEFAULT_NODES_PER_UNIT,
    L_trunc: float = DEFAULT_L_TRUNC,
) -> QuadratureScheme:
    """Lay out Gauss panels on every ``A_j`` (the first one truncated).

    Each interval receives ``ceil(nodes_per_unit * length)`` nodes, never
    fewer than four, split into panels of at most 40 nodes.
    """
    _check_resolution(nodes_per_unit, L_trunc)
    nodes, weights, index, panels = [], [], [], []
    for j, (a, b) in enumerate(p.intervals(L_trunc)):
        n = max(MIN_INTERVAL_NODES, math.ceil(nodes_per_unit * (b - a) - 1e-9))
        n_panels = math.ceil(n / MAX_PANEL_NODES)
        per_panel = math.ceil(n / n_panels)
        edges = np.linspace(a, b, n_panels + 1)
        t, w = composite_gauss_legendre(edges, per_panel)
        nodes.append(t)
        weights.append(w)
        index.append(np.full(t.size, j))
        panels.extend((float(lo), float(hi), per_panel) for lo, hi in zip(edges[:-1], edges[1:]))
    t = np.concatenate(nodes[::-1])
    w = np.concatenate(weights[::-1])
    idx = np.concatenate(index[::-1])
    if np.any(np.isin(t, p.x)):
        raise ConfigError("a quadrature node coincides with a partition point")
    end = p.x[0] + L_trunc
    tail = math.exp(-(4.0 / 3.0) * end**1.5) if end > 0 else 1.0
    sw = np.sqrt(w)
    kernel = sw[:, None] * airy_kernel_matrix(t) * sw[None, :]
    for arr in (t, w, idx, kernel):
        arr.setflags(write=False)
    mult = (1.0 - np.asarray(p.s))[idx]
    mult.setflags(write=False)
    return QuadratureScheme(
        nodes=t,
        weights=w,
        interval_index=idx,
        multipliers=mult,
        panels=tuple(sorted(panels)),
        x=p.x,
        nodes_per_unit=float(nodes_per_unit),
        L_trunc=float(L_trunc),
        tail_bound=tail,
        kernel=kernel,
    )


def _log_det(matrix: np.ndarray) -> tuple[complex | float, complex | float]:
    sign, logabs = np.linalg.slogdet(np.eye(matrix.shape[0]) - matrix)
    if np.iscomplexobj(matrix):
        log_det = complex(logabs, np.angle(sign))
        return sign * math.exp(logabs), log_det
    return float(sign) * math.exp(logabs), (float(logabs) if sign > 0 else complex(logabs, math.pi))


def _scheme_for(p: PartitionSpec, scheme: QuadratureScheme | None) -> QuadratureScheme:
    if scheme is None:
        return build_scheme(p)
    if tuple(scheme.x) != tuple(p.x):
        raise ValidationError("scheme was built for different partition points")
    return scheme


def fredholm_det(
    p: PartitionSpec,
    scheme: QuadratureScheme | None = None,
    estimate_error: bool = True,
) -> FredholmResult:
    """``F(x; s)`` by the Nystrom method.

    ``err_est`` is the change in ``log_det`` against a half-resolution
    scheme, floored at the roundoff level ``N * eps``.
    """
    scheme = _scheme_for(p, scheme)
    s = np.asarray(p.s)
    det, log_det = _log_det(scheme.matrix(s))
    if p.is_real and not (det > 0):
        raise NumericalError(f"nonpositive determinant {det} for real weights; refine the scheme")
    err = scheme.N * np.finfo(float).eps
    if estimate_error:
        half = build_scheme(p, max(4.0, scheme.nodes_per_unit / 2), scheme.L_trunc)
        _, log_half = _log_det(half.matrix(s))
        err = max(err, abs(log_det - log_half))
    if p.is_real:
        det, log_det = float(np.real(det)), float(np.real(log_det))
    return FredholmResult(det=det, log_det=log_det, err_est=float(err), N=scheme.N)


def generating_function(x, s, nodes_per_unit=DEFAULT_NODES_PER_UNIT, L_trunc=DEFAULT_L_TRUNC) -> float:
    """Convenience wrapper returning ``F(x; s)`` as a float."""
    p = PartitionSpec(tuple(np.atleast_1d(x)), tuple(np.atleast_1d(s)))
    return fredholm_det(p, build_scheme(p, nodes_per_unit, L_trunc), estimate_error=False).det


# -- resolvent and x-derivatives ----------------------------------------------


def _side(p: PartitionSpec, j: int) -> tuple[str, complex | float]:
    """Side of the one-sided limit at ``x_j`` and the multiplier there."""
    if not 1 <= j <= p.k:
        raise ValidationError(f"interval index j must be in 1..{p.k}, got {j}")
    s_ext = p.s_ext
    if s_ext[j - 1] != 1:
        return "right", 1.0 - s_ext[j - 1]
    if s_ext[j] != 1:
        return "left", 1.0 - s_ext[j]
    raise PreconditionError(
        f"s_{j} = s_{j + 1} = 1: the kernel vanishes on both sides of x_{j}; "
        "the resolvent limit is taken from the right when s_j != 1, otherwise from the left with 1 - s_{j+1}"
    )


def _resolvent_at(scheme: QuadratureScheme, s, v, mult_v):
    """``R(v, v)`` for points ``v`` whose column multiplier is ``mult_v``."""
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    m = scheme.multipliers_for(s)
    sw = np.sqrt(scheme.weights)
    cols = airy_kernel_matrix(scheme.nodes, v_arr) * sw[:, None]  # sqrt(w_a) K(t_a, v)
    kvv = airy_kernel_diagonal(v_arr)
    a = np.eye(scheme.N) - scheme.kernel * m[None, :]
    try:
        z = np.linalg.solve(a, cols)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("I - M is numerically singular") from exc
    # g(v) = [(I - K)^{-1} K^Ai(., v)](v)
    g = kvv + np.einsum("a,ab->b", m, cols * z)
    out = mult_v * g
    return out if np.ndim(v) else out[0]


def resolvent_on_points(p: PartitionSpec, v, scheme: QuadratureScheme | None = None) -> np.ndarray:
    """``g(v) = [(I - K)^{-1} K^Ai(., v)](v)`` at arbitrary points ``v``.

    Inside an interval ``A_j`` the resolvent diagonal is ``(1 - s_j) g(v)``;
    with all ``s = 0`` it is the conditional one-point density of the
    process given that ``(x_k, inf)`` is otherwise empty.
    """
    scheme = _scheme_for(p, scheme)
    return np.real_if_close(_resolvent_at(scheme, p.s, np.atleast_1d(v), 1.0))


def resolvent_diag(p: PartitionSpec, scheme: QuadratureScheme | None = None, j: int = 1):
    """Resolvent kernel ``R(x_j, x_j)`` as a one-sided limit.

    The limit is from the right unless ``s_j = 1``, in which case it is
    taken from the left (multiplier ``1 - s_{j+1}``).
    """
    scheme = _scheme_for(p, scheme)
    _, mult = _side(p, j)
    r = _resolvent_at(scheme, p.s, p.x[j - 1], mult)
    return float(np.real(r)) if p.is_real else complex(r)


def dlogF_dx(p: PartitionSpec, scheme: QuadratureScheme | None = None, j: int = 1):
    """``d log F / d x_j = (s_{j+1} - s_j) / (1 - s_j) * R(x_j, x_j)``."""
    s_ext = p.s_ext
    if s_ext[j - 1] == s_ext[j]:
        if not 1 <= j <= p.k:
            raise ValidationError(f"interval index j must be in 1..{p.k}, got {j}")
        return 0.0
    scheme = _scheme_for(p, scheme)
    _, mult = _side(p, j)
    # R = mult * g, so the prefactor's denominator cancels
    g = _resolvent_at(scheme, p.s, p.x[j - 1], 1.0)
    out = (s_ext[j] - s_ext[j - 1]) * g
    return float(np.real(out)) if p.is_real else complex(out)


# -- s-derivatives by contour integration --------------------------------------


def contour_points(max_order: int) -> int:
    return max(32, 4 * max_order)


def taylor_coefficients(fn, n_points: int, radius: float = 1.0) -> np.ndarray:
    """Taylor coefficients at 0 of an entire ``fn`` from its values on a circle."""
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    values = np.array([fn(radius * np.exp(1j * t)) for t in theta])
    return np.fft.fft(values) / n_points / radius ** np.arange(n_points)


def s_derivatives(
    p: PartitionSpec,
    scheme: QuadratureScheme | None = None,
    j: int = 1,
    max_order: int = 10,
    radius: float = 1.0,
) -> list[float]:
    """``(1/i!) d^i F / d s_j^i`` at ``s_j = 0`` for ``i = 0..max_order``.

    These are the probabilities ``P(n_{A_j} = i)`` weighted by the remaining
    generating variables.
    """
    if not 1 <= max_order <= 20:
        raise ValidationError(f"max_order must be in 1..20, got {max_order}")
    if not radius > 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    if not 1 <= j <= p.k:
        raise ValidationError(f"interval index j must be in 1..{p.k}, got {j}")
    scheme = _scheme_for(p, scheme)
    base = np.array(p.s, dtype=complex)

    def det_at(z):
        s = base.copy()
        s[j - 1] = z
        return _log_det_value(scheme, s)

    coeffs = taylor_coefficients(det_at, contour_points(max_order), radius)[: max_order + 1]
    imag = np.max(np.abs(coeffs.imag))
    if imag > 1e-9:
        raise ToleranceError(f"imaginary residue {imag:.3e} in Taylor coefficients")
    return [float(c) for c in coeffs.real]


def _log_det_value(scheme: QuadratureScheme, s) -> complex:
    sign, logabs = np.linalg.slogdet(np.eye(scheme.N) - scheme.kernel * scheme.multipliers_for(s)[None, :])
    return sign * np.exp(logabs)


def mixed_taylor_coefficients(
    p: PartitionSpec,
    orders,
    scheme: QuadratureScheme | None = None,
    radius: float = 1.0,
) -> np.ndarray:
    """Tensor-product contour extraction of all mixed coefficients.

    Returns an array ``c`` with ``c[i_1, ..., i_k]`` the coefficient of
    ``prod s_j^{i_j}`` at ``s = 0`` for ``i_j <= orders[j]``.
    """
    scheme = _scheme_for(p, scheme)
    orders = [int(o) for o in orders]
    if len(orders) != p.k:
        raise ValidationError("one order per interval is required")
    npts = [contour_points(max(o, 1)) if o > 0 else 1 for o in orders]
    grids = [radius * np.exp(2j * np.pi * np.arange(n) / n) if n > 1 else np.zeros(1) for n in npts]
    values = np.empty(npts, dtype=complex)
    for idx in np.ndindex(*npts):
        s = np.array([g[i] for g, i in zip(grids, idx)])
        values[idx] = _log_det_value(scheme, s)
    coeffs = np.fft.fftn(values) / np.prod(npts)
    for axis, n in enumerate(npts):
        if n > 1:
            shape = [1] * len(npts)
            shape[axis] = n
            coeffs = coeffs / (radius ** np.arange(n)).reshape(shape)
    sl = tuple(slice(0, o + 1) for o in orders)
    coeffs = coeffs[sl]
    imag = np.max(np.abs(coeffs.imag))
    if imag > 1e-9:
        raise ToleranceError(f"imaginary residue {imag:.3e} in mixed Taylor coefficients")
    return coeffs.real
