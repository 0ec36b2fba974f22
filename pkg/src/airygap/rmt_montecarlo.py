"""GUE sampling, edge rescaling and exact finite-n generating functions.

Convention: the GUE density is proportional to ``exp(-tr H^2 / 2)``, i.e.
real diagonal entries N(0, 1) and off-diagonal entries with independent
N(0, 1/2) real and imaginary parts.  The spectrum edge is then at ``2 sqrt(n)``
and ``x = n^{1/6} (lambda - 2 sqrt(n))`` converges to the Airy point process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import ConditioningError, ValidationError
from .fredholm import PartitionSpec, fredholm_det
from .special_functions import composite_gauss_legendre, hermite_functions

MIN_N, MAX_N = 10, 2000
MAX_FINITE_N = 400
MAX_HANKEL_N = 12
HANKEL_REL_TOL = 1e-8
MIN_SAMPLES = 1000
TAIL_MARGIN = 12.0
PANEL_WIDTH = 0.25
PANEL_NODES = 20


@dataclass(frozen=True)
class GUESample:
    n: int
    eigenvalues: np.ndarray  # decreasing
    seed: tuple  # (entropy, spawn_key) of the generating SeedSequence

    def rescaled(self) -> np.ndarray:
        return edge_rescale(self.eigenvalues, self.n)


@dataclass(frozen=True)
class MCEnsembleReport:
    estimate: float
    std_error: float
    n_samples: int
    target: float
    z_score: float

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "target": self.target,
            "z_score": self.z_score,
        }


def edge_rescale(lam, n: int):
    """``x = n^{1/6} (lambda - 2 sqrt(n))``."""
    return n ** (1.0 / 6.0) * (np.asarray(lam, dtype=float) - 2.0 * math.sqrt(n))


def edge_unscale(x, n: int):
    """Inverse of :func:`edge_rescale`."""
    return 2.0 * math.sqrt(n) + np.asarray(x, dtype=float) * n ** (-1.0 / 6.0)


def _check_n(n):
    if int(n) != n or not MIN_N <= n <= MAX_N:
        raise ValidationError(f"n must be an integer in [{MIN_N}, {MAX_N}], got {n}")
    return int(n)


def _eigenvalues(n: int, rng: np.random.Generator, method: str) -> np.ndarray:
    if method == "dense":
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((n, n))
        h = np.triu(a, 1) + 1j * np.triu(b, 1)
        h = (h + h.conj().T) / math.sqrt(2.0) + np.diag(np.diag(a))
        ev = np.linalg.eigvalsh(h)
    elif method == "tridiagonal":
        # same eigenvalue law: Householder reduction of the dense model
        diag = rng.standard_normal(n)
        off = np.sqrt(rng.chisquare(2.0 * np.arange(n - 1, 0, -1))) / math.sqrt(2.0)
        ev = eigvalsh_tridiagonal(diag, off)
    else:
        raise ValidationError(f"unknown sampling method {method!r}")
    return ev[::-1].copy()


def sample_gue(n: int, seed=0, method: str = "dense") -> GUESample:
    """One GUE matrix of size ``n``; ``seed`` is an int or a SeedSequence."""
    n = _check_n(n)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    ev = _eigenvalues(n, np.random.default_rng(ss), method)
    ev.setflags(write=False)
    return GUESample(n=n, eigenvalues=ev, seed=(ss.entropy, tuple(ss.spawn_key)))


def sample_gue_batch(n: int, n_samples: int, seed=0, method: str = "dense") -> list[GUESample]:
    """``n_samples`` independent matrices from child streams of ``seed``.

    Sample ``i`` depends only on ``(seed, i)``, not on the batch size.
    """
    if int(n_samples) != n_samples or n_samples < 1:
        raise ValidationError(f"n_samples must be a positive integer, got {n_samples}")
    children = np.random.SeedSequence(seed).spawn(int(n_samples))
    return [sample_gue(n, child, method) for child in children]


def _occupancies(samples, x) -> np.ndarray:
    """Counts ``n_{A_j}`` per sample, shape ``(n_samples, k)``."""
    edges = np.concatenate([[np.inf], np.asarray(x, dtype=float)])
    counts = np.empty((len(samples), len(x)), dtype=np.int64)
    for i, smp in enumerate(samples):
        r = smp.rescaled()
        for j in range(len(x)):
            counts[i, j] = np.count_nonzero((r > edges[j + 1]) & (r < edges[j]))
    return counts


def empirical_generating(samples, p: PartitionSpec, target: float | None = None) -> MCEnsembleReport:
    """Monte Carlo mean of ``prod_j s_j^{n_{A_j}}`` over the rescaled spectra."""
    if len(samples) < MIN_SAMPLES:
        raise ValidationError(f"need at least {MIN_SAMPLES} samples, got {len(samples)}")
    counts = _occupancies(samples, p.x)
    s = np.asarray(p.s, dtype=float)
    values = np.prod(np.where(counts == 0, 1.0, s[None, :] ** counts), axis=1)
    return _report(values, fredholm_det(p).det if target is None else target)


def _report(values: np.ndarray, target: float) -> MCEnsembleReport:
    est = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(values.size))
    if se > 0:
        z = (est - target) / se
    else:
        z = 0.0 if est == target else math.copysign(math.inf, est - target)
    return MCEnsembleReport(estimate=est, std_error=se, n_samples=int(values.size), target=float(target), z_score=float(z))


def empirical_probability(indicator, target: float) -> MCEnsembleReport:
    """Report for a boolean per-sample event against an analytic probability."""
    return _report(np.asarray(indicator, dtype=float), target)


# -- exact finite-n generating function -------------------------------------


def _check_partition(lam, s):
    lam = tuple(float(v) for v in np.atleast_1d(lam))
    s = tuple(float(v) for v in np.atleast_1d(s))
    return PartitionSpec(lam, s)


def finite_n_det(n: int, lam, s) -> float:
    """``E prod_j s_j^{n_{A_j}}`` for GUE of size ``n``, exactly.

    ``A_j = (lambda_j, lambda_{j-1})`` in the unscaled spectrum.  The
    correlation kernel has rank ``n``, so this is ``det(I_n - M)`` with
    ``M_lm = sum_j (1 - s_j) int_{A_j} phi_l phi_m`` over orthonormal
    Hermite functions ``phi_l = p_l exp(-x^2/4)``.
    """
    if int(n) != n or not 1 <= n <= MAX_FINITE_N:
        raise ValidationError(f"n must be an integer in [1, {MAX_FINITE_N}], got {n}")
    n = int(n)
    p = _check_partition(lam, s)
    top = max(p.x[0], 2.0 * math.sqrt(n)) + TAIL_MARGIN
    edges = (top,) + p.x
    m = np.zeros((n, n))
    for j in range(p.k):
        weight = 1.0 - p.s[j]
        if weight == 0.0:
            continue
        a, b = edges[j + 1], edges[j]
        panels = max(1, int(math.ceil((b - a) / PANEL_WIDTH)))
        t, w = composite_gauss_legendre(np.linspace(a, b, panels + 1), PANEL_NODES)
        phi = hermite_functions(n, t)
        m += weight * (phi * w[None, :]) @ phi.T
    sign, logdet = np.linalg.slogdet(np.eye(n) - m)
    return float(sign * math.exp(logdet))


# -- Hankel determinant route -------------------------------------------------


def gaussian_moment(p: int) -> float:
    """``int x^p exp(-x^2/2) dx`` over the real line."""
    if p % 2:
        return 0.0
    return math.prod(range(p - 1, 0, -2)) * math.sqrt(2.0 * math.pi)


def _interval_moments(a: float, b: float, max_p: int) -> np.ndarray:
    """``int_a^b x^p exp(-x^2/2) dx`` for ``p = 0..max_p`` (``a`` may be -inf).

    Upward recurrence ``I_p = [-x^{p-1} e^{-x^2/2}]_a^b + (p-1) I_{p-2}``
    started from the error function; the region right of 0 is integrated
    as a difference of upper tails and the left one by reflection, so no
    step subtracts nearly equal quantities.
    """
    if a >= 0:
        return _tail_moments(a, max_p) - _tail_moments(b, max_p)
    if b <= 0:
        sign = (-1.0) ** np.arange(max_p + 1)
        return sign * (_tail_moments(-b, max_p) - _tail_moments(-a, max_p))
    return _interval_moments(a, 0.0, max_p) + _interval_moments(0.0, b, max_p)


def _tail_moments(a: float, max_p: int) -> np.ndarray:
    """``int_a^inf x^p exp(-x^2/2) dx`` for ``a >= 0`` (all terms positive)."""
    out = np.zeros(max_p + 1)
    if math.isinf(a):
        return out
    g = math.exp(-0.5 * a * a)
    out[0] = math.sqrt(0.5 * math.pi) * math.erfc(a / math.sqrt(2.0))
    if max_p >= 1:
        out[1] = g
    for p in range(2, max_p + 1):
        out[p] = a ** (p - 1) * g + (p - 1) * out[p - 2]
    return out


def gaussian_hankel_det(n: int) -> float:
    """``det[int x^{i+j} e^{-x^2/2}]_{i,j<n} = (2 pi)^{n/2} prod_{j<n} j!``."""
    return (2.0 * math.pi) ** (n / 2.0) * math.prod(math.factorial(j) for j in range(n))


def hankel_ratio(n: int, lam, s) -> float:
    """Ratio of Hankel determinants of the piecewise and the plain Gaussian weight.

    The piecewise weight is ``exp(-x^2/2) s_j`` on ``(lambda_j, lambda_{j-1})``
    and ``exp(-x^2/2)`` below ``lambda_k``.  Raises ConditioningError when
    the numerator's estimated relative error exceeds ``1e-8``.
    """
    if int(n) != n or not 1 <= n <= MAX_HANKEL_N:
        raise ValidationError(f"n must be an integer in [1, {MAX_HANKEL_N}], got {n}")
    n = int(n)
    p = _check_partition(lam, s)
    max_p = 2 * n - 2
    edges = (math.inf,) + p.x + (-math.inf,)
    weights = p.s + (1.0,)
    mu = np.zeros(max_p + 1)
    for j, wj in enumerate(weights):
        if wj != 0.0:
            mu += wj * _interval_moments(edges[j + 1], edges[j], max_p)
    h = mu[np.add.outer(np.arange(n), np.arange(n))]
    # equilibrate with the Gaussian diagonal so the condition estimate is meaningful
    d = 1.0 / np.sqrt([gaussian_moment(2 * i) for i in range(n)])
    hs = h * np.outer(d, d)
    sign, logdet = np.linalg.slogdet(hs)
    if sign == 0:
        raise ConditioningError("moment matrix is singular")
    rel_err = n * np.finfo(float).eps * np.linalg.cond(hs)
    if rel_err > HANKEL_REL_TOL:
        raise ConditioningError(f"estimated relative error {rel_err:.2e} of the moment determinant exceeds {HANKEL_REL_TOL:g}")
    log_ratio = logdet + 2.0 * np.sum(np.log(1.0 / d)) - math.log(gaussian_hankel_det(n))
    return float(sign * math.exp(log_ratio))
