"""Verification suites shared by the CLI and the test-suite.

Each suite returns a :class:`SuiteReport` with one record per case; a case
carries its own measured numbers, its threshold and a pass flag.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .fredholm import PartitionSpec, fredholm_det
from .painleve import (
    DEFAULT_T,
    DEFAULT_TOL,
    EXPECTED_RATES,
    boundary_deviation,
    solve_coupled_pii,
    tw_log_integral,
    verify_reduction,
)
from .rmt_montecarlo import empirical_generating, finite_n_det, hankel_ratio, sample_gue_batch

IDENTITY_TOL = 1e-6
HANKEL_TOL = 1e-10
MC_SIGMAS = 3.0
S_LATTICE = (0.0, 0.3, 0.7, 1.0)
X_BOTTOM = (-2.0, -1.0, 0.0, 1.0)

REDUCTION_CASES = (
    ("s-collision", PartitionSpec((1.0, 0.0), (0.3, 0.7)), (1e-1, 1e-2, 1e-3, 1e-4), 1),
    ("x-collision", PartitionSpec((1.0, 0.0), (0.3, 0.7)), (0.2, 0.1, 0.05, 0.025), 2),
    ("x1-to-infinity", PartitionSpec((4.0, 0.0), (0.3, 0.7)), (4.0, 9.0, 16.0, 25.0), 1),
)

MC_CONFIGS = (
    ("largest", PartitionSpec((0.0,), (0.0,))),
    ("gap", PartitionSpec((1.0, -1.0), (1.0, 0.0))),
    ("thinning", PartitionSpec((0.0, -1.0), (0.0, 0.5))),
    ("thinned-largest", PartitionSpec((-1.0,), (0.3,))),
    ("three-interval", PartitionSpec((1.0, 0.0, -1.0), (0.3, 1.0, 0.0))),
)


@dataclass
class SuiteReport:
    suite: str
    cases: list[dict] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.cases)

    @property
    def n_failed(self) -> int:
        return sum(not c["passed"] for c in self.cases)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "elapsed": self.elapsed, "cases": self.cases}


def identity_grid():
    """Partitions of the identity grid.

    ``k = 1, 2, 3``; the lowest point ``x_k`` in {-2, -1, 0, 1} with unit
    spacing above it; weights from {0, 0.3, 0.7, 1} with consecutive values
    distinct, including ``s_k != s_{k+1} = 1``.
    """
    out = []
    for k in (1, 2, 3):
        for xk in X_BOTTOM:
            x = tuple(xk + (k - 1 - i) for i in range(k))
            for s in itertools.product(S_LATTICE, repeat=k):
                ext = s + (1.0,)
                if all(a != b for a, b in zip(ext, ext[1:])):
                    out.append(PartitionSpec(x, s))
    return out


def run_identity(T: float = DEFAULT_T, tol: float = DEFAULT_TOL, threshold: float = IDENTITY_TOL) -> SuiteReport:
    rep = SuiteReport("identity")
    t0 = time.perf_counter()
    for p in identity_grid():
        lhs = tw_log_integral(solve_coupled_pii(p, T, tol))
        rhs = fredholm_det(p, estimate_error=False).log_det
        err = abs(lhs - rhs)
        rep.cases.append(
            {"x": list(p.x), "s": list(p.s), "painleve": lhs, "fredholm": rhs, "error": err, "threshold": threshold, "passed": bool(err <= threshold)}
        )
    rep.elapsed = time.perf_counter() - t0
    return rep


def run_boundary(T_values=(8.0, 12.0), thresholds=(1e-4, 1e-6)) -> SuiteReport:
    rep = SuiteReport("boundary")
    t0 = time.perf_counter()
    for p in identity_grid():
        for T, thr in zip(T_values, thresholds):
            dev = float(np.max(boundary_deviation(p, T)))
            rep.cases.append({"x": list(p.x), "s": list(p.s), "T": T, "deviation": dev, "threshold": thr, "passed": bool(dev <= thr)})
    rep.elapsed = time.perf_counter() - t0
    return rep


def run_reductions(cases=REDUCTION_CASES) -> SuiteReport:
    rep = SuiteReport("reductions")
    t0 = time.perf_counter()
    for mode, p, deltas, j in cases:
        r = verify_reduction(p, mode, deltas, j=j)
        rec = r.as_dict()
        rec.update({"x": list(p.x), "s": list(p.s), "expected": EXPECTED_RATES[mode]})
        rep.cases.append(rec)
    rep.elapsed = time.perf_counter() - t0
    return rep


def random_partitions(count: int, seed: int, x_range=(-2.0, 3.0), k_max: int = 3):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        k = int(rng.integers(1, k_max + 1))
        x = np.sort(rng.uniform(*x_range, size=k))[::-1]
        s = rng.uniform(0.0, 1.0, size=k)
        out.append(PartitionSpec(tuple(float(v) for v in x), tuple(float(v) for v in s)))
    return out


def run_hankel(ns=(4, 6, 8), per_n: int = 3, seed: int = 2024, threshold: float = HANKEL_TOL) -> SuiteReport:
    rep = SuiteReport("hankel")
    t0 = time.perf_counter()
    for n in ns:
        for p in random_partitions(per_n, seed + n):
            a = finite_n_det(n, p.x, p.s)
            b = hankel_ratio(n, p.x, p.s)
            err = abs(a - b)
            rep.cases.append(
                {"n": n, "lambda": list(p.x), "s": list(p.s), "finite_n": a, "hankel": b, "error": err, "threshold": threshold, "passed": bool(err <= threshold)}
            )
    rep.elapsed = time.perf_counter() - t0
    return rep


def run_montecarlo(
    n: int = 200, n_samples: int = 10_000, seed: int = 0, method: str = "dense", configs=MC_CONFIGS, samples=None
) -> SuiteReport:
    rep = SuiteReport("montecarlo")
    t0 = time.perf_counter()
    if samples is None:
        samples = sample_gue_batch(n, n_samples, seed, method)
    for name, p in configs:
        r = empirical_generating(samples, p)
        rec = {"config": name, "x": list(p.x), "s": list(p.s), "n": samples[0].n}
        rec.update(r.as_dict())
        rec["passed"] = bool(abs(r.z_score) <= MC_SIGMAS)
        rep.cases.append(rec)
    rep.elapsed = time.perf_counter() - t0
    return rep


SUITES = {
    "identity": run_identity,
    "reductions": run_reductions,
    "hankel": run_hankel,
    "montecarlo": run_montecarlo,
}
