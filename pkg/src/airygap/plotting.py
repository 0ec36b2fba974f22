"""Figures written next to CLI output files.

Agg backend only; PNGs are saved without the software tag so identical
inputs give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "legend.frameon": False,
    "path.simplify": False,
}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    return path


def plot_curve(curve, path, title: str = "") -> Path:
    """A DistributionCurve as a line plot."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.plot(curve.abscissae, curve.values, marker=".", ms=4)
        ax.set_xlabel("abscissa")
        ax.set_ylabel(curve.kind)
        if curve.kind != "density":
            ax.set_ylim(-0.02, 1.02)
        ax.set_title(title or curve.meta.get("law", ""))
        fig.tight_layout()
        return _save(fig, path)


def plot_pii(sol, path) -> Path:
    """``u_j^2`` of a coupled Painleve solution on ``[0, T]``."""
    xi = np.linspace(0.0, sol.T, 400)
    u2 = sol.u_squared(xi)
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for j in range(sol.k):
            ax.plot(xi, u2[j], label=f"u_{j + 1}^2  (x={sol.p.x[j]:g}, s={sol.p.s[j]:g})")
        ax.axhline(0.0, color="0.5", lw=0.8)
        ax.set_xlabel("xi")
        ax.set_ylabel("u_j(xi)^2")
        ax.legend(fontsize=8)
        fig.tight_layout()
        return _save(fig, path)


def plot_reductions(report, path) -> Path:
    """Log-log error against gap for each reduction mode."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for case in report.cases:
            g = np.asarray(case["gaps"])
            e = np.asarray(case["errors"])
            ax.loglog(g, e, marker="o", label=f"{case['mode']}: slope {case['slope']:.3f} (expect {case['expected']:g})")
            ax.loglog(g, e[0] * (g / g[0]) ** case["expected"], ls=":", color="0.5")
        ax.set_xlabel("gap")
        ax.set_ylabel("sup error on xi in {0, 1, 2}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        return _save(fig, path)


def plot_identity(report, path) -> Path:
    """Per-case absolute difference of the two routes."""
    err = np.array([max(c["error"], 1e-17) for c in report.cases])
    thr = report.cases[0]["threshold"] if report.cases else 0.0
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.semilogy(np.arange(err.size), err, ".", ms=5)
        if thr:
            ax.axhline(thr, color="C3", ls="--", label=f"threshold {thr:g}")
            ax.legend()
        ax.set_xlabel("case")
        ax.set_ylabel("|difference|")
        ax.set_title(report.suite)
        fig.tight_layout()
        return _save(fig, path)


def plot_edge_histogram(rescaled_max, path, tw_x=None, tw_density=None) -> Path:
    """Histogram of rescaled largest eigenvalues, optionally against a density."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.hist(rescaled_max, bins=60, density=True, alpha=0.6, label="GUE samples")
        if tw_x is not None:
            ax.plot(tw_x, tw_density, color="C3", label="limit density")
        ax.set_xlabel("n^(1/6) (lambda_1 - 2 sqrt(n))")
        ax.set_ylabel("density")
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)
