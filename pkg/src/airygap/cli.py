"""Command-line front end: ``airygap <det|pii|dist|verify|mc> [flags]``.

Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 tolerance
failure, 5 failed verification.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import re
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import (
    DistributionCurve,
    conditional_largest_cdf,
    gap_probability,
    joint_cdf,
    kth_largest_cdf,
    spacing_survival,
    sum_two_cdf,
)
from .errors import AiryGapError, ValidationError, VerificationFailed
from .fredholm import DEFAULT_L_TRUNC, DEFAULT_NODES_PER_UNIT, PartitionSpec, build_scheme, fredholm_det
from .painleve import DEFAULT_T, DEFAULT_TOL, solve_coupled_pii, tw_log_integral
from .rmt_montecarlo import MAX_N, MIN_N, MIN_SAMPLES, empirical_generating, sample_gue_batch
from .verification import SUITES

SCHEMA_VERSION = 1
LAWS = ("gap", "kth", "joint", "conditional", "spacing", "sum2")
CURVE_KIND = {"gap": "survival", "kth": "cdf", "joint": "cdf", "conditional": "cdf", "spacing": "survival", "sum2": "cdf"}


# -- parsing helpers ---------------------------------------------------------


def _float_list(flag: str):
    def parse(text: str) -> list[float]:
        try:
            vals = [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag}: expected comma-separated numbers, got {text!r}")
        if not vals or not all(math.isfinite(v) for v in vals):
            raise argparse.ArgumentTypeError(f"{flag}: expected finite numbers, got {text!r}")
        return vals

    return parse


def _int_list(flag: str):
    def parse(text: str) -> list[int]:
        try:
            return [int(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag}: expected comma-separated integers, got {text!r}")

    return parse


def _grid(text: str) -> np.ndarray:
    try:
        lo, hi, num = text.split(",")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--grid: expected 'lo,hi,num', got {text!r}")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi and 2 <= num <= 1000):
        raise argparse.ArgumentTypeError(f"--grid: need finite lo < hi and 2 <= num <= 1000, got {text!r}")
    return np.linspace(lo, hi, num)


def _partition(args, need_s: bool = True) -> PartitionSpec:
    if args.x is None:
        raise ValidationError("--x: required")
    if need_s and args.s is None:
        raise ValidationError("--s: required")
    s = args.s if args.s is not None else [0.0] * len(args.x)
    if len(s) != len(args.x):
        raise ValidationError(f"--x/--s: lengths differ ({len(args.x)} vs {len(s)})")
    if any(b >= a for a, b in zip(args.x, args.x[1:])):
        raise ValidationError(f"--x: must be strictly decreasing, got {args.x}")
    if any(not 0.0 <= v <= 1.0 for v in s):
        raise ValidationError(f"--s: weights must lie in [0, 1], got {s}")
    return PartitionSpec(tuple(args.x), tuple(s))


def _check_resolution(args):
    if not args.nodes >= 4:
        raise ValidationError(f"--nodes: must be >= 4, got {args.nodes}")
    if not args.L >= 8:
        raise ValidationError(f"--L: must be >= 8, got {args.L}")


def _check_pii(args):
    if not args.T >= 8:
        raise ValidationError(f"--T: must be >= 8, got {args.T}")
    if not 0 < args.tol < 1e-3:
        raise ValidationError(f"--tol: must be in (0, 1e-3), got {args.tol}")


# -- output ------------------------------------------------------------------


def version_string() -> str:
    """Package version plus ``git describe`` of the source tree when available."""
    here = Path(__file__).resolve().parent
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        desc = ""
    return f"{__version__}+{desc}" if desc else __version__


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_fmt(u) for u in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(u) for k, u in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(u) for u in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def render(meta: dict, records: list[dict], fmt: str) -> str:
    """Serialize a command result; deterministic for identical inputs."""
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "meta": _jsonable(meta), "records": _jsonable(records)}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key in sorted(meta):
        buf.write(f"# {key}: {_fmt(meta[key])}\n")
    columns: list[str] = []
    for rec in records:
        for key in rec:
            if key not in columns:
                columns.append(key)
    buf.write(",".join(columns) + "\n")
    for rec in records:
        buf.write(",".join(_fmt(rec.get(c, "")) for c in columns) + "\n")
    return buf.getvalue()


META_KEYS = {
    "det": ("x", "s", "nodes", "L"),
    "pii": ("x", "s", "T", "tol"),
    "dist": ("x", "s", "nodes", "L", "law", "grid_spec", "ell", "m"),
    "verify": ("suite", "T", "tol", "n", "samples", "seed", "method"),
    "mc": ("x", "s", "nodes", "L", "n", "samples", "seed", "method"),
}


def _meta(args, command: str, **extra) -> dict:
    meta = {"command": command, "version": version_string(), "schema_version": SCHEMA_VERSION}
    for key in META_KEYS[command]:
        val = getattr(args, key, None)
        if val is not None:
            meta[key] = val
    meta.update(extra)
    return meta


def _figure_path(out: str | None, suffix: str = "") -> Path | None:
    if not out:
        return None
    p = Path(out)
    return p.with_name(p.stem + suffix + ".png")


def _emit(args, meta, records, figure=None) -> None:
    text = render(meta, records, args.format)
    if args.out:
        Path(args.out).write_text(text)
        if figure is not None and not args.no_figures:
            figure(_figure_path(args.out))
    else:
        sys.stdout.write(text)


# -- commands ----------------------------------------------------------------


def cmd_det(args):
    _check_resolution(args)
    p = _partition(args)
    res = fredholm_det(p, build_scheme(p, args.nodes, args.L))
    rec = {"det": res.det, "log_det": res.log_det, "err_est": res.err_est, "N": res.N}
    _emit(args, _meta(args, "det"), [rec])


def cmd_pii(args):
    _check_pii(args)
    p = _partition(args)
    sol = solve_coupled_pii(p, args.T, args.tol)
    log_int = tw_log_integral(sol)
    w0, wp0 = sol(0.0)
    ratio = sol.boundary_ratio()
    records = [
        {
            "j": j + 1,
            "x_j": p.x[j],
            "s_j": p.s[j],
            "sigma_j": int(sol.sigma[j]),
            "w_j0": float(w0[j]),
            "wp_j0": float(wp0[j]),
            "u_j0_squared": float(sol.sigma[j] * w0[j] ** 2),
            "boundary_residual": float(abs(ratio[j] - 1.0)),
        }
        for j in range(p.k)
    ]
    meta = _meta(args, "pii", tw_log_integral=log_int, F=math.exp(log_int), anchor_shift=sol.anchor_shift)

    def figure(path):
        from .plotting import plot_pii

        plot_pii(sol, path)

    _emit(args, meta, records, figure)


def _law_values(args, grid: np.ndarray) -> np.ndarray:
    law = args.law
    kw = {"nodes_per_unit": args.nodes, "L_trunc": args.L}
    if law == "spacing":
        if np.any(grid < 0):
            raise ValidationError("--grid: spacing needs sigma >= 0")
        return np.atleast_1d(spacing_survival(grid, **kw))
    if law == "sum2":
        return np.atleast_1d(sum_two_cdf(grid, **kw))
    if law == "kth":
        if args.ell is None:
            raise ValidationError("--ell: required for law kth")
        return np.array([kth_largest_cdf(args.ell, t, **kw) for t in grid])
    if law == "gap":
        if args.x is None or len(args.x) != 1:
            raise ValidationError("--x: law gap needs the single left endpoint x2")
        x2 = args.x[0]
        if np.any(grid <= x2):
            raise ValidationError(f"--grid: law gap needs x1 > x2 = {x2}")
        return np.array([gap_probability(x2, t, **kw) for t in grid])
    if law == "conditional":
        if args.x is None or len(args.x) != 1 or args.s is None or len(args.s) != 1:
            raise ValidationError("--x/--s: law conditional needs a single x2 and a single thinning s")
        return np.array([conditional_largest_cdf(t, args.x[0], args.s[0], **kw) for t in grid])
    if law == "joint":
        if args.m is None or args.x is None or len(args.m) != len(args.x):
            raise ValidationError("--m/--x: law joint needs equal-length --m and --x")
        return np.array([joint_cdf(args.m, [v + t for v in args.x], **kw) for t in grid])
    raise ValidationError(f"--law: unknown law {law!r}")


def cmd_dist(args):
    _check_resolution(args)
    if args.grid is None:
        raise ValidationError("--grid: required")
    grid = args.grid
    values = _law_values(args, grid)
    curve = DistributionCurve(grid, values, CURVE_KIND[args.law], {"law": args.law}).check()
    abscissa = {"spacing": "sigma", "sum2": "sigma", "kth": "x", "gap": "x1", "conditional": "x1", "joint": "shift"}[args.law]
    records = [{abscissa: float(a), curve.kind: float(v)} for a, v in zip(curve.abscissae, curve.values)]

    def figure(path):
        from .plotting import plot_curve

        plot_curve(curve, path)

    _emit(args, _meta(args, "dist", kind=curve.kind), records, figure)


def cmd_verify(args):
    suite = args.suite
    if suite == "identity":
        _check_pii(args)
        rep = SUITES[suite](T=args.T, tol=args.tol)
    elif suite == "montecarlo":
        _check_mc(args)
        rep = SUITES[suite](n=args.n, n_samples=args.samples, seed=args.seed, method=args.method)
    else:
        rep = SUITES[suite]()
    records = [{k: v for k, v in c.items()} for c in rep.cases]
    meta = _meta(args, "verify", passed=rep.passed, n_cases=len(rep.cases), n_failed=rep.n_failed)

    figure = None
    if suite == "reductions":
        def figure(path):
            from .plotting import plot_reductions

            plot_reductions(rep, path)
    elif suite in ("identity", "hankel"):
        def figure(path):
            from .plotting import plot_identity

            plot_identity(rep, path)

    _emit(args, meta, records, figure)
    if not rep.passed:
        raise VerificationFailed(f"verify {suite}: {rep.n_failed} of {len(rep.cases)} cases failed")


def _check_mc(args):
    if not MIN_N <= args.n <= MAX_N:
        raise ValidationError(f"--n: must be in [{MIN_N}, {MAX_N}], got {args.n}")
    if args.samples < MIN_SAMPLES:
        raise ValidationError(f"--samples: must be >= {MIN_SAMPLES}, got {args.samples}")


def cmd_mc(args):
    _check_mc(args)
    p = _partition(args)
    samples = sample_gue_batch(args.n, args.samples, args.seed, args.method)
    target = fredholm_det(p, build_scheme(p, args.nodes, args.L)).det
    rep = empirical_generating(samples, p, target)

    def figure(path):
        from .plotting import plot_edge_histogram

        plot_edge_histogram([smp.rescaled()[0] for smp in samples], path)

    _emit(args, _meta(args, "mc"), [rep.as_dict()], figure)


COMMANDS = {"det": cmd_det, "pii": cmd_pii, "dist": cmd_dist, "verify": cmd_verify, "mc": cmd_mc}


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of flag defaults (keys are flag names without dashes)")
    common.add_argument("--x", type=_float_list("--x"), help="comma-separated decreasing points")
    common.add_argument("--s", type=_float_list("--s"), help="comma-separated weights in [0, 1]")
    common.add_argument("--nodes", type=float, default=DEFAULT_NODES_PER_UNIT, help="quadrature nodes per unit length")
    common.add_argument("--L", type=float, default=DEFAULT_L_TRUNC, help="truncation length beyond x_1")
    common.add_argument("--T", type=float, default=DEFAULT_T, help="anchoring point of the Painleve solver")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="integrator tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="output file; figures are written next to it")
    common.add_argument("--no-figures", action="store_true", help="skip figure files")

    parser = _Parser(prog="airygap", description="Multi-interval Airy determinants and their Painleve representation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("det", parents=[common], help="Fredholm determinant F(x; s)")
    sub.add_parser("pii", parents=[common], help="coupled Painleve II solution summary")

    d = sub.add_parser("dist", parents=[common], help="distribution curve of one law")
    d.add_argument("--law", choices=LAWS, required=True)
    d.add_argument("--grid", type=_grid, help="lo,hi,num of the abscissa grid")
    d.add_argument("--ell", type=int, help="order of the particle (law kth)")
    d.add_argument("--m", type=_int_list("--m"), help="particle orders (law joint)")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=tuple(SUITES))
    v.add_argument("--n", type=int, default=200, help="matrix size (montecarlo)")
    v.add_argument("--samples", type=int, default=10_000, help="number of matrices (montecarlo)")
    v.add_argument("--method", choices=("dense", "tridiagonal"), default="dense")

    m = sub.add_parser("mc", parents=[common], help="GUE Monte Carlo estimate of F(x; s)")
    m.add_argument("--n", type=int, default=200)
    m.add_argument("--samples", type=int, default=10_000)
    m.add_argument("--method", choices=("dense", "tridiagonal"), default="dense")
    return parser


def _apply_config(parser, args, argv):
    if not args.config:
        return args
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise ValidationError(f"--config: cannot read {args.config}: {exc}")
    if not isinstance(data, dict):
        raise ValidationError("--config: top level must be an object")
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, val in data.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValidationError(f"--config: unknown key {key!r}")
        if dest in explicit:
            continue
        if dest in ("x", "s") and isinstance(val, (int, float)):
            val = [float(val)]
        if dest == "grid" and isinstance(val, str):
            val = _grid(val)
        setattr(args, dest, val)
    return args


_NEGATIVE_LIST = re.compile(r"^-[0-9.]")


def _join_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--grid -1,1,3`` as ``--grid=-1,1,3`` so argparse does not see a flag."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--") and "=" not in a and i + 1 < len(argv) and _NEGATIVE_LIST.match(argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _apply_config(parser, args, argv)
        if getattr(args, "grid", None) is not None:
            g = args.grid
            args.grid_spec = f"{g[0]:.17g},{g[-1]:.17g},{g.size}"
        COMMANDS[args.command](args)
    except AiryGapError as exc:
        print(f"airygap {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except argparse.ArgumentTypeError as exc:
        print(f"airygap {args.command}: ValidationError: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
