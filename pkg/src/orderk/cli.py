"""Command line interface: ``orderk {expect,simulate,compare,mosaic,constants}``.

Exit codes: 0 ok, 1 a comparison failed (with ``--strict``), 2 usage or
domain error, 3 missing constants, 4 bias flag (with ``--strict``).
"""

from __future__ import annotations

import argparse
import json
import math
import subprocess
import sys
from pathlib import Path

from . import __version__
from .closed_form import CTable, ModelParams, expected_area, expected_cell_count
from .errors import BiasFlag, MissingConstant, OrderKError
from .geometry import jitter, read_points_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_MISSING, EXIT_BIAS = 0, 1, 2, 3, 4


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _radius(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError("radius must be nonnegative")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _experiment_flags(p):
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--k", type=_positive_int, nargs="+", default=[1, 2, 3])
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--L", type=float, default=30.0, help="side of the periodic box")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r0", type=_radius, default=math.inf)
    p.add_argument("--r-max", type=float, default=None,
                   help="fixed enumeration cutoff (default: covering bound, provably complete)")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--ctable", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None, help="report JSON")
    p.add_argument("--csv", type=Path, default=None, help="report CSV")
    p.add_argument("--strict", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orderk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"orderk {version_string()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expect", help="evaluate the closed-form expectations")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--ell", type=int, help="skeleton dimension (expected area per unit volume)")
    which.add_argument("--j", type=int, help="cell dimension (expected count per unit volume)")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--r0", type=_radius, default=math.inf)
    p.add_argument("--ctable", type=Path, default=None)

    for name, text in (("simulate", "Monte Carlo estimates on a torus"),
                       ("compare", "Monte Carlo estimates with z-scores against theory")):
        _experiment_flags(sub.add_parser(name, help=text))

    p = sub.add_parser("mosaic", help="order-k Delaunay mosaic of a CSV point file")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--box", type=float, default=None, help="periodic box side (default: unbounded)")
    p.add_argument("--jitter", type=float, default=0.0, metavar="SIGMA")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("constants", help="estimate the C-table at k = 1")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--L", type=float, default=30.0)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--strict", action="store_true")
    return parser


def _cmd_expect(args) -> int:
    params = ModelParams(args.n, args.k, args.rho, 1.0, args.r0)
    if args.ell is not None:
        value = expected_area(args.ell, params)
        label = f"area ell={args.ell}"
    else:
        ctable = CTable.load(args.ctable) if args.ctable else None
        value = expected_cell_count(args.j, params, ctable)
        label = f"cells j={args.j}"
    print(f"n={args.n} k={args.k} rho={args.rho:g} r0={args.r0:g} {label}: {value:.12g}")
    return EXIT_OK


def _config(args):
    from .stochastic import ExperimentConfig

    return ExperimentConfig(n=args.n, orders=tuple(args.k), rho=args.rho, L=args.L, reps=args.reps,
                            r0=args.r0, seed=args.seed, r_max=args.r_max, threads=args.threads)


def _cmd_experiment(args) -> int:
    from .stochastic import predict_intervals, run_experiment

    ctable = CTable.load(args.ctable) if args.ctable else None
    report = run_experiment(_config(args), ctable, strict_bias=False)
    report.version = version_string()
    if args.command == "compare" and ctable is not None:
        report.records.update(predict_intervals(report, ctable))
    if args.out:
        report.save(args.out)
    if args.csv:
        report.save_csv(args.csv)
    failed = False
    for rec in report.records.values():
        line = f"{rec.name:28s} mean={rec.mean:.6g} se={rec.stderr:.3g}"
        if args.command == "compare":
            if rec.theory is None:
                continue
            verdict = "PASS" if rec.passed else "FAIL"
            failed |= not rec.passed
            line += f" theory={rec.theory:.6g} z={rec.z:+.2f} {verdict}"
        print(line)
    bad = {k: v for k, v in report.violations.items() if v and not k.startswith("intervals_checked")}
    if bad:
        print(f"invariant violations: {bad}")
        failed = True
    if report.biased:
        print("BIAS: an interval radius came within 1% of the cutoff")
        if args.strict:
            return EXIT_BIAS
    return EXIT_FAIL if (failed and args.strict) else EXIT_OK


def _cmd_mosaic(args) -> int:
    from .mosaic import audit_cutoff, build_mosaic

    X = read_points_csv(args.input, args.box)
    if args.jitter > 0:
        X = jitter(X, args.jitter, args.seed)
    mosaic = build_mosaic(X, args.k, args.r_max)
    counts = mosaic.counts()
    print(f"{len(mosaic.intervals)} intervals, {len(mosaic.cells)} cells, by dimension {counts}")
    config = {"input": str(args.input), "k": args.k, "r_max": args.r_max, "box": args.box,
              "jitter": args.jitter, "seed": args.seed}
    if args.out:
        mosaic.save(args.out, config=config, version=version_string())
    if not audit_cutoff(mosaic.intervals, mosaic.r_max):
        print("BIAS: an interval radius came within 1% of the cutoff")
        return EXIT_BIAS
    return EXIT_OK


def _cmd_constants(args) -> int:
    from .stochastic import ExperimentConfig, estimate_ctable

    config = ExperimentConfig(n=args.n, orders=(1,), rho=args.rho, L=args.L, reps=args.reps,
                              seed=args.seed, r_max=args.r_max, threads=args.threads)
    table, report = estimate_ctable(args.n, config)
    table.save(args.out, config=report.config.to_json(), version=version_string())
    for (v, u), e in sorted(table.entries.items()):
        print(f"C[v={v}, u={u}, n={args.n}] = {e.value:.6g} +- {e.stderr:.2g}")
    if report.biased and args.strict:
        return EXIT_BIAS
    return EXIT_OK


COMMANDS = {
    "expect": _cmd_expect,
    "simulate": _cmd_experiment,
    "compare": _cmd_experiment,
    "mosaic": _cmd_mosaic,
    "constants": _cmd_constants,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except MissingConstant as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except BiasFlag as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BIAS
    except (OrderKError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
