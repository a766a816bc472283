"""Command line entry point: ``activessc {sweep,summarize,single}``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness
from .datagen import DimensionMismatch, ParseError, ZeroColumn
from .pipeline import AlgorithmParams, Variant


def _sweep(args):
    spec = harness.load_config(args.config)
    out = harness.run_sweep(spec, output=args.out, jobs=args.jobs)
    print(f"wrote {out} ({len(spec.cells())} cells x {spec.trials} trials)")


def _summarize(args):
    group_by = [g for part in args.group_by for g in part.split(",") if g]
    summary = harness.summarize(args.file, group_by, output=args.out)
    for row in summary:
        err = row.stats.get("error_rate", (float("nan"), float("nan")))
        print(" ".join(row.key), f"n={row.count}", f"error={err[0]:.4f}+-{err[1]:.4f}")


def _single(args):
    variant = Variant(args.variant)
    b, p = args.b, args.p
    if variant is not Variant.A_OMP_SSC:
        b, p = 0.0, 0.0
    params = AlgorithmParams(variant, d=args.d, b=b, p=p, lam=args.lam, k=args.k, seed=args.seed)
    record = harness.run_single(args.data, args.labels, params)
    labels = record.pop("labels")
    for key, value in record.items():
        print(f"{key}: {harness.fmt(value)}")
    if args.out:
        np.savetxt(args.out, labels, fmt="%d")
        print(f"labels: written to {args.out}")
    else:
        print("labels:", " ".join(str(int(v)) for v in labels))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="activessc", description=__doc__)
    ap.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run a Monte Carlo sweep from a config file")
    sw.add_argument("config")
    sw.add_argument("--out", default=None, help="results CSV (overrides the config's output)")
    sw.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    sw.set_defaults(func=_sweep)

    sm = sub.add_parser("summarize", help="mean/stderr of a results file per group")
    sm.add_argument("file")
    sm.add_argument("--group-by", action="append", required=True, help="comma-separated axis names")
    sm.add_argument("--out", default=None)
    sm.set_defaults(func=_summarize)

    si = sub.add_parser("single", help="cluster one external CSV data matrix")
    si.add_argument("data")
    si.add_argument("--labels", default=None)
    si.add_argument("--variant", default=Variant.A_OMP_SSC.value, choices=[v.value for v in Variant])
    si.add_argument("--b", type=float, default=1.0)
    si.add_argument("--p", type=float, default=0.8)
    si.add_argument("--d", type=int, default=3)
    si.add_argument("--k", type=int, default=None)
    si.add_argument("--lam", type=float, default=None)
    si.add_argument("--seed", type=int, default=0)
    si.add_argument("--out", default=None, help="write predicted labels here")
    si.set_defaults(func=_single)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (harness.ConfigError, ParseError, DimensionMismatch, ZeroColumn, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
