"""Run the shipped sweep configs and summarize each results file.

    python scripts/run_sweeps.py                 # every config, full trial counts
    python scripts/run_sweeps.py --trials 5      # quick smoke run
    python scripts/run_sweeps.py b_vs_noise timing
"""

import argparse
import dataclasses
from pathlib import Path

from activessc import harness

ROOT = Path(__file__).resolve().parent.parent
GROUP_BY = {
    "b_vs_noise": ["b", "noise_level"],
    "p_vs_noise": ["p", "noise_level"],
    "d_sweep_dim12": ["variant", "d"],
    "d_sweep_dim24": ["variant", "d"],
    "d_sweep_dim36": ["variant", "d"],
    "variants_vs_noise": ["variant", "noise_level"],
    "timing": ["variant", "noise_level", "samples_per_subspace"],
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="*", help=f"subset of {', '.join(GROUP_BY)}")
    ap.add_argument("--trials", type=int, default=None, help="override the trials per cell")
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--results", type=Path, default=ROOT / "results")
    args = ap.parse_args(argv)

    for name in args.names or GROUP_BY:
        spec = harness.load_config(ROOT / "configs" / f"{name}.cfg")
        if args.trials:
            spec = dataclasses.replace(spec, trials=args.trials)
        out = harness.run_sweep(spec, output=args.results / f"{name}.csv", jobs=args.jobs)
        summary = harness.summarize(out, GROUP_BY[name])
        print(f"{name}: {len(summary)} groups -> {out.with_name(out.stem + '_summary.csv')}")


if __name__ == "__main__":
    main()
