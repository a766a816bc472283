"""OMP-SSC vs A-OMP-SSC on random subsets of a labelled image dataset.

The data CSV holds one vectorized image per column (e.g. 48x42 face crops,
38 subjects) and the labels file one subject id per line. For each k, every
trial draws k subjects at random and clusters their images with both methods.

    python scripts/face_subsets.py faces.csv labels.txt --k 2 3 5 8 10 --trials 20
"""

import argparse

from activessc import AlgorithmParams, Variant, load_matrix
from activessc.harness import subset_trials


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("data")
    ap.add_argument("labels")
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3, 5, 8, 10])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--b", type=float, default=0.5)
    ap.add_argument("--p", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    data = load_matrix(args.data, args.labels)
    params = {
        "OMP-SSC": AlgorithmParams.omp(d=args.d),
        "A-OMP-SSC": AlgorithmParams(Variant.A_OMP_SSC, d=args.d, b=args.b, p=args.p),
    }
    print("k  " + "  ".join(f"{name:>10}" for name in params))
    for k in args.k:
        errs = subset_trials(data, k, args.trials, params, seed=args.seed)
        print(f"{k:<3}" + "  ".join(f"{100 * errs[name].mean():9.2f}%" for name in params))


if __name__ == "__main__":
    main()
