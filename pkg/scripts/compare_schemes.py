"""Median L2 error per augmentation scheme on one problem, plus the ratio table.

    python3 scripts/compare_schemes.py heat1d --schemes identity power2 power3 --points 117
"""
import argparse
import json

from dapinn.bench import compare_schemes
from dapinn.config import ExperimentConfig, resolve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("problem")
    ap.add_argument("--schemes", nargs="+", default=["identity", "power2", "power3"])
    ap.add_argument("--points", type=int, default=117)
    ap.add_argument("--epochs", type=int, default=10000)
    ap.add_argument("--hidden", type=int, nargs="+", default=[20, 20, 20, 20])
    ap.add_argument("--distribution", default="uniform-random")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    base = resolve(ExperimentConfig(problem=args.problem, n_interior=args.points,
                                    epochs=args.epochs, hidden=tuple(args.hidden),
                                    distribution=args.distribution, log_every=args.epochs))
    cmp = compare_schemes(base, args.schemes, seeds=tuple(args.seeds), jobs=args.jobs,
                          out_dir=args.out)
    for s in cmp.ordering:
        print(f"{s:<24} median l2 {cmp.medians[s]:.3e}")
    print(json.dumps(cmp.ratios, indent=2))


if __name__ == "__main__":
    main()
