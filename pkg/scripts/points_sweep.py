"""L2 error against collocation point count for PINN and DaPINN (CSV per scheme).

    python3 scripts/points_sweep.py --problem poisson1d --points 11 15 19 23 --out runs/points
"""
import argparse
from pathlib import Path

from dapinn.bench import SweepConfig, run_sweep
from dapinn.config import ExperimentConfig, resolve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problem", default="poisson1d")
    ap.add_argument("--schemes", nargs="+", default=["identity", "power2"])
    ap.add_argument("--points", type=int, nargs="+", default=[11, 15, 19, 23, 27, 32])
    ap.add_argument("--epochs", type=int, default=10000)
    ap.add_argument("--distribution", default="equispaced")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="runs/points_sweep")
    args = ap.parse_args()

    for scheme in args.schemes:
        base = resolve(ExperimentConfig(problem=args.problem, scheme=scheme, epochs=args.epochs,
                                        distribution=args.distribution, log_every=args.epochs))
        sweep = SweepConfig(base, "n_interior", tuple(args.points), tuple(args.seeds))
        _, summary = run_sweep(sweep, jobs=args.jobs, out_dir=Path(args.out) / scheme)
        for n, cell in summary.items():
            print(f"{scheme:<10} n={n:<6} median l2 {cell['median_l2_error']}")


if __name__ == "__main__":
    main()
