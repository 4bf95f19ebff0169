"""Recovered diffusion coefficient C against the number of measurement points."""
import argparse

import numpy as np

from dapinn.config import ExperimentConfig, resolve
from dapinn.training import solve_inverse


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--measurements", type=int, nargs="+", default=[30, 54, 80, 114])
    ap.add_argument("--schemes", nargs="+", default=["identity", "power2"])
    ap.add_argument("--epochs", type=int, default=10000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    args = ap.parse_args()

    print("scheme,n_measure,median_C_error,median_l2_error")
    for scheme in args.schemes:
        for n in args.measurements:
            c_err, l2 = [], []
            for seed in args.seeds:
                cfg = resolve(ExperimentConfig(problem="inverse-diffusion1d", scheme=scheme,
                                               n_measure=n, epochs=args.epochs, seed=seed,
                                               log_every=args.epochs))
                res = solve_inverse(cfg)
                c_err.append(res.param_errors["C"])
                l2.append(res.l2_error)
            print(f"{scheme},{n},{np.median(c_err):.4e},{np.median(l2):.4e}", flush=True)


if __name__ == "__main__":
    main()
