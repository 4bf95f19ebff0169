"""Interior points needed to reach a target error on Burgers, with and without RAR.

Plain runs use a ladder of fixed point counts; the RAR run starts small and
adds ``k`` highest-residual points every ``every`` epochs. All runs share the
epoch budget.
"""
import argparse

from dapinn.config import ExperimentConfig, resolve
from dapinn.training import train


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scheme", default="power3")
    ap.add_argument("--epochs", type=int, default=10000)
    ap.add_argument("--ladder", type=int, nargs="+", default=[1680, 2400, 3600])
    ap.add_argument("--start", type=int, default=1500)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--every", type=int, default=1000)
    ap.add_argument("--target", type=float, default=0.02)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    base = ExperimentConfig(problem="burgers1d", scheme=args.scheme, epochs=args.epochs,
                            seed=args.seed, log_every=args.epochs)
    for n in args.ladder:
        res = train(resolve(base.replace(n_interior=n)))
        print(f"plain n={n:<6} l2 {res.l2_error:.4e} reached={res.l2_error <= args.target}",
              flush=True)
    rounds = (args.epochs - 1) // args.every
    res = train(resolve(base.replace(n_interior=args.start, rar_rounds=rounds, rar_k=args.k,
                                     rar_every=args.every)))
    total = res.interior_counts[-1][1]
    print(f"rar   n={args.start}->{total} l2 {res.l2_error:.4e} reached={res.l2_error <= args.target}")


if __name__ == "__main__":
    main()
