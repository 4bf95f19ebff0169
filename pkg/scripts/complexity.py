"""Parameter and FLOP counts of [I, w, ..., w, 1] networks for each scheme."""
import argparse

from dapinn.augmentation import augmented_dim, default_mask, parse_scheme
from dapinn.network import MLPArchitecture, flop_count, param_count
from dapinn.problems import PROBLEM_NAMES, registry_get


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--hidden", type=int, nargs="+", default=[32, 32, 32, 32])
    ap.add_argument("--alpha", type=float, default=10.0, help="mean activation cost")
    args = ap.parse_args()

    print("problem,scheme,input_dim,params,flops")
    for name in PROBLEM_NAMES:
        p = registry_get(name)
        for text in ("identity", "power2", "power3"):
            scheme = parse_scheme(text).with_defaults(mask=default_mask(p.spatial_dim,
                                                                        p.time_dependent))
            arch = MLPArchitecture(augmented_dim(scheme, p.dim), tuple(args.hidden), 1)
            print(f"{name},{text},{arch.input_dim},{param_count(arch)},"
                  f"{flop_count(arch, args.alpha):g}")


if __name__ == "__main__":
    main()
