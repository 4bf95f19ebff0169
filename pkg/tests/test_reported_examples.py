"""Reported-result examples attached to individual operations (beyond the numbered criteria).

Slow: each trains a handful of full-size networks. Lines are reported like the
acceptance criteria, labelled E<n>.
"""
import numpy as np
import pytest
from scipy.stats import kendalltau

from dapinn.bench import SweepConfig, run_sweep
from dapinn.config import ExperimentConfig, resolve
from dapinn.training import solve_inverse

SEEDS = (0, 1, 2)


@pytest.mark.slow
def test_e1_pinn_error_falls_with_points(report):
    # median PINN error over 11..23 equispaced points must trend downward
    base = resolve(ExperimentConfig(problem="poisson1d", scheme="identity", hidden=(20,) * 4,
                                    epochs=10000, distribution="equispaced", log_every=10000))
    counts = (11, 15, 19, 23)
    _, summary = run_sweep(SweepConfig(base, "n_interior", counts, SEEDS))
    med = [summary[str(n)]["median_l2_error"] for n in counts]
    tau = kendalltau(counts, med).statistic
    ok = med[-1] < med[0] and tau < 0
    detail = ", ".join(f"{n}: {m:.2e}" for n, m in zip(counts, med))
    report("E1", ok, f"PINN median L2 by points {detail}; Kendall tau {tau:.2f} (want < 0, "
                     f"and 23 below 11)")
    assert ok


@pytest.mark.slow
def test_e2_inverse_poisson_dapinn_beats_pinn(report):
    errs = {"power2": [], "identity": []}
    for scheme in errs:
        for seed in SEEDS:
            res = solve_inverse(resolve(ExperimentConfig(
                problem="inverse-poisson1d", scheme=scheme, hidden=(30,) * 4, epochs=20000,
                n_interior=80, n_measure=80, seed=seed, log_every=20000)))
            errs[scheme].append(res.l2_error)
    d, p = float(np.median(errs["power2"])), float(np.median(errs["identity"]))
    ok = d * 3 <= p
    report("E2", ok, f"inverse-poisson u median L2 power2 {d:.2e}, identity {p:.2e}, "
                     f"ratio x{p / d:.1f} (want >= x3)")
    assert ok
