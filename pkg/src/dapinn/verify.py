"""Finite-difference self-checks for derivatives and gradients.

All comparisons use the norm-wise relative error ``||ad - fd|| / ||fd||``
over the derivative vector of one case, which stays meaningful when an
individual entry happens to be near zero.
"""
from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .augmentation import augment, augmented_dim, composite_derivatives, parse_scheme
from .network import MLPArchitecture, evaluate_plain, forward, init_glorot
from .problems import registry_get

FD_TOLERANCE = 1e-4
SCHEMES = ("identity", "replica", "power2", "power3", "fourier")
LOSS_PROBLEMS = ("poisson1d", "poisson2d", "heat1d", "burgers1d", "diffusion-reaction1d",
                 "allen-cahn1d", "inverse-diffusion1d", "inverse-poisson1d")


def rel_error(a, b) -> float:
    a, b = np.ravel(a), np.ravel(b)
    denom = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / denom) if denom > 0 else float(np.linalg.norm(a))


def _random_net(rng, n_in: int, max_width: int = 8):
    hidden = tuple(int(w) for w in rng.integers(2, max_width + 1, size=int(rng.integers(1, 4))))
    arch = MLPArchitecture(n_in, hidden, 1)
    params = init_glorot(arch, int(rng.integers(2**31)))
    params.flat += 0.1 * rng.standard_normal(params.flat.size)
    return arch, params


def fd_input_derivatives(f, x: np.ndarray, h: float = 1e-3):
    """Gradient and Hessian of scalar ``f`` at ``x`` from function values only.

    Fourth-order central stencils along each axis; mixed entries come from
    directional second derivatives along e_i + e_j and e_i - e_j.
    """
    n = x.size
    f0 = f(x)

    def d1(v):
        return (-f(x + 2 * h * v) + 8 * f(x + h * v) - 8 * f(x - h * v) + f(x - 2 * h * v)) / (12 * h)

    def d2(v):
        return (-f(x + 2 * h * v) + 16 * f(x + h * v) - 30 * f0 + 16 * f(x - h * v)
                - f(x - 2 * h * v)) / (12 * h * h)

    eye = np.eye(n)
    g = np.array([d1(eye[i]) for i in range(n)])
    H = np.empty((n, n))
    for i in range(n):
        H[i, i] = d2(eye[i])
        for j in range(i + 1, n):
            H[i, j] = H[j, i] = (d2(eye[i] + eye[j]) - d2(eye[i] - eye[j])) / 4
    return g, H


def input_derivative_case(rng) -> float:
    """Hyper-dual network gradient and Hessian against finite differences."""
    n = int(rng.integers(1, 5))
    arch, params = _random_net(rng, n)
    x = rng.uniform(-1.5, 1.5, n)
    inputs = [ad.lift_input(x[k], k, n) for k in range(n)]
    (out,) = forward(arch, params, inputs)
    grad_ad, hess_ad = out.gradient(), out.hessian()
    grad_fd, hess_fd = fd_input_derivatives(lambda p: evaluate_plain(arch, params, p)[0, 0], x)
    return max(rel_error(grad_ad, grad_fd), rel_error(hess_ad, hess_fd))


def composite_derivative_case(rng, scheme_text: str | None = None) -> float:
    """u(x) = N(t(x)) derivatives through the chain-rule path against finite differences."""
    scheme = parse_scheme(scheme_text or str(rng.choice(SCHEMES))).with_defaults(2.0)
    d = int(rng.integers(1, 3))
    arch, params = _random_net(rng, augmented_dim(scheme, d))
    x = rng.uniform(-1.0, 1.0, d)
    cd = composite_derivatives(scheme, arch, params, x[None, :])

    def u(p):
        return evaluate_plain(arch, params, augment(scheme, p[None, :]).tau)[0, 0]

    g_fd, H_fd = fd_input_derivatives(u, x)
    ad_vec = np.concatenate([cd.grad.value[0], cd.second.value[0]])
    return rel_error(ad_vec, np.concatenate([g_fd, np.diag(H_fd)]))


def _loss_setup(rng, problem_name: str | None = None):
    from .training import (InverseSpec, LossWeights, ModelState, SamplingPlan, prepare_batch,
                           resolved_scheme, sample_points)
    from .problems import make_measurements

    name = problem_name or str(rng.choice(LOSS_PROBLEMS))
    problem = registry_get(name)
    scheme = resolved_scheme(str(rng.choice(SCHEMES)), problem)
    arch, params = _random_net(rng, augmented_dim(scheme, problem.dim))
    nb = 2 if problem.dim == 1 else 8
    ni = 6 if problem.time_dependent else 0
    sets = sample_points(problem, SamplingPlan(int(rng.integers(3, 9)), nb, ni,
                                               seed=int(rng.integers(2**31))))
    inverse, src, coeffs = None, None, {}
    if problem.is_inverse:
        layout = "uniform-interior" if problem.unknown_source else "boundary+initial+final"
        meas = make_measurements(problem, layout, 8)
        if problem.unknown_source:
            src_arch, src = _random_net(rng, arch.input_dim)
        else:
            src_arch = None
            coeffs = {"C": float(rng.uniform(0.3, 1.5))}
        inverse = InverseSpec(meas, dict(coeffs), src_arch)
    weights = LossWeights(*rng.uniform(0.5, 2.0, 4))
    state = ModelState(params, src, coeffs)
    batch = prepare_batch(problem, scheme, sets, inverse)
    return problem, scheme, arch, state, batch, weights, inverse


def _loss_at(setup, flat) -> float:
    from .training import assemble_loss

    problem, scheme, arch, state, batch, weights, inverse = setup
    return float(assemble_loss(problem, scheme, arch, state.with_flat(flat), batch, weights,
                               inverse).total.value)


def _loss_grad(setup):
    from .training import assemble_loss

    problem, scheme, arch, state, batch, weights, inverse = setup
    rec = ad.Recording()
    terms = assemble_loss(problem, scheme, arch, state, batch, weights, inverse, rec=rec)
    return ad.parameter_gradient(rec, terms.total)


def loss_gradient_case(rng, problem_name: str | None = None, h: float = 1e-6) -> float:
    """Every parameter gradient of a composite loss against central differences."""
    setup = _loss_setup(rng, problem_name)
    theta = setup[3].flat()
    g = _loss_grad(setup)
    fd = np.empty_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        fd[k] = (_loss_at(setup, theta + e) - _loss_at(setup, theta - e)) / (2 * h)
    return rel_error(g, fd)


def directional_gradient_case(rng, h: float = 1e-5) -> float:
    """grad . v against a central difference along a random direction v."""
    setup = _loss_setup(rng)
    theta = setup[3].flat()
    g = _loss_grad(setup)
    v = rng.standard_normal(theta.size)
    v /= np.linalg.norm(v)
    fd = (_loss_at(setup, theta + h * v) - _loss_at(setup, theta - h * v)) / (2 * h)
    # compare the projected derivative relative to the full gradient scale
    return abs(float(g @ v) - fd) / max(np.linalg.norm(g), 1e-300)


def finite_difference_suite(n_cases: int = 50, seed: int = 0) -> dict[str, tuple[float, float]]:
    """Worst relative error per check family; values are ``(worst, tolerance)``."""
    rng = np.random.default_rng(seed)
    families = {
        "input-derivatives": input_derivative_case,
        "composite-derivatives": composite_derivative_case,
        "loss-gradient": loss_gradient_case,
        "loss-directional": directional_gradient_case,
    }
    out = {}
    for name, fn in families.items():
        out[name] = (max(fn(rng) for _ in range(n_cases)), FD_TOLERANCE)
    return out
