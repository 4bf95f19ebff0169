"""Hand-expanded residual kernels, written out term by term in tau-derivatives.

Each kernel is the residual of one benchmark rewritten for a specific
augmentation, with the coefficients expanded by hand. They exist to be
checked against the generic chain-rule assembly in
:mod:`dapinn.augmentation`; training never uses them.

Indices in the kernels are 1-based to match the way such expansions are
usually written: ``n(2)`` is dN/dtau_2, ``h(1, 3)`` is d2N/dtau_1 dtau_3.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import autodiff as ad
from .augmentation import (AugmentationScheme, augmented_dim, composite_derivatives,
                           network_tau_derivatives)
from .errors import UsageError
from .network import MLPArchitecture, init_glorot
from .problems import HEAT_A, Fields, _dr_f, _poisson1d_f, _poisson2d_f, registry_get


def _accessors(N: ad.HyperDual):
    def n(i):
        return N.first[i - 1]

    def h(i, j):
        return N.d2(i - 1, j - 1)

    return n, h


def _laplace_power2(tau, N):
    n, h = _accessors(N)
    t1, t2 = tau[:, 0], tau[:, 1]
    return h(1, 1) + 4 * t1 * h(1, 2) + 4 * t2 * h(2, 2) + 2 * n(2)


def _poisson1d_replica(tau, N):
    n, h = _accessors(N)
    x = tau[:, 0]
    return h(1, 1) + 2 * h(1, 2) + h(2, 2) + _poisson1d_f(x)


def _poisson1d_power2(tau, N):
    n, h = _accessors(N)
    x = tau[:, 0]
    return h(1, 1) + 4 * x * h(1, 2) + 4 * x**2 * h(2, 2) + 2 * n(2) + _poisson1d_f(x)


def _poisson2d_replica(tau, N):
    n, h = _accessors(N)
    t1, t3 = tau[:, 0], tau[:, 2]
    return (h(1, 1) + 2 * h(1, 2) + h(2, 2)
            + h(3, 3) + 2 * h(3, 4) + h(4, 4) + _poisson2d_f(t1, t3))


def _poisson2d_power2(tau, N):
    n, h = _accessors(N)
    t1, t2, t3, t4 = tau.T
    return (h(1, 1) + 4 * t1 * h(1, 2) + 4 * t2 * h(2, 2) + 2 * n(2)
            + h(3, 3) + 4 * t3 * h(3, 4) + 4 * t4 * h(4, 4) + 2 * n(4)
            + _poisson2d_f(t1, t3))


def _heat_power3(tau, N):
    n, h = _accessors(N)
    t1, t2, t3, _ = tau.T
    x = t1
    a = HEAT_A
    lap = (h(1, 1) + 4 * t2 * h(2, 2) + 9 * t2**2 * h(3, 3)
           + 4 * t1 * h(1, 2) + 6 * t2 * h(1, 3) + 12 * t3 * h(2, 3)
           + 2 * n(2) + 6 * x * n(3))
    return n(4) - a * lap


def _diffusion_fourier(tau, N):
    n, h = _accessors(N)
    t1, t2, t3, t4 = tau.T
    lap = (h(1, 1) + t3**2 * h(2, 2) + t2**2 * h(3, 3) + 2 * t3 * h(1, 2)
           - 2 * t2 * h(1, 3) - 2 * t2 * t3 * h(2, 3) - t2 * n(2) - t3 * n(3))
    return n(4) - lap - _dr_f(t1, t4)


@dataclass(frozen=True)
class Expansion:
    id: str
    scheme: AugmentationScheme
    problem: str | None
    domain: tuple[tuple[float, float], ...]
    kernel: Callable
    note: str


_P2 = AugmentationScheme("power", order=2)
_P3 = AugmentationScheme("power", order=3)
_REP = AugmentationScheme("replica")
_SPATIAL_ONLY = (True, False)

EXPANSIONS = {
    e.id: e
    for e in [
        Expansion("power2-1d", _P2, None, ((-1.0, 1.0),), _laplace_power2,
                  "1D Laplacian, tau = (x, x^2)"),
        Expansion("replica-1d", _REP, "poisson1d", ((0.0, np.pi),), _poisson1d_replica,
                  "1D Poisson, tau = (x, x)"),
        Expansion("power2-poisson1d", _P2, "poisson1d", ((0.0, np.pi),), _poisson1d_power2,
                  "1D Poisson, tau = (x, x^2)"),
        Expansion("replica-2d", _REP, "poisson2d", ((0.05, 0.95), (0.05, 0.95)),
                  _poisson2d_replica, "2D Poisson, tau = (x, x, y, y)"),
        Expansion("power2-2d", _P2, "poisson2d", ((0.05, 0.95), (0.05, 0.95)),
                  _poisson2d_power2, "2D Poisson, tau = (x, x^2, y, y^2)"),
        Expansion("power3-heat",
                  AugmentationScheme("power", order=3, mask=_SPATIAL_ONLY), "heat1d",
                  ((0.0, 1.0), (0.0, 1.0)), _heat_power3, "heat, tau = (x, x^2, x^3, t)"),
        Expansion("fourier-diffusion",
                  AugmentationScheme("fourier", period=2 * np.pi, mask=_SPATIAL_ONLY),
                  "diffusion-reaction1d", ((-np.pi, np.pi), (0.0, 1.0)), _diffusion_fourier,
                  "diffusion-reaction, tau = (x, sin x, cos x, t)"),
    ]
}


def _generic_residual(exp: Expansion, cd, pts):
    d = pts.shape[1]
    if exp.problem is None:
        return cd.d2u(0)
    problem = registry_get(exp.problem)
    fl = Fields(pts, cd.u, [cd.du(k) for k in range(d)], [cd.d2u(k) for k in range(d)],
                coeffs=dict(problem.unknowns))
    return problem.residual(fl)


def expansion_deviation(expansion_id: str, arch: MLPArchitecture, params, points) -> np.ndarray:
    """|generic - hand-expanded| at each point for one network."""
    try:
        exp = EXPANSIONS[expansion_id]
    except KeyError:
        raise UsageError(f"unknown expansion {expansion_id!r}; known: {sorted(EXPANSIONS)}") from None
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    cd = composite_derivatives(exp.scheme, arch, params, pts)
    generic = ad.value_of(_generic_residual(exp, cd, pts))
    N, tau = network_tau_derivatives(exp.scheme, arch, params, pts)
    verbatim = ad.value_of(exp.kernel(tau, N))
    return np.abs(generic - verbatim)


def expanded_residual_equivalence(expansion_id: str, n_cases: int = 500, seed: int = 0) -> float:
    """Max deviation between the two routes over random (network, point) pairs."""
    if expansion_id not in EXPANSIONS:
        raise UsageError(f"unknown expansion {expansion_id!r}; known: {sorted(EXPANSIONS)}")
    exp = EXPANSIONS[expansion_id]
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in exp.domain])
    hi = np.array([b[1] for b in exp.domain])
    n_in = augmented_dim(exp.scheme, len(exp.domain))
    worst = 0.0
    for _ in range(n_cases):
        depth = int(rng.integers(1, 4))
        hidden = tuple(int(w) for w in rng.integers(2, 9, size=depth))
        arch = MLPArchitecture(n_in, hidden, 1)
        params = init_glorot(arch, int(rng.integers(2**31)))
        # nonzero biases so no structural zero hides a wrong coefficient
        params.flat += 0.1 * rng.standard_normal(params.flat.size)
        point = rng.uniform(lo, hi)[None, :]
        worst = max(worst, float(expansion_deviation(expansion_id, arch, params, point).max()))
    return worst
