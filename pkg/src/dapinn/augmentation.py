"""Input augmentation maps and the chain rule back to physical coordinates.

Every scheme maps each augmented physical coordinate ``x_k`` to a short list
of images that depend on ``x_k`` alone, so d tau_i / d x_k has one nonzero
column per row and mixed second derivatives of tau across coordinates vanish.

Ordering is fixed: coordinates in order, each followed by its images in
scheme order, e.g. power2 on (x, y) gives tau = (x, x^2, y, y^2).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .errors import ConfigError, UsageError
from .network import ChannelLayout, MLPArchitecture, forward_channels, seed_channels

KINDS = ("identity", "replica", "power", "fourier")


@dataclass(frozen=True)
class AugmentationScheme:
    kind: str = "identity"
    order: int = 1
    period: float | None = None
    harmonics: int = 1
    mask: tuple[bool, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown augmentation kind {self.kind!r}")
        if self.kind == "power" and self.order not in (2, 3):
            raise ConfigError(f"power augmentation order must be 2 or 3, got {self.order}")
        if self.kind == "fourier":
            if self.period is not None and not self.period > 0:
                raise ConfigError(f"fourier period must be positive, got {self.period}")
            if self.harmonics < 1:
                raise ConfigError("fourier needs at least one harmonic")

    @property
    def name(self) -> str:
        if self.kind == "power":
            return f"power{self.order}"
        if self.kind == "fourier":
            if self.period is None:
                return f"fourier:n={self.harmonics}" if self.harmonics != 1 else "fourier"
            return f"fourier:T={self.period!r},n={self.harmonics}"
        return self.kind

    def images(self) -> int:
        """Number of tau entries emitted for one augmented coordinate."""
        return {
            "identity": 1,
            "replica": 2,
            "power": self.order,
            "fourier": 1 + 2 * self.harmonics,
        }[self.kind]

    def with_defaults(self, period: float | None = None, mask=None) -> "AugmentationScheme":
        kw = dict(kind=self.kind, order=self.order, period=self.period,
                  harmonics=self.harmonics, mask=self.mask)
        if self.period is None and period is not None and self.kind == "fourier":
            kw["period"] = period
        if self.mask is None and mask is not None:
            kw["mask"] = tuple(bool(m) for m in mask)
        return AugmentationScheme(**kw)


def default_mask(spatial_dim: int, time_dependent: bool) -> tuple[bool, ...]:
    """Augment spatial coordinates, leave time untouched."""
    return (True,) * spatial_dim + ((False,) if time_dependent else ())


_FOURIER_RE = re.compile(r"^fourier(?::(.*))?$")


def parse_scheme(text: str) -> AugmentationScheme:
    """Parse ``identity | replica | power2 | power3 | fourier[:T=<real>,n=<int>]``."""
    s = text.strip()
    if s in ("identity", "replica"):
        return AugmentationScheme(s)
    if s in ("power2", "power3"):
        return AugmentationScheme("power", order=int(s[-1]))
    m = _FOURIER_RE.match(s)
    if m:
        period, harmonics = None, 1
        if m.group(1):
            for part in m.group(1).split(","):
                key, _, val = part.partition("=")
                key = key.strip()
                try:
                    if key == "T":
                        period = float(val)
                    elif key == "n":
                        harmonics = int(val)
                    else:
                        raise ConfigError(f"unknown fourier option {key!r} in {text!r}")
                except ValueError:
                    raise ConfigError(f"bad value for {key!r} in {text!r}") from None
        if period is not None and not period > 0:
            raise ConfigError(f"fourier period must be positive, got {period}")
        return AugmentationScheme("fourier", period=period, harmonics=harmonics)
    raise ConfigError(f"unknown augmentation scheme {text!r}")


def resolve_mask(scheme: AugmentationScheme, dim: int) -> tuple[bool, ...]:
    mask = scheme.mask if scheme.mask is not None else (True,) * dim
    if len(mask) != dim:
        raise UsageError(f"mask has {len(mask)} entries for {dim} coordinates")
    return tuple(mask)


def augmented_dim(scheme: AugmentationScheme, dim: int) -> int:
    mask = resolve_mask(scheme, dim)
    return sum(scheme.images() if m else 1 for m in mask)


@dataclass(frozen=True)
class AugmentedPoint:
    """tau with its analytic derivatives.

    ``jac[..., i, k]`` is d tau_i / d x_k and ``second[..., i, k]`` is
    d^2 tau_i / d x_k^2; ``owner[i]`` is the coordinate tau_i depends on.
    """

    tau: np.ndarray
    jac: np.ndarray
    second: np.ndarray
    owner: tuple[int, ...]


def _coordinate_images(scheme: AugmentationScheme, x: np.ndarray):
    """Images of one coordinate column: values, first and second derivatives, each (B, m)."""
    one, zero = np.ones_like(x), np.zeros_like(x)
    if scheme.kind == "identity":
        cols = [(x, one, zero)]
    elif scheme.kind == "replica":
        cols = [(x, one, zero), (x, one, zero)]
    elif scheme.kind == "power":
        cols = [(x, one, zero), (x * x, 2.0 * x, 2.0 * one)]
        if scheme.order == 3:
            cols.append((x * x * x, 3.0 * x * x, 6.0 * x))
    else:
        if scheme.period is None:
            raise ConfigError("fourier scheme has no period; set T or use a problem default")
        cols = [(x, one, zero)]
        for h in range(1, scheme.harmonics + 1):
            w = 2.0 * np.pi * h / scheme.period
            sn, cs = np.sin(w * x), np.cos(w * x)
            cols.append((sn, w * cs, -w * w * sn))
            cols.append((cs, -w * sn, -w * w * cs))
    return [np.stack(c, axis=-1) for c in zip(*cols)]


def augment(scheme: AugmentationScheme, x) -> AugmentedPoint:
    """Map physical points ``x`` (shape ``(d,)`` or ``(B, d)``) to augmented inputs."""
    if scheme.kind == "fourier" and (scheme.period is None or not scheme.period > 0):
        raise ConfigError(f"fourier period must be positive, got {scheme.period}")
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    pts = np.atleast_2d(arr)
    B, d = pts.shape
    mask = resolve_mask(scheme, d)
    ident = AugmentationScheme("identity")
    taus, jacs, secs, owner = [], [], [], []
    for k in range(d):
        val, d1, d2 = _coordinate_images(scheme if mask[k] else ident, pts[:, k])
        m = val.shape[1]
        j = np.zeros((B, m, d))
        s = np.zeros((B, m, d))
        j[:, :, k] = d1
        s[:, :, k] = d2
        taus.append(val)
        jacs.append(j)
        secs.append(s)
        owner.extend([k] * m)
    tau = np.concatenate(taus, axis=1)
    jac = np.concatenate(jacs, axis=1)
    sec = np.concatenate(secs, axis=1)
    if single:
        tau, jac, sec = tau[0], jac[0], sec[0]
    return AugmentedPoint(tau, jac, sec, tuple(owner))


def block_pairs(owner: Sequence[int]) -> tuple[tuple[int, int], ...]:
    """Second-derivative pairs (i, j) of tau that share a physical coordinate.

    Pairs across coordinates are multiplied by d tau_i/dx_k * d tau_j/dx_k = 0
    in every diagonal second derivative, so tracking them is wasted work.
    """
    n = len(owner)
    return tuple((i, j) for i in range(n) for j in range(i, n) if owner[i] == owner[j])


def chain_rule_coefficients(aug: AugmentedPoint, layout: ChannelLayout) -> np.ndarray:
    """Constant weights turning network channels into (u, du/dx_k, d2u/dx_k^2).

    Returns ``M`` of shape ``(C, B, 1 + 2d)`` so that for the network channel
    stack ``Y`` (``(C, B)``) the physical quantities are ``sum_c Y[c] * M[c]``:

    * column 0 picks the value,
    * column 1 + k: sum_i N_i J_ik,
    * column 1 + d + k: sum_ij N_ij J_ik J_jk + sum_i N_i S_ik.
    """
    J = aug.jac if aug.jac.ndim == 3 else aug.jac[None]
    S = aug.second if aug.second.ndim == 3 else aug.second[None]
    B, n, d = J.shape
    M = np.zeros((layout.channels, B, 1 + 2 * d))
    M[0, :, 0] = 1.0
    for i in range(n):
        M[1 + i, :, 1:1 + d] = J[:, i, :]
        M[1 + i, :, 1 + d:] = S[:, i, :]
    for q, (i, j) in enumerate(layout.pairs):
        factor = 1.0 if i == j else 2.0
        M[1 + n + q, :, 1 + d:] += factor * J[:, i, :] * J[:, j, :]
    return M


@dataclass
class CompositeDerivatives:
    """u and its per-coordinate first and pure second derivatives at B points."""

    u: ad.Node
    grad: ad.Node
    second: ad.Node

    def du(self, k: int) -> ad.Node:
        return self.grad[:, k]

    def d2u(self, k: int) -> ad.Node:
        return self.second[:, k]


def composite_from_channels(y, M: np.ndarray, dim: int) -> CompositeDerivatives:
    """Contract a network output channel stack ``y`` (``(C, B)``) with chain-rule weights."""
    q = ad.contract(ad.reshape(y, y.shape + (1,)), M, axis=0)
    return CompositeDerivatives(q[:, 0], q[:, 1:1 + dim], q[:, 1 + dim:])


def composite_derivatives(
    scheme: AugmentationScheme,
    arch: MLPArchitecture,
    params,
    x,
    pairs: str = "block",
) -> CompositeDerivatives:
    """Derivatives of ``u(x) = N(t(x))`` w.r.t. physical coordinates.

    ``params`` may be a :class:`~dapinn.network.ParameterSet` (treated as
    constants) or the bound node list from ``ParameterSet.bind``; in the
    latter case everything returned is parameter-differentiable.
    ``pairs="all"`` tracks the full tau Hessian instead of the per-coordinate
    blocks; the result is the same.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    aug = augment(scheme, pts)
    n = aug.tau.shape[-1]
    if n != arch.input_dim:
        raise UsageError(f"scheme emits {n} inputs but network expects {arch.input_dim}")
    layout = ChannelLayout(n, None if pairs == "all" else block_pairs(aug.owner))
    y = forward_channels(arch, params, seed_channels(aug.tau, layout), layout)[:, :, 0]
    return composite_from_channels(y, chain_rule_coefficients(aug, layout), pts.shape[1])


def network_tau_derivatives(scheme, arch, params, x) -> tuple[ad.HyperDual, np.ndarray]:
    """Network output as a HyperDual in tau directions (full Hessian), plus tau itself."""
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    aug = augment(scheme, pts)
    n = aug.tau.shape[-1]
    layout = ChannelLayout(n)
    y = forward_channels(arch, params, seed_channels(aug.tau, layout), layout)[:, :, 0]
    N = ad.HyperDual(
        y[0],
        [y[1 + i] for i in range(n)],
        {p: y[1 + n + q] for q, p in enumerate(layout.pairs)},
    )
    return N, aug.tau
