"""Fully connected tanh networks evaluated on hyper-dual inputs, plus Adam.

The forward pass works on a *channel-stacked* array of shape ``(C, B, width)``:
channel 0 holds values, channels ``1..n`` first derivatives along the ``n``
tracked input directions, and the remaining channels the tracked second
derivative pairs. Each layer is two recorded ops (affine, hyper-dual tanh)
regardless of how many derivative channels ride along.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import HyperDual, Node, Recording, all_pairs
from .errors import NumericOverflowError, OutputError, UsageError

CHECKPOINT_MAGIC = b"DAPN1"


@dataclass(frozen=True)
class MLPArchitecture:
    input_dim: int
    hidden: tuple[int, ...]
    output_dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.input_dim < 1 or self.output_dim < 1:
            raise UsageError("input and output widths must be >= 1")
        if not self.hidden:
            raise UsageError("at least one hidden layer is required")
        if any(h < 1 for h in self.hidden):
            raise UsageError(f"hidden widths must be >= 1, got {self.hidden}")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "MLPArchitecture":
        """``[i, m1, ..., mn, o]`` -> architecture."""
        sizes = list(sizes)
        if len(sizes) < 3:
            raise UsageError(f"need [input, hidden..., output], got {sizes}")
        return cls(sizes[0], tuple(sizes[1:-1]), sizes[-1])

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden, self.output_dim)

    def layer_shapes(self) -> list[tuple[tuple[int, int], tuple[int]]]:
        s = self.sizes
        return [((s[k + 1], s[k]), (s[k + 1],)) for k in range(len(s) - 1)]


def param_count(arch: MLPArchitecture) -> int:
    m = arch.hidden
    total = (arch.input_dim + 1) * m[0]
    for j in range(len(m) - 1):
        total += (m[j] + 1) * m[j + 1]
    return total + (m[-1] + 1) * arch.output_dim


def flop_count(arch: MLPArchitecture, mean_activation_cost: float = 10.0) -> float:
    """Multiply-add count of one forward pass plus the activation cost per hidden unit."""
    if mean_activation_cost < 0:
        raise UsageError("mean activation cost must be non-negative")
    m = arch.hidden
    macs = arch.input_dim * m[0] + sum(m[j] * m[j + 1] for j in range(len(m) - 1))
    macs += m[-1] * arch.output_dim
    return 2 * macs + mean_activation_cost * sum(m)


@dataclass
class ParameterSet:
    arch: MLPArchitecture
    flat: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        self.flat = np.asarray(self.flat, dtype=np.float64)
        if self.flat.shape != (param_count(self.arch),):
            raise UsageError(
                f"expected {param_count(self.arch)} parameters, got {self.flat.shape}"
            )

    def layers(self) -> list[tuple[np.ndarray, np.ndarray]]:
        out, k = [], 0
        for wshape, bshape in self.arch.layer_shapes():
            nw = wshape[0] * wshape[1]
            w = self.flat[k:k + nw].reshape(wshape)
            k += nw
            b = self.flat[k:k + bshape[0]]
            k += bshape[0]
            out.append((w, b))
        return out

    def bind(self, rec: Recording) -> list[tuple[Node, Node]]:
        """Register every weight and bias in ``rec`` (flat order preserved)."""
        return [(rec.parameter(w), rec.parameter(b)) for w, b in self.layers()]

    def constants(self) -> list[tuple[Node, Node]]:
        return [(ad.constant(w), ad.constant(b)) for w, b in self.layers()]

    def copy(self) -> "ParameterSet":
        return ParameterSet(self.arch, self.flat.copy(), self.seed)


def init_glorot(arch: MLPArchitecture, seed: int) -> ParameterSet:
    rng = np.random.default_rng(seed)
    chunks = []
    for (fan_out, fan_in), bshape in arch.layer_shapes():
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-limit, limit, size=fan_out * fan_in))
        chunks.append(np.zeros(bshape))
    return ParameterSet(arch, np.concatenate(chunks), seed)


# ---------------------------------------------------------------------------
# channel-stacked forward pass


@dataclass(frozen=True)
class ChannelLayout:
    """Which derivative channels a stacked array carries."""

    n: int
    pairs: tuple[tuple[int, int], ...] = None
    _pi: np.ndarray = field(init=False, repr=False, compare=False)
    _pj: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pairs = all_pairs(self.n) if self.pairs is None else tuple(tuple(p) for p in self.pairs)
        for i, j in pairs:
            if not 0 <= i <= j < self.n:
                raise UsageError(f"bad derivative pair {(i, j)} for n={self.n}")
        object.__setattr__(self, "pairs", pairs)
        pi = np.zeros((len(pairs), self.n))
        pj = np.zeros((len(pairs), self.n))
        for p, (i, j) in enumerate(pairs):
            pi[p, i] = 1.0
            pj[p, j] = 1.0
        object.__setattr__(self, "_pi", pi)
        object.__setattr__(self, "_pj", pj)

    @property
    def channels(self) -> int:
        return 1 + self.n + len(self.pairs)

    def first_index(self, i: int) -> int:
        return 1 + i

    def pair_index(self, i: int, j: int) -> int:
        key = (i, j) if i <= j else (j, i)
        return 1 + self.n + self.pairs.index(key)

    @property
    def pair_i(self) -> np.ndarray:
        return np.array([i for i, _ in self.pairs], dtype=int)

    @property
    def pair_j(self) -> np.ndarray:
        return np.array([j for _, j in self.pairs], dtype=int)


VALUE_ONLY = ChannelLayout(0)


def seed_channels(tau: np.ndarray, layout: ChannelLayout) -> np.ndarray:
    """Constant channel stack for network inputs ``tau`` of shape ``(B, n)``.

    Input ``k`` gets unit first derivative along direction ``k`` and zero
    second derivatives, i.e. each input coordinate is lifted independently.
    """
    tau = np.atleast_2d(np.asarray(tau, dtype=np.float64))
    B, width = tau.shape
    if layout.n not in (0, width):
        raise UsageError(f"layout tracks {layout.n} directions but inputs have width {width}")
    z = np.zeros((layout.channels, B, width))
    z[0] = tau
    for k in range(layout.n):
        z[1 + k, :, k] = 1.0
    return z


def _affine(z, w, b):
    out = (z.reshape(-1, z.shape[-1]) @ w.T).reshape(z.shape[:-1] + (w.shape[0],))
    out[0] += b
    return out


def _affine_vjp(g, out, z, w, b):
    gz = (g.reshape(-1, g.shape[-1]) @ w).reshape(z.shape)
    gw = g.reshape(-1, g.shape[-1]).T @ z.reshape(-1, z.shape[-1])
    gb = g[0].reshape(-1, g.shape[-1]).sum(axis=0)
    return gz, gw, gb


def channel_affine(z, w, b) -> Node:
    """``z @ w.T`` on every channel; the bias only shifts the value channel."""
    return ad.apply_op("affine", _affine, _affine_vjp, z, w, b)


def channel_tanh(a, layout: ChannelLayout) -> Node:
    """tanh applied to a hyper-dual channel stack.

    value  s = tanh(a0)
    first  s' * a_i
    second s' * a_ij + s'' * a_i * a_j
    """
    n = layout.n
    PI, PJ = layout._pi, layout._pj
    ii, jj = layout.pair_i, layout.pair_j

    def fwd(x):
        s = np.tanh(x[0])
        out = np.empty_like(x)
        out[0] = s
        if n:
            d1 = 1.0 - s * s
            F = x[1:1 + n]
            out[1:1 + n] = d1 * F
            if len(ii):
                d2 = -2.0 * s * d1
                out[1 + n:] = d1 * x[1 + n:] + d2 * (F[ii] * F[jj])
        return out

    def vjp(g, out, x):
        s = out[0]
        d1 = 1.0 - s * s
        ga = np.empty_like(x)
        ga0 = g[0] * d1
        if n:
            d2 = -2.0 * s * d1
            F = x[1:1 + n]
            GF = g[1:1 + n]
            ga0 = ga0 + d2 * (GF * F).sum(axis=0)
            gF = GF * d1
            if len(ii):
                d3 = d1 * (6.0 * s * s - 2.0)
                S = x[1 + n:]
                GS = g[1 + n:]
                FI, FJ = F[ii], F[jj]
                ga0 = ga0 + (GS * (d2 * S + d3 * FI * FJ)).sum(axis=0)
                w = GS * d2
                gF = gF + np.tensordot(PI.T, w * FJ, axes=1) + np.tensordot(PJ.T, w * FI, axes=1)
                ga[1 + n:] = GS * d1
            ga[1:1 + n] = gF
        ga[0] = ga0
        return (ga,)

    return ad.apply_op("hd_tanh", fwd, vjp, a)


def forward_channels(arch: MLPArchitecture, weights, z0, layout: ChannelLayout) -> Node:
    """Run the network on a channel stack ``z0`` of shape ``(C, B, input_dim)``."""
    if isinstance(weights, ParameterSet):
        weights = weights.constants()
    z0 = ad.as_node(z0)
    if z0.value.shape[-1] != arch.input_dim:
        raise UsageError(
            f"network expects {arch.input_dim} inputs, got {z0.value.shape[-1]}"
        )
    if z0.value.shape[0] != layout.channels:
        raise UsageError("channel count does not match layout")
    z = z0
    last = len(weights) - 1
    for k, (w, b) in enumerate(weights):
        z = channel_affine(z, w, b)
        if k < last:
            z = channel_tanh(z, layout)
    return z


def forward_values(arch: MLPArchitecture, weights, tau) -> Node:
    """Value-only forward on raw inputs ``tau`` of shape ``(B, input_dim)``; returns ``(B, o)``."""
    z0 = seed_channels(tau, VALUE_ONLY)
    return forward_channels(arch, weights, z0, VALUE_ONLY)[0]


def forward(arch: MLPArchitecture, params, inputs: Sequence[HyperDual]) -> list[HyperDual]:
    """Evaluate the network on hyper-dual inputs, one HyperDual per output."""
    if len(inputs) != arch.input_dim:
        raise UsageError(f"network expects {arch.input_dim} inputs, got {len(inputs)}")
    n = inputs[0].n
    pairs = inputs[0].pairs
    for x in inputs:
        if x.n != n or x.pairs != pairs:
            raise UsageError("inputs track different derivative directions")
    layout = ChannelLayout(n, pairs)
    rows = []
    for x in inputs:
        rows.append([x.value, *x.first, *[x.second[p] for p in layout.pairs]])
    # channel stack (C, ..., input_dim)
    channels = [ad.stack([row[c] for row in rows], axis=-1) for c in range(layout.channels)]
    z0 = ad.stack(channels, axis=0)
    if z0.value.ndim == 2:
        z0 = ad.reshape(z0, (layout.channels, 1, arch.input_dim))
        squeeze = True
    else:
        squeeze = False
    y = forward_channels(arch, params, z0, layout)
    outs = []
    for o in range(arch.output_dim):
        def pick(c):
            node = y[c, :, o]
            return ad.reshape(node, ()) if squeeze else node

        outs.append(HyperDual(
            pick(0),
            [pick(1 + i) for i in range(n)],
            {p: pick(1 + n + q) for q, p in enumerate(layout.pairs)},
        ))
    return outs


def evaluate_plain(arch: MLPArchitecture, params: ParameterSet, x: np.ndarray) -> np.ndarray:
    """Straight numpy evaluation with no derivative channels."""
    z = np.atleast_2d(np.asarray(x, dtype=np.float64))
    layers = params.layers()
    for k, (w, b) in enumerate(layers):
        z = z @ w.T + b
        if k < len(layers) - 1:
            z = np.tanh(z)
    return z


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None

    def hyperparameters(self) -> dict:
        return {"lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps}


def adam_step(state: AdamState, params: np.ndarray, gradient: np.ndarray):
    """One bias-corrected Adam update. Returns ``(new_params, state)``; ``state`` is updated in place."""
    params = np.asarray(params, dtype=np.float64)
    g = np.asarray(gradient, dtype=np.float64)
    if g.shape != params.shape:
        raise UsageError(f"gradient shape {g.shape} != parameter shape {params.shape}")
    bad = np.flatnonzero(~np.isfinite(g))
    if bad.size:
        raise NumericOverflowError("adam_step", f"gradient entry {int(bad[0])} is not finite")
    if state.m is None:
        state.m = np.zeros_like(params)
        state.v = np.zeros_like(params)
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    mhat = state.m / (1.0 - state.beta1 ** state.t)
    vhat = state.v / (1.0 - state.beta2 ** state.t)
    return params - state.lr * mhat / (np.sqrt(vhat) + state.eps), state


# ---------------------------------------------------------------------------
# checkpoints: "DAPN1" | u32 n_sizes | u32 sizes[n] | u64 count | f64 params[count], little-endian


def save_checkpoint(path, params: ParameterSet) -> None:
    sizes = params.arch.sizes
    header = CHECKPOINT_MAGIC + struct.pack(f"<I{len(sizes)}I", len(sizes), *sizes)
    header += struct.pack("<Q", params.flat.size)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(params.flat.astype("<f8").tobytes())
    except OSError as exc:
        raise OutputError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path) -> ParameterSet:
    data = Path(path).read_bytes()
    if data[:5] != CHECKPOINT_MAGIC:
        raise UsageError(f"{path} is not a DAPN1 checkpoint")
    off = 5
    (n,) = struct.unpack_from("<I", data, off)
    off += 4
    sizes = struct.unpack_from(f"<{n}I", data, off)
    off += 4 * n
    (count,) = struct.unpack_from("<Q", data, off)
    off += 8
    flat = np.frombuffer(data, dtype="<f8", count=count, offset=off).astype(np.float64)
    return ParameterSet(MLPArchitecture.from_sizes(sizes), flat)
