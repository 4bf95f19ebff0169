"""Collocation sampling, composite loss, full-batch Adam training and RAR.

One epoch records a fresh tape: bind the parameters, push the prepared
point sets through the network, reduce to the weighted loss and take a
single reverse pass. Everything that depends only on the points (augmented
inputs, chain-rule weights, targets) is computed once per point set.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .augmentation import (AugmentationScheme, augment, augmented_dim, block_pairs,
                           chain_rule_coefficients, composite_from_channels, default_mask,
                           parse_scheme)
from .config import ExperimentConfig, resolve
from .errors import (ConfigError, DivergenceError, NumericOverflowError, OutputError,
                     UsageError)
from .network import (VALUE_ONLY, AdamState, ChannelLayout, MLPArchitecture, ParameterSet,
                      adam_step, forward, forward_channels, forward_values, init_glorot,
                      seed_channels)
from .problems import (Fields, MeasurementSet, ProblemDefinition, evaluate_reference,
                       make_measurements, registry_get, test_grid)

DIVERGENCE_THRESHOLD = 1e8
HISTORY_COLUMNS = ("epoch", "L_f", "L_b", "L_i", "L_data", "total", "l2_error")


# -- sampling ------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingPlan:
    n_interior: int
    n_boundary: int = 0
    n_initial: int = 0
    distribution: str = "uniform-random"
    seed: int = 0

    def __post_init__(self):
        if min(self.n_interior, self.n_boundary, self.n_initial) < 0:
            raise ConfigError("point counts must be >= 0")
        if self.distribution not in ("uniform-random", "equispaced"):
            raise ConfigError(f"unknown distribution {self.distribution!r}")


@dataclass
class PointSets:
    interior: np.ndarray
    boundary: np.ndarray
    initial: np.ndarray

    def counts(self) -> dict:
        return {"interior": len(self.interior), "boundary": len(self.boundary),
                "initial": len(self.initial)}


def _open_grid(lo, hi, n: int) -> np.ndarray:
    """Tensor grid of about ``n`` points strictly inside the box [lo, hi]."""
    dim = len(lo)
    if dim == 1:
        return np.linspace(lo[0], hi[0], n + 2)[1:-1, None]
    k = max(1, int(round(n ** (1.0 / dim))))
    axes = [np.linspace(a, b, k + 2)[1:-1] for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _line(lo: float, hi: float, n: int, equispaced: bool, rng, closed: bool = True):
    if equispaced:
        return np.linspace(lo, hi, n) if closed else np.linspace(lo, hi, n + 2)[1:-1]
    return rng.uniform(lo, hi, n)


def _split(count: int, parts: int) -> list[int]:
    base, rem = divmod(count, parts)
    return [base + (1 if i < rem else 0) for i in range(parts)]


def sample_points(problem: ProblemDefinition, plan: SamplingPlan) -> PointSets:
    """Interior, boundary and initial sets for one problem.

    Equispaced interior points avoid the domain boundary. Boundary points are
    split evenly over the Dirichlet faces; each face is a line (or a point in
    1D steady problems) on which the remaining coordinates run over their
    closed interval. Initial points lie on t = 0.
    """
    rng = np.random.default_rng(plan.seed)
    eq = plan.distribution == "equispaced"
    lo, hi = problem.lower, problem.upper
    dim = problem.dim

    if eq:
        interior = _open_grid(lo, hi, plan.n_interior) if plan.n_interior else np.zeros((0, dim))
    else:
        interior = rng.uniform(lo, hi, size=(plan.n_interior, dim))

    faces = problem.boundary_faces()
    if plan.n_boundary and not faces:
        raise ConfigError(f"{problem.name} has no boundary but n_boundary = {plan.n_boundary}")
    chunks = []
    if plan.n_boundary:
        if problem.dim == 1:
            # two endpoints; extra points repeat them so the mean stays balanced
            sizes = _split(plan.n_boundary, 2)
            for (k, v), m in zip(faces, sizes):
                chunks.append(np.full((m, 1), v))
        else:
            for (k, v), m in zip(faces, _split(plan.n_boundary, len(faces))):
                pts = np.empty((m, dim))
                for c in range(dim):
                    if c == k:
                        pts[:, c] = v
                    else:
                        pts[:, c] = _line(lo[c], hi[c], m, eq, rng)
                chunks.append(pts)
    boundary = np.vstack(chunks) if chunks else np.zeros((0, dim))

    if plan.n_initial and not problem.time_dependent:
        raise ConfigError(f"{problem.name} is steady but n_initial = {plan.n_initial}")
    if plan.n_initial:
        initial = np.empty((plan.n_initial, dim))
        for c in range(problem.spatial_dim):
            initial[:, c] = _line(lo[c], hi[c], plan.n_initial, eq, rng)
        initial[:, -1] = lo[-1]
    else:
        initial = np.zeros((0, dim))
    return PointSets(interior, boundary, initial)


# -- loss --------------------------------------------------------------------

@dataclass(frozen=True)
class LossWeights:
    w_f: float = 1.0
    w_b: float = 1.0
    w_i: float = 1.0
    w_data: float = 1.0

    def __post_init__(self):
        ws = (self.w_f, self.w_b, self.w_i, self.w_data)
        if min(ws) < 0 or not any(ws):
            raise ConfigError("loss weights must be >= 0 and not all zero")


@dataclass
class InverseSpec:
    """Trainable unknowns of an inverse problem and the data they are fitted to."""

    measurements: MeasurementSet
    coeffs: dict = field(default_factory=dict)
    source_arch: MLPArchitecture | None = None

    def __post_init__(self):
        if not self.coeffs and self.source_arch is None:
            raise UsageError("inverse spec needs a trainable coefficient or a source network")
        if len(self.measurements) == 0:
            raise UsageError("inverse spec needs at least one measurement")


@dataclass
class ModelState:
    """All trainable quantities: the solution network, optional source network and scalars."""

    net: ParameterSet
    source_net: ParameterSet | None = None
    coeffs: dict = field(default_factory=dict)

    def flat(self) -> np.ndarray:
        parts = [self.net.flat]
        if self.source_net is not None:
            parts.append(self.source_net.flat)
        parts.append(np.array([self.coeffs[k] for k in sorted(self.coeffs)], dtype=np.float64))
        return np.concatenate(parts)

    def with_flat(self, flat: np.ndarray) -> "ModelState":
        k = self.net.flat.size
        net = ParameterSet(self.net.arch, flat[:k].copy(), self.net.seed)
        src = None
        if self.source_net is not None:
            m = self.source_net.flat.size
            src = ParameterSet(self.source_net.arch, flat[k:k + m].copy(), self.source_net.seed)
            k += m
        coeffs = {name: float(flat[k + i]) for i, name in enumerate(sorted(self.coeffs))}
        return ModelState(net, src, coeffs)

    def bind(self, rec: ad.Recording):
        """Register everything in flat order; returns (net, source_net, coeff nodes)."""
        net = self.net.bind(rec)
        src = self.source_net.bind(rec) if self.source_net is not None else None
        coeffs = {name: rec.parameter(np.float64(self.coeffs[name])) for name in sorted(self.coeffs)}
        return net, src, coeffs


@dataclass
class _ValueBatch:
    tau: np.ndarray
    z0: np.ndarray
    target: np.ndarray


@dataclass
class _InteriorBatch:
    x: np.ndarray
    tau: np.ndarray
    z0: np.ndarray
    M: np.ndarray
    layout: ChannelLayout


@dataclass
class PreparedBatch:
    """Point-dependent constants for one (problem, scheme, point sets) triple."""

    interior: _InteriorBatch
    boundary: _ValueBatch
    initial: _ValueBatch
    data: _ValueBatch | None


def resolved_scheme(scheme: AugmentationScheme | str, problem: ProblemDefinition) -> AugmentationScheme:
    if isinstance(scheme, str):
        scheme = parse_scheme(scheme)
    return scheme.with_defaults(problem.fourier_period,
                                default_mask(problem.spatial_dim, problem.time_dependent))


def _value_batch(scheme, pts: np.ndarray, target: np.ndarray) -> _ValueBatch:
    tau = augment(scheme, pts).tau if len(pts) else np.zeros((0, 0))
    return _ValueBatch(tau, seed_channels(tau, VALUE_ONLY) if len(pts) else tau, target)


def _interior_batch(scheme, pts: np.ndarray) -> _InteriorBatch:
    aug = augment(scheme, pts)
    layout = ChannelLayout(aug.tau.shape[1], block_pairs(aug.owner))
    return _InteriorBatch(pts, aug.tau, seed_channels(aug.tau, layout),
                          chain_rule_coefficients(aug, layout), layout)


def prepare_batch(problem: ProblemDefinition, scheme, sets: PointSets,
                  inverse: InverseSpec | None = None) -> PreparedBatch:
    scheme = resolved_scheme(scheme, problem)
    if len(sets.interior) == 0:
        raise ConfigError("at least one interior collocation point is required")
    b_target = problem.boundary_value(sets.boundary) if len(sets.boundary) else np.zeros(0)
    i_target = problem.initial_value(sets.initial) if len(sets.initial) else np.zeros(0)
    data = None
    if inverse is not None:
        m = inverse.measurements
        data = _value_batch(scheme, m.points, m.values)
    return PreparedBatch(
        _interior_batch(scheme, sets.interior),
        _value_batch(scheme, sets.boundary, b_target),
        _value_batch(scheme, sets.initial, i_target),
        data,
    )


@dataclass
class LossTerms:
    total: ad.Node
    L_f: ad.Node
    L_b: ad.Node
    L_i: ad.Node
    L_data: ad.Node

    def values(self) -> dict:
        return {k: float(getattr(self, k).value) for k in ("L_f", "L_b", "L_i", "L_data", "total")}


_ZERO = ad.constant(0.0)


def _mse(pred: ad.Node, target: np.ndarray) -> ad.Node:
    if target.size == 0:
        return _ZERO
    return ad.reduce_mean(ad.square(pred - target))


def _value_term(arch, weights, batch: _ValueBatch) -> ad.Node:
    if batch.target.size == 0:
        return _ZERO
    pred = forward_channels(arch, weights, batch.z0, VALUE_ONLY)[0][:, 0]
    return _mse(pred, batch.target)


def _interior_residual(problem, arch, net_w, src_w, coeffs, b: _InteriorBatch,
                       source_arch=None) -> ad.Node:
    y = forward_channels(arch, net_w, b.z0, b.layout)[:, :, 0]
    cd = composite_from_channels(y, b.M, problem.dim)
    src = None
    if src_w is not None:
        src = forward_values(source_arch, src_w, b.tau)[:, 0]
    merged = dict(problem.unknowns)
    merged.update(coeffs)
    fl = Fields(b.x, cd.u, [cd.du(k) for k in range(problem.dim)],
                [cd.d2u(k) for k in range(problem.dim)], coeffs=merged, source=src)
    return ad.as_node(problem.residual(fl))


def _loss_from_bound(problem, arch, batch: PreparedBatch, weights: LossWeights,
                     net_w, src_w, coeffs, source_arch=None) -> LossTerms:
    r = _interior_residual(problem, arch, net_w, src_w, coeffs, batch.interior, source_arch)
    L_f = ad.reduce_mean(ad.square(r))
    L_b = _value_term(arch, net_w, batch.boundary)
    L_i = _value_term(arch, net_w, batch.initial)
    L_d = _value_term(arch, net_w, batch.data) if batch.data is not None else _ZERO
    total = weights.w_f * L_f + weights.w_b * L_b + weights.w_i * L_i
    if batch.data is not None:
        total = total + weights.w_data * L_d
    return LossTerms(ad.as_node(total), L_f, L_b, L_i, L_d)


def assemble_loss(problem: ProblemDefinition, scheme, arch: MLPArchitecture, params,
                  sets: PointSets | PreparedBatch, weights: LossWeights = LossWeights(),
                  inverse: InverseSpec | None = None, rec: ad.Recording | None = None) -> LossTerms:
    """Weighted mean-squared residual, boundary, initial and data terms.

    ``params`` is a :class:`ParameterSet` or a :class:`ModelState`. When a
    recording is given, every trainable quantity is bound into it in flat
    order, so ``parameter_gradient(rec, terms.total)`` lines up with
    ``ModelState.flat()``.
    """
    state = params if isinstance(params, ModelState) else ModelState(params)
    batch = sets if isinstance(sets, PreparedBatch) else prepare_batch(problem, scheme, sets, inverse)
    if inverse is not None and batch.data is None:
        raise UsageError("inverse spec given but the prepared batch has no measurement data")
    if rec is None:
        net_w = state.net.constants()
        src_w = state.source_net.constants() if state.source_net is not None else None
        coeffs = {k: ad.constant(v) for k, v in state.coeffs.items()}
    else:
        net_w, src_w, coeffs = state.bind(rec)
    src_arch = state.source_net.arch if state.source_net is not None else None
    return _loss_from_bound(problem, arch, batch, weights, net_w, src_w, coeffs, src_arch)


def baseline_pinn_loss(problem: ProblemDefinition, arch: MLPArchitecture, params: ParameterSet,
                       sets: PointSets, weights: LossWeights = LossWeights()) -> dict:
    """Plain PINN loss on raw coordinates, with derivatives from hyper-dual input lifting.

    Shares no code with the augmentation path; used to check that the
    identity scheme reduces to an ordinary PINN.
    """
    d = problem.dim
    pts = sets.interior
    coords = [ad.lift_input(pts[:, k], k, d) for k in range(d)]
    (u,) = forward(arch, params, coords)
    fl = Fields(pts, u.value, [u.first[k] for k in range(d)], [u.d2(k, k) for k in range(d)],
                coeffs=dict(problem.unknowns))
    r = ad.value_of(problem.residual(fl))
    from .network import evaluate_plain

    def mse(p, target):
        return float(np.mean((evaluate_plain(arch, params, p)[:, 0] - target) ** 2)) if len(p) else 0.0

    out = {"L_f": float(np.mean(r ** 2))}
    out["L_b"] = mse(sets.boundary, problem.boundary_value(sets.boundary)) if len(sets.boundary) else 0.0
    out["L_i"] = mse(sets.initial, problem.initial_value(sets.initial)) if len(sets.initial) else 0.0
    out["total"] = weights.w_f * out["L_f"] + weights.w_b * out["L_b"] + weights.w_i * out["L_i"]
    return out


def residual_values(problem, scheme, state: ModelState, points) -> np.ndarray:
    """Pointwise residual of the current model (no tape)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    b = _interior_batch(resolved_scheme(scheme, problem), pts)
    src_w = state.source_net.constants() if state.source_net is not None else None
    src_arch = state.source_net.arch if state.source_net is not None else None
    coeffs = {k: ad.constant(v) for k, v in state.coeffs.items()}
    r = _interior_residual(problem, state.net.arch, state.net.constants(), src_w, coeffs, b, src_arch)
    return np.asarray(r.value, dtype=np.float64)


def predict(problem, scheme, params: ParameterSet, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    tau = augment(resolved_scheme(scheme, problem), pts).tau
    return forward_values(params.arch, params, tau).value[:, 0]


# -- RAR -------------------------------------------------------------------------

def rar_refine(problem, scheme, state: ModelState, interior: np.ndarray, pool_size: int, k: int,
               rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Append the ``k`` pool points with largest |residual| to ``interior``.

    The pool is ``pool_size`` fresh uniform points. Ties keep pool order
    (stable sort). Returns ``(new_interior, chosen_points)``.
    """
    if k < 1 or pool_size < k:
        raise ConfigError("rar needs k >= 1 and pool_size >= k")
    pool = rng.uniform(problem.lower, problem.upper, size=(pool_size, problem.dim))
    chosen = select_by_residual(pool, residual_values(problem, scheme, state, pool), k)
    return np.vstack([interior, chosen]), chosen


def select_by_residual(pool: np.ndarray, residuals: np.ndarray, k: int) -> np.ndarray:
    """The ``k`` rows of ``pool`` with largest |residual|, earlier rows winning ties."""
    order = np.argsort(-np.abs(residuals), kind="stable")
    return pool[order[:k]]


# -- training loop ---------------------------------------------------------------

@dataclass
class RunResult:
    config: dict
    status: str = "ok"
    diverged: bool = False
    message: str = ""
    history: list = field(default_factory=list)
    l2_error: float | None = None
    param_errors: dict = field(default_factory=dict)
    coeff_history: list = field(default_factory=list)
    interior_counts: list = field(default_factory=list)
    wall_s: float = 0.0
    resolved: dict = field(default_factory=dict)
    state: ModelState | None = None

    def to_json(self) -> dict:
        return {
            "status": self.status, "diverged": self.diverged, "message": self.message,
            "l2_error": self.l2_error, "param_errors": self.param_errors,
            "wall_s": self.wall_s, "resolved": self.resolved, "config": self.config,
            "history": self.history, "coeff_history": self.coeff_history,
            "interior_counts": self.interior_counts,
        }

    def write(self, out_dir) -> None:
        from pathlib import Path

        out = Path(out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "run.json").write_text(json.dumps(self.to_json(), indent=2))
            with open(out / "history.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(HISTORY_COLUMNS)
                for row in self.history:
                    w.writerow(["" if row.get(c) is None else row[c] for c in HISTORY_COLUMNS])
        except OSError as exc:
            raise OutputError(f"cannot write results to {out}: {exc}") from exc


@dataclass
class _Run:
    """Everything a training run needs, built once from a config."""

    cfg: ExperimentConfig
    problem: ProblemDefinition
    scheme: AugmentationScheme
    arch: MLPArchitecture
    state: ModelState
    sets: PointSets
    weights: LossWeights
    inverse: InverseSpec | None
    grid: np.ndarray
    grid_ref: np.ndarray
    source_ref: np.ndarray | None


def build_run(cfg: ExperimentConfig) -> _Run:
    cfg = resolve(cfg)
    overrides = {"d": cfg.allen_cahn_d} if cfg.problem == "allen-cahn1d" else {}
    problem = registry_get(cfg.problem, **overrides)
    scheme = resolved_scheme(cfg.scheme, problem)
    arch = MLPArchitecture(augmented_dim(scheme, problem.dim), tuple(cfg.hidden), 1)
    net = init_glorot(arch, cfg.seed)
    sets = sample_points(problem, SamplingPlan(cfg.n_interior, cfg.n_boundary, cfg.n_initial,
                                               cfg.distribution, cfg.sampling_seed))
    inverse = None
    source_net = None
    coeffs = {}
    if problem.is_inverse:
        if cfg.n_measure < 1:
            raise ConfigError(f"{problem.name} needs n_measure >= 1")
        meas = make_measurements(problem, cfg.measure_layout, cfg.n_measure,
                                 seed=cfg.measure_seed, noise=cfg.noise)
        src_arch = None
        if problem.unknown_source:
            src_arch = MLPArchitecture(arch.input_dim, tuple(cfg.source_hidden), 1)
            source_net = init_glorot(src_arch, cfg.seed + 1)
        coeffs = {name: float(cfg.c_init) for name in problem.unknowns}
        inverse = InverseSpec(meas, dict(coeffs), src_arch)
    grid = test_grid(problem)
    grid_ref = evaluate_reference(problem, grid)
    source_ref = problem.source(grid) if problem.unknown_source else None
    weights = LossWeights(cfg.w_f, cfg.w_b, cfg.w_i, cfg.w_data)
    return _Run(cfg, problem, scheme, arch, ModelState(net, source_net, coeffs), sets, weights,
                inverse, grid, grid_ref, source_ref)


def parameter_errors(run: _Run, state: ModelState) -> dict:
    """Relative error of each trainable coefficient, plus the source L2 error if learned."""
    from .bench import l2_relative_error as l2

    out = {}
    for name, truth in run.problem.unknowns.items():
        out[name] = abs(state.coeffs[name] - truth) / abs(truth)
    if run.source_ref is not None:
        pred = forward_values(state.source_net.arch, state.source_net,
                              augment(run.scheme, run.grid).tau).value[:, 0]
        out["source_l2"] = l2(pred, run.source_ref)
    return out


def train(cfg: ExperimentConfig, progress=None) -> RunResult:
    """Full-batch Adam on the composite loss; logs every ``log_every`` epochs.

    Divergence (loss above 1e8 or non-finite) stops the run and returns a
    result flagged ``diverged`` rather than raising.
    """
    from .bench import l2_relative_error as l2

    t0 = time.perf_counter()
    run = build_run(cfg)
    cfg = run.cfg
    state = run.state
    adam = AdamState(lr=cfg.lr)
    interior = run.sets.interior
    rar_rng = np.random.default_rng([cfg.sampling_seed, 7919])
    batch = prepare_batch(run.problem, run.scheme, run.sets, run.inverse)
    result = RunResult(config=cfg.to_dict())
    result.resolved = {
        "input_dim": run.arch.input_dim, "architecture": list(run.arch.sizes),
        "scheme": run.scheme.name, "mask": list(run.scheme.mask),
        "adam": adam.hyperparameters(), "distribution": cfg.distribution,
        "points": run.sets.counts(), "test_grid_points": len(run.grid),
        "divergence_threshold": DIVERGENCE_THRESHOLD,
        "measurements": len(run.inverse.measurements) if run.inverse else 0,
        "problem_coefficients": dict(run.problem.coefficients),
    }
    result.interior_counts.append([0, len(interior)])
    rar_done = 0
    epoch = 0
    try:
        for epoch in range(cfg.epochs + 1):
            rec = ad.Recording()
            net_w, src_w, coeffs = state.bind(rec)
            src_arch = state.source_net.arch if state.source_net is not None else None
            terms = _loss_from_bound(run.problem, run.arch, batch, run.weights,
                                     net_w, src_w, coeffs, src_arch)
            total = float(terms.total.value)
            if not np.isfinite(total) or total > DIVERGENCE_THRESHOLD:
                raise DivergenceError(epoch, total)
            if epoch % cfg.log_every == 0 or epoch == cfg.epochs:
                row = {"epoch": epoch, **terms.values()}
                row["l2_error"] = l2(predict(run.problem, run.scheme, state.net, run.grid),
                                     run.grid_ref)
                result.history.append(row)
                if state.coeffs:
                    result.coeff_history.append({"epoch": epoch, **state.coeffs})
                if progress is not None:
                    progress(row)
            if epoch == cfg.epochs:
                break
            grad = ad.parameter_gradient(rec, terms.total)
            new_flat, adam = adam_step(adam, state.flat(), grad)
            state = state.with_flat(new_flat)
            if (cfg.rar_rounds and rar_done < cfg.rar_rounds
                    and (epoch + 1) % cfg.rar_every == 0 and epoch + 1 < cfg.epochs):
                interior, _ = rar_refine(run.problem, run.scheme, state, interior,
                                         cfg.rar_pool, cfg.rar_k, rar_rng)
                run.sets = PointSets(interior, run.sets.boundary, run.sets.initial)
                batch.interior = _interior_batch(run.scheme, interior)
                rar_done += 1
                result.interior_counts.append([epoch + 1, len(interior)])
    except DivergenceError as exc:
        result.status, result.diverged, result.message = "diverged", True, str(exc)
    except NumericOverflowError as exc:
        result.status, result.diverged = "diverged", True
        result.message = f"epoch {epoch}: {exc}"
    result.state = state
    if result.history:
        result.l2_error = result.history[-1]["l2_error"]
    if not result.diverged or result.history:
        result.param_errors = parameter_errors(run, state)
    result.resolved["points"]["interior"] = len(interior)
    result.wall_s = time.perf_counter() - t0
    return result


def solve_inverse(cfg: ExperimentConfig, progress=None) -> RunResult:
    """Train an inverse problem; the result carries the coefficient trajectory and errors."""
    cfg = resolve(cfg)
    if not registry_get(cfg.problem).is_inverse:
        raise ConfigError(f"{cfg.problem} is not an inverse problem")
    return train(cfg, progress)


__all__ = [
    "SamplingPlan", "PointSets", "sample_points", "LossWeights", "InverseSpec", "ModelState",
    "PreparedBatch", "prepare_batch", "LossTerms", "assemble_loss", "baseline_pinn_loss",
    "residual_values", "predict", "rar_refine", "select_by_residual", "parameter_errors",
    "RunResult", "train", "solve_inverse", "build_run", "HISTORY_COLUMNS", "DIVERGENCE_THRESHOLD",
]
