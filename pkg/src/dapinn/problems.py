"""Benchmark PDE registry: geometry, residual operators, data and references.

Coordinates are ordered spatial first, then time. Residuals are written in
the form that vanishes on the exact solution and take a :class:`Fields`
bundle, so the same operator serves network surrogates (tape nodes) and the
closed-form references (hyper-duals, for transcription checks).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import HyperDual
from .errors import ConfigError, OutputError, ReferenceUnavailable, UsageError
from .references import BURGERS_NU, allen_cahn_reference, burgers_cole_hopf

PI = np.pi


# -- math that works on arrays, tape nodes and hyper-duals --------------------

def _sin(v):
    if isinstance(v, HyperDual):
        return v.sin()
    if isinstance(v, ad.Node):
        return ad.sin(v)
    return np.sin(v)


def _cos(v):
    if isinstance(v, HyperDual):
        return v.cos()
    if isinstance(v, ad.Node):
        return ad.cos(v)
    return np.cos(v)


def _exp(v):
    if isinstance(v, HyperDual):
        return v.exp()
    if isinstance(v, ad.Node):
        return ad.exp(v)
    return np.exp(v)


def _ipow(v, k: int):
    out = v
    for _ in range(k - 1):
        out = out * v
    return out


@dataclass
class Fields:
    """Surrogate values and derivatives at a batch of points."""

    x: np.ndarray
    u: object
    du: Sequence
    d2u: Sequence
    coeffs: Mapping[str, object] = field(default_factory=dict)
    source: object = None


@dataclass(frozen=True)
class ProblemDefinition:
    name: str
    spatial_dim: int
    time_dependent: bool
    bounds: tuple[tuple[float, float], ...]
    residual: Callable[[Fields], object]
    boundary_value: Callable[[np.ndarray], np.ndarray]
    initial_value: Callable[[np.ndarray], np.ndarray] | None = None
    solution: Callable | None = None
    oracle: Callable | None = None
    source: Callable | None = None
    coefficients: Mapping[str, float] = field(default_factory=dict)
    unknowns: Mapping[str, float] = field(default_factory=dict)
    unknown_source: bool = False
    fourier_period: float = 2 * PI
    description: str = ""

    @property
    def dim(self) -> int:
        return self.spatial_dim + int(self.time_dependent)

    @property
    def closed_form(self) -> bool:
        return self.solution is not None

    @property
    def is_inverse(self) -> bool:
        return bool(self.unknowns) or self.unknown_source

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])

    def boundary_faces(self) -> list[tuple[int, float]]:
        """(coordinate, fixed value) for each Dirichlet face of the spatial domain."""
        return [(k, self.bounds[k][side]) for k in range(self.spatial_dim) for side in (0, 1)]

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.all((pts >= self.lower - tol) & (pts <= self.upper + tol), axis=1)


def evaluate_reference(problem: ProblemDefinition, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != problem.dim:
        raise UsageError(f"{problem.name} points need {problem.dim} columns, got {pts.shape[1]}")
    if problem.solution is not None:
        return np.asarray(problem.solution(*pts.T), dtype=np.float64) * np.ones(len(pts))
    if problem.oracle is not None:
        return problem.oracle(pts)
    raise ReferenceUnavailable(f"{problem.name} has no reference solution")


# -- 1D Poisson ----------------------------------------------------------------

def _poisson1d_u(x):
    return x + _sin(x) + _sin(2 * x) / 2 + _sin(3 * x) / 3 + _sin(7 * x) / 7 + _sin(8 * x) / 8


def _poisson1d_f(x):
    return _sin(x) + 2 * _sin(2 * x) + 3 * _sin(3 * x) + 7 * _sin(7 * x) + 8 * _sin(8 * x)


def _poisson1d_residual(fl: Fields):
    # -u_xx = f  written as u_xx + f = 0
    return fl.d2u[0] + _poisson1d_f(fl.x[:, 0])


def _pi_line(x):
    return np.where(np.isclose(x, PI), PI, 0.0)


# -- 2D Poisson ----------------------------------------------------------------

POISSON2D_A = 10


def _poisson2d_u(x, y, a=POISSON2D_A):
    q = x * (1 - x) * y * (1 - y)
    return 2.0 ** (4 * a) * _ipow(q, a)


def _poisson2d_f(x, y, a=POISSON2D_A):
    """Source with -laplace(u) = f for the product solution above."""
    qxy = ((x - 1) * x * (y - 1) * y) ** a
    tx = 16.0**a * a * (a * (1 - 2 * x) ** 2 - 2 * x**2 + 2 * x - 1) * qxy / ((x - 1) ** 2 * x**2)
    ty = 16.0**a * a * (a * (1 - 2 * y) ** 2 - 2 * y**2 + 2 * y - 1) * qxy / ((y - 1) ** 2 * y**2)
    return -(tx + ty)


def _poisson2d_residual(fl: Fields):
    return fl.d2u[0] + fl.d2u[1] + _poisson2d_f(fl.x[:, 0], fl.x[:, 1])


# -- heat ------------------------------------------------------------------------

HEAT_A = 0.4


def _heat_u(x, t):
    return _exp(-HEAT_A * PI**2 * t) * _sin(PI * x)


def _heat_residual(fl: Fields):
    return fl.du[1] - HEAT_A * fl.d2u[0]


# -- Burgers ---------------------------------------------------------------------

def _burgers_residual(fl: Fields):
    return fl.du[1] + fl.u * fl.du[0] - BURGERS_NU * fl.d2u[0]


# -- diffusion-reaction --------------------------------------------------------

def _dr_u(x, t):
    s = _sin(x) + _sin(2 * x) / 2 + _sin(3 * x) / 3 + _sin(4 * x) / 4 + _sin(8 * x) / 8
    return _exp(-t) * s


def _dr_f(x, t):
    return np.exp(-t) * (1.5 * np.sin(2 * x) + 8 / 3 * np.sin(3 * x)
                         + 15 / 4 * np.sin(4 * x) + 63 / 8 * np.sin(8 * x))


def _dr_residual(fl: Fields):
    return fl.du[1] - fl.d2u[0] - _dr_f(fl.x[:, 0], fl.x[:, 1])


# -- Allen-Cahn ------------------------------------------------------------------

ALLEN_CAHN_D = 0.001


def _make_allen_cahn(d: float):
    def residual(fl: Fields):
        u = fl.u
        return fl.du[1] - d * fl.d2u[0] - 5.0 * (u - u * u * u)

    return residual


# -- inverse Poisson -------------------------------------------------------------

def _inv_poisson_u(x):
    return x + _sin(x) + _sin(2 * x) / 2 + _sin(3 * x) / 3 + _sin(4 * x) / 4


def _inv_poisson_f(x):
    return _sin(x) + 2 * _sin(2 * x) + 3 * _sin(3 * x) + 4 * _sin(4 * x)


def _inv_poisson_residual(fl: Fields):
    src = fl.source if fl.source is not None else _inv_poisson_f(fl.x[:, 0])
    return fl.d2u[0] + src


# -- inverse diffusion -----------------------------------------------------------

def _inv_diff_u(x, t):
    return _exp(-t) * _sin(PI * x)


def _inv_diff_k(x, t):
    return np.exp(-t) * (PI**2 - 1) * np.sin(PI * x)


def _inv_diff_residual(fl: Fields):
    c = fl.coeffs.get("C", 1.0)
    return fl.du[1] - c * fl.d2u[0] - _inv_diff_k(fl.x[:, 0], fl.x[:, 1])


def _zero(points):
    return np.zeros(len(np.atleast_2d(points)))


def _from_solution(fn):
    def values(points):
        pts = np.atleast_2d(points)
        return np.asarray(fn(*pts.T), dtype=np.float64) * np.ones(len(pts))

    return values


def _build(name: str, overrides: Mapping[str, float] | None = None) -> ProblemDefinition:
    overrides = dict(overrides or {})
    if name == "poisson1d":
        return ProblemDefinition(
            name, 1, False, ((0.0, PI),), _poisson1d_residual,
            boundary_value=_from_solution(_poisson1d_u), solution=_poisson1d_u,
            source=_poisson1d_f, fourier_period=2 * PI,
            description="-u'' = sum_i i sin(ix) + 7 sin 7x + 8 sin 8x on [0, pi]",
        )
    if name == "poisson2d":
        return ProblemDefinition(
            name, 2, False, ((0.0, 1.0), (0.0, 1.0)), _poisson2d_residual,
            boundary_value=_zero, solution=_poisson2d_u, source=_poisson2d_f,
            coefficients={"a": POISSON2D_A}, fourier_period=1.0,
            description="-laplace u = f on [0,1]^2, u = 2^40 (x(1-x)y(1-y))^10",
        )
    if name == "heat1d":
        return ProblemDefinition(
            name, 1, True, ((0.0, 1.0), (0.0, 1.0)), _heat_residual,
            boundary_value=_zero, initial_value=lambda p: np.sin(PI * np.atleast_2d(p)[:, 0]),
            solution=_heat_u, coefficients={"a": HEAT_A}, fourier_period=2.0,
            description="u_t = 0.4 u_xx on [0,1]x[0,1]",
        )
    if name == "burgers1d":
        return ProblemDefinition(
            name, 1, True, ((-1.0, 1.0), (0.0, 1.0)), _burgers_residual,
            boundary_value=_zero, initial_value=lambda p: -np.sin(PI * np.atleast_2d(p)[:, 0]),
            oracle=burgers_cole_hopf, coefficients={"nu": BURGERS_NU}, fourier_period=2.0,
            description="u_t + u u_x = (0.01/pi) u_xx, u(x,0) = -sin(pi x)",
        )
    if name == "diffusion-reaction1d":
        return ProblemDefinition(
            name, 1, True, ((-PI, PI), (0.0, 1.0)), _dr_residual,
            boundary_value=_zero, initial_value=lambda p: _dr_u(np.atleast_2d(p)[:, 0], 0.0),
            solution=_dr_u, source=_dr_f, fourier_period=2 * PI,
            description="u_t - u_xx = f on [-pi,pi]x[0,1]",
        )
    if name == "allen-cahn1d":
        d = float(overrides.pop("d", ALLEN_CAHN_D))
        return ProblemDefinition(
            name, 1, True, ((-1.0, 1.0), (0.0, 1.0)), _make_allen_cahn(d),
            boundary_value=lambda p: -np.ones(len(np.atleast_2d(p))),
            initial_value=lambda p: (lambda x: x**2 * np.cos(PI * x))(np.atleast_2d(p)[:, 0]),
            oracle=lambda p: allen_cahn_reference(p, d=d), coefficients={"d": d},
            fourier_period=2.0,
            description="u_t = d u_xx + 5(u - u^3), u(x,0) = x^2 cos(pi x), u(+-1,t) = -1",
        )
    if name == "inverse-poisson1d":
        return ProblemDefinition(
            name, 1, False, ((0.0, PI),), _inv_poisson_residual,
            boundary_value=_from_solution(_inv_poisson_u), solution=_inv_poisson_u,
            source=_inv_poisson_f, unknown_source=True, fourier_period=2 * PI,
            description="-u'' = f with f = sum_{i<=4} i sin(ix) unknown",
        )
    if name == "inverse-diffusion1d":
        return ProblemDefinition(
            name, 1, True, ((-1.0, 1.0), (0.0, 1.0)), _inv_diff_residual,
            boundary_value=_zero, initial_value=lambda p: np.sin(PI * np.atleast_2d(p)[:, 0]),
            solution=_inv_diff_u, source=_inv_diff_k, unknowns={"C": 1.0},
            fourier_period=2.0,
            description="u_t = C u_xx + k with C unknown (true 1)",
        )
    raise UsageError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")


PROBLEM_NAMES = (
    "poisson1d", "poisson2d", "heat1d", "burgers1d", "diffusion-reaction1d",
    "allen-cahn1d", "inverse-poisson1d", "inverse-diffusion1d",
)


def registry_get(name: str, **overrides) -> ProblemDefinition:
    """Look up a benchmark; ``d=`` overrides the Allen-Cahn diffusion coefficient."""
    if overrides and name != "allen-cahn1d":
        raise UsageError(f"{name} takes no overrides, got {sorted(overrides)}")
    return _build(name, overrides)


def reference_residual(problem: ProblemDefinition, points) -> np.ndarray:
    """Residual operator applied to the closed-form solution via hyper-dual derivatives."""
    if problem.solution is None:
        raise ReferenceUnavailable(f"{problem.name} has no closed-form solution")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = problem.dim
    coords = [ad.lift_input(pts[:, k], k, d) for k in range(d)]
    u = problem.solution(*coords)
    fl = Fields(
        pts, u.value, [u.first[k] for k in range(d)], [u.d2(k, k) for k in range(d)],
        coeffs=dict(problem.unknowns),
    )
    return ad.value_of(problem.residual(fl))


# -- measurements ----------------------------------------------------------------

ROLES = ("boundary", "initial", "final", "interior")


@dataclass
class MeasurementSet:
    points: np.ndarray
    values: np.ndarray
    roles: tuple[str, ...]

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        self.roles = tuple(self.roles)
        if not (len(self.points) == len(self.values) == len(self.roles)):
            raise UsageError("measurement points, values and roles differ in length")
        bad = set(self.roles) - set(ROLES)
        if bad:
            raise UsageError(f"unknown measurement roles {sorted(bad)}")

    def __len__(self):
        return len(self.values)

    def to_csv(self, path) -> None:
        cols = ["x", "t"] if self.points.shape[1] == 2 else ["x"]
        try:
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(cols + ["u", "role"])
                for p, v, r in zip(self.points, self.values, self.roles):
                    w.writerow([repr(float(c)) for c in p] + [repr(float(v)), r])
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from exc

    @classmethod
    def from_csv(cls, path) -> "MeasurementSet":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if header[-2:] != ["u", "role"] or header[:-2] not in (["x"], ["x", "t"]):
            raise UsageError(f"unexpected measurement header {header}")
        nc = len(header) - 2
        pts = np.array([[float(c) for c in r[:nc]] for r in body]).reshape(-1, nc)
        return cls(pts, [float(r[nc]) for r in body], [r[nc + 1] for r in body])


LAYOUTS = ("uniform-interior", "random-interior", "boundary+initial+final", "boundary+initial")


def _split(count: int, parts: int) -> list[int]:
    base, rem = divmod(count, parts)
    return [base + (1 if i < rem else 0) for i in range(parts)]


def make_measurements(problem: ProblemDefinition, layout: str, count: int,
                      seed: int = 0, noise: float = 0.0) -> MeasurementSet:
    """Synthetic observations of the reference solution.

    ``uniform-interior``: equispaced points strictly inside a 1D steady domain.
    ``boundary+initial+final``: equispaced points on x = lo, x = hi, t = 0 and
    t = T, ``count`` split as evenly as possible across the four lines (first
    lines get the remainder). ``boundary+initial`` drops the final line.
    """
    if count < 1:
        raise ConfigError("measurement count must be >= 1")
    if noise < 0:
        raise ConfigError("noise must be >= 0")
    rng = np.random.default_rng(seed)
    lo, hi = problem.lower, problem.upper
    if layout in ("uniform-interior", "random-interior"):
        if problem.time_dependent or problem.spatial_dim != 1:
            raise ConfigError(f"layout {layout!r} needs a steady 1D problem")
        if layout == "uniform-interior":
            x = np.linspace(lo[0], hi[0], count + 2)[1:-1]
        else:
            x = np.sort(rng.uniform(lo[0], hi[0], count))
        pts = x[:, None]
        roles = ["interior"] * count
    elif layout in ("boundary+initial+final", "boundary+initial"):
        if not problem.time_dependent or problem.spatial_dim != 1:
            raise ConfigError(f"layout {layout!r} needs a 1D time-dependent problem")
        lines = 4 if layout.endswith("final") else 3
        sizes = _split(count, lines)
        t_lo, t_hi = lo[1], hi[1]
        chunks, roles = [], []
        for side, m in zip((lo[0], hi[0]), sizes[:2]):
            t = np.linspace(t_lo, t_hi, m + 2)[1:-1]
            chunks.append(np.column_stack([np.full(m, side), t]))
            roles += ["boundary"] * m
        for tt, m, role in zip((t_lo, t_hi), sizes[2:], ("initial", "final")):
            x = np.linspace(lo[0], hi[0], m)
            chunks.append(np.column_stack([x, np.full(m, tt)]))
            roles += [role] * m
        pts = np.vstack(chunks)
    else:
        raise ConfigError(f"unknown measurement layout {layout!r}; choose from {LAYOUTS}")
    values = evaluate_reference(problem, pts)
    if noise > 0:
        values = values + noise * rng.standard_normal(len(values))
    return MeasurementSet(pts, values, roles)


def test_grid(problem: ProblemDefinition) -> np.ndarray:
    """Evaluation grid for L2 metrics: 1000 points in 1D, 101 x 101 otherwise."""
    if problem.dim == 1:
        return np.linspace(problem.lower[0], problem.upper[0], 1000)[:, None]
    axes = [np.linspace(a, b, 101) for a, b in problem.bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


test_grid.__test__ = False
