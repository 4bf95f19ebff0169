"""Experiment configuration and its key=value file format.

A config file is a list of ``[section]`` headers followed by ``key = value``
lines; ``#`` starts a comment. Every key belongs to exactly one section::

    [experiment]
    problem = poisson1d
    scheme = power2
    hidden = 20, 20, 20, 20
    epochs = 15000

    [sampling]
    n_interior = 32
    distribution = equispaced

Unset keys take documented defaults; problem-dependent defaults (boundary
counts, measurement layout, ...) are filled in by :func:`resolve`. The
``[sweep]`` section holds axis value lists, e.g. ``width = 10, 20, 30``;
scheme lists are whitespace separated because fourier options contain commas.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

SECTIONS = {
    "experiment": ("problem", "scheme", "hidden", "epochs", "lr", "seed", "log_every"),
    "sampling": ("n_interior", "n_boundary", "n_initial", "distribution", "sampling_seed"),
    "loss": ("w_f", "w_b", "w_i", "w_data"),
    "inverse": ("n_measure", "measure_layout", "noise", "c_init", "source_hidden",
                "measure_seed"),
    "rar": ("rar_rounds", "rar_pool", "rar_k", "rar_every"),
    "problem": ("allen_cahn_d",),
    "output": ("out",),
}

SWEEP_AXES = ("n_interior", "epochs", "width", "depth", "scheme", "lr")
DISTRIBUTIONS = ("uniform-random", "equispaced")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "poisson1d"
    scheme: str = "identity"
    hidden: tuple[int, ...] = (20, 20, 20, 20)
    epochs: int = 10000
    lr: float = 1e-3
    seed: int = 0
    log_every: int = 100
    n_interior: int = 32
    n_boundary: int | None = None
    n_initial: int | None = None
    distribution: str = "uniform-random"
    sampling_seed: int | None = None
    w_f: float = 1.0
    w_b: float = 1.0
    w_i: float = 1.0
    w_data: float = 1.0
    n_measure: int | None = None
    measure_layout: str | None = None
    noise: float = 0.0
    c_init: float = 0.5
    source_hidden: tuple[int, ...] | None = None
    measure_seed: int | None = None
    rar_rounds: int = 0
    rar_pool: int = 1000
    rar_k: int = 20
    rar_every: int = 1000
    allen_cahn_d: float = 0.001
    out: str = "runs/default"
    sweep: tuple[tuple[str, tuple], ...] = ()
    sweep_seeds: tuple[int, ...] = ()

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["hidden"] = list(self.hidden)
        d["source_hidden"] = None if self.source_hidden is None else list(self.source_hidden)
        d["sweep"] = [[axis, list(vals)] for axis, vals in self.sweep]
        d["sweep_seeds"] = list(self.sweep_seeds)
        return d


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_KEY_SECTION = {k: sec for sec, keys in SECTIONS.items() for k in keys}


def _split_list(text: str) -> list[str]:
    """Comma- and/or space-separated items; an empty item (``4,,4``) is an error."""
    items = [v.strip() for v in text.split(",")] if "," in text else text.split()
    if any(not v for v in items):
        raise ValueError("empty list item")
    return [w for v in items for w in v.split()]


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in _split_list(text))


def _coerce(key: str, raw: str, line: int):
    kind = _FIELD_TYPES[key]
    text = raw.strip()
    try:
        if text.lower() == "none" and "None" in kind:
            return None
        if kind.startswith("tuple[int"):
            vals = _int_list(text)
            if not vals:
                raise ValueError("empty list")
            return vals
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value {raw.strip()!r} for {key} (expected {kind})", line) from None


def _parse_axis(axis: str, raw: str, line: int) -> tuple:
    try:
        if axis == "scheme":
            vals = tuple(raw.split())
        elif axis == "lr":
            vals = tuple(float(v) for v in _split_list(raw))
        else:
            vals = _int_list(raw)
    except ValueError:
        raise ConfigError(f"bad value list {raw.strip()!r} for sweep axis {axis}", line) from None
    if not vals:
        raise ConfigError(f"sweep axis {axis} has no values", line)
    return vals


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    values: dict = {}
    sweep: list = []
    section = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SECTIONS and section != "sweep":
                raise ConfigError(f"unknown section [{section}] in {source}", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {rawline.strip()!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", lineno)
        key, _, raw = line.partition("=")
        key = key.strip()
        if section == "sweep":
            if key == "seeds":
                try:
                    values["sweep_seeds"] = _int_list(raw)
                except ValueError:
                    raise ConfigError(f"bad seed list {raw.strip()!r}", lineno) from None
            elif key in SWEEP_AXES:
                if any(a == key for a, _ in sweep):
                    raise ConfigError(f"duplicate sweep axis {key}", lineno)
                sweep.append((key, _parse_axis(key, raw, lineno)))
            else:
                raise ConfigError(f"unknown sweep axis {key!r}", lineno)
            continue
        if key not in _KEY_SECTION:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if _KEY_SECTION[key] != section:
            raise ConfigError(f"key {key!r} belongs in [{_KEY_SECTION[key]}], not [{section}]",
                              lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        values[key] = _coerce(key, raw, lineno)
    cfg = ExperimentConfig(**values, sweep=tuple(sweep))
    return resolve(cfg)


def parse_config(path) -> ExperimentConfig:
    """Read, validate and resolve a config file; DAPINN_SEED sets the seed if the file does not."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config_text(text, str(path))
    env_seed = os.environ.get("DAPINN_SEED")
    if env_seed is not None and "seed" not in _explicit_keys(text):
        try:
            cfg = resolve(cfg.replace(seed=int(env_seed), sampling_seed=None, measure_seed=None))
        except ValueError:
            raise ConfigError(f"DAPINN_SEED must be an integer, got {env_seed!r}") from None
    return cfg


def _explicit_keys(text: str) -> set[str]:
    keys = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        if "=" in line and not line.strip().startswith("["):
            keys.add(line.partition("=")[0].strip())
    return keys


# ---------------------------------------------------------------------------

def _problem_defaults(problem: str) -> dict:
    steady_1d = {"n_boundary": 2, "n_initial": 0}
    table = {
        "poisson1d": steady_1d,
        "poisson2d": {"n_boundary": 100, "n_initial": 0},
        "heat1d": {"n_boundary": 50, "n_initial": 50},
        "burgers1d": {"n_boundary": 100, "n_initial": 100},
        "diffusion-reaction1d": {"n_boundary": 50, "n_initial": 50},
        "allen-cahn1d": {"n_boundary": 50, "n_initial": 100},
        "inverse-poisson1d": {**steady_1d, "n_measure": 20, "measure_layout": "uniform-interior"},
        "inverse-diffusion1d": {"n_boundary": 0, "n_initial": 0, "n_measure": 80,
                                "measure_layout": "boundary+initial+final"},
    }
    if problem not in table:
        from .problems import PROBLEM_NAMES

        raise ConfigError(f"unknown problem {problem!r}; choose from {', '.join(PROBLEM_NAMES)}")
    return table[problem]


def resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill problem-dependent defaults and validate ranges."""
    from .augmentation import parse_scheme

    defaults = _problem_defaults(cfg.problem)
    changes = {}
    for key in ("n_boundary", "n_initial", "n_measure", "measure_layout"):
        if getattr(cfg, key) is None:
            changes[key] = defaults.get(key, 0 if key != "measure_layout" else "none")
    if cfg.sampling_seed is None:
        changes["sampling_seed"] = cfg.seed
    if cfg.measure_seed is None:
        changes["measure_seed"] = cfg.seed
    if cfg.source_hidden is None:
        changes["source_hidden"] = cfg.hidden
    cfg = cfg.replace(**changes)
    parse_scheme(cfg.scheme)
    for name, _ in cfg.sweep:
        if name == "scheme":
            for s in dict(cfg.sweep)["scheme"]:
                parse_scheme(s)
    if cfg.epochs < 0:
        raise ConfigError(f"epochs must be >= 0, got {cfg.epochs}")
    if cfg.lr <= 0:
        raise ConfigError("lr must be positive")
    if cfg.log_every < 1:
        raise ConfigError("log_every must be >= 1")
    if min(cfg.n_interior, cfg.n_boundary, cfg.n_initial, cfg.n_measure) < 0:
        raise ConfigError("point counts must be >= 0")
    if cfg.distribution not in DISTRIBUTIONS:
        raise ConfigError(f"distribution must be one of {DISTRIBUTIONS}")
    if min(cfg.w_f, cfg.w_b, cfg.w_i, cfg.w_data) < 0 or (cfg.w_f + cfg.w_b + cfg.w_i) == 0:
        raise ConfigError("loss weights must be >= 0 and not all zero")
    if cfg.noise < 0:
        raise ConfigError("noise must be >= 0")
    if cfg.rar_rounds < 0 or cfg.rar_k < 1 or cfg.rar_pool < cfg.rar_k or cfg.rar_every < 1:
        raise ConfigError("rar needs rounds >= 0, k >= 1, pool >= k, every >= 1")
    if cfg.allen_cahn_d <= 0:
        raise ConfigError("allen_cahn_d must be positive")
    if not cfg.hidden or min(cfg.hidden) < 1:
        raise ConfigError("hidden widths must be >= 1")
    return cfg


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: ExperimentConfig) -> str:
    """Serialize to the file format; ``parse_config_text(render_config(c)) == c``."""
    lines = []
    for sec, keys in SECTIONS.items():
        lines.append(f"[{sec}]")
        for key in keys:
            lines.append(f"{key} = {_fmt(getattr(cfg, key))}")
        lines.append("")
    if cfg.sweep or cfg.sweep_seeds:
        lines.append("[sweep]")
        for axis, vals in cfg.sweep:
            sep = " " if axis == "scheme" else ", "
            lines.append(f"{axis} = {sep.join(_fmt(v) for v in vals)}")
        if cfg.sweep_seeds:
            lines.append(f"seeds = {_fmt(cfg.sweep_seeds)}")
        lines.append("")
    return "\n".join(lines)


def input_width(cfg: ExperimentConfig) -> int:
    """Network input width implied by scheme and problem (never user-set)."""
    from .augmentation import augmented_dim, default_mask, parse_scheme
    from .problems import registry_get

    problem = registry_get(cfg.problem)
    scheme = parse_scheme(cfg.scheme).with_defaults(
        problem.fourier_period, default_mask(problem.spatial_dim, problem.time_dependent))
    return augmented_dim(scheme, problem.dim)


__all__ = [
    "ExperimentConfig", "parse_config", "parse_config_text", "render_config", "resolve",
    "input_width", "SECTIONS", "SWEEP_AXES",
]
