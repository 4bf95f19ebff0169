"""Error metric, sweep runner and scheme comparison."""
from __future__ import annotations

import csv
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SWEEP_AXES, ExperimentConfig, resolve
from .errors import ConfigError, OutputError, UndefinedMetricError, UsageError

SWEEP_COLUMNS = ("axis", "value", "seed", "l2_error", "param_error", "diverged", "wall_s")


def l2_relative_error(pred, ref) -> float:
    """||pred - ref||_2 / ||ref||_2."""
    p = np.asarray(pred, dtype=np.float64).ravel()
    r = np.asarray(ref, dtype=np.float64).ravel()
    if p.shape != r.shape or r.size == 0:
        raise UsageError(f"need equal nonempty lengths, got {p.size} and {r.size}")
    denom = np.linalg.norm(r)
    if denom == 0.0:
        raise UndefinedMetricError("reference has zero norm")
    return float(np.linalg.norm(p - r) / denom)


@dataclass(frozen=True)
class SweepConfig:
    base: ExperimentConfig
    axis: str
    values: tuple
    seeds: tuple[int, ...] = (0, 1, 2)

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; choose from {SWEEP_AXES}")
        if not self.values:
            raise ConfigError("sweep needs at least one axis value")
        if not self.seeds:
            raise ConfigError("sweep needs at least one seed")

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "SweepConfig":
        """Build from a config's ``[sweep]`` section.

        A ``width`` and ``depth`` pair becomes one grid axis ``width x depth``;
        any other single axis is swept on its own.
        """
        axes = dict(cfg.sweep)
        seeds = cfg.sweep_seeds or (cfg.seed,)
        if not axes:
            return cls(cfg, "epochs", (cfg.epochs,), seeds)
        if set(axes) == {"width", "depth"}:
            grid = tuple((w, d) for w in axes["width"] for d in axes["depth"])
            return cls(cfg, "width", grid, seeds)
        if len(axes) != 1:
            raise ConfigError(f"sweep one axis (or width with depth), got {sorted(axes)}")
        ((axis, values),) = axes.items()
        return cls(cfg, axis, values, seeds)

    def cells(self) -> list[tuple[object, ExperimentConfig]]:
        out = []
        for v in self.values:
            out.append((v, resolve(_apply_axis(self.base, self.axis, v))))
        return out


def _apply_axis(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis == "width":
        if isinstance(value, tuple):
            w, d = value
            return cfg.replace(hidden=(int(w),) * int(d), source_hidden=None)
        return cfg.replace(hidden=(int(value),) * len(cfg.hidden), source_hidden=None)
    if axis == "depth":
        return cfg.replace(hidden=(cfg.hidden[0],) * int(value), source_hidden=None)
    if axis == "scheme":
        return cfg.replace(scheme=str(value))
    if axis == "lr":
        return cfg.replace(lr=float(value))
    return cfg.replace(**{axis: int(value)})


def _value_label(value) -> str:
    if isinstance(value, tuple):
        return "x".join(str(v) for v in value)
    return str(value)


def _headline_param_error(param_errors: dict):
    if not param_errors:
        return None
    if "C" in param_errors:
        return param_errors["C"]
    return next(iter(param_errors.values()))


def _run_cell(args):
    from .training import train

    axis, value, seed, cfg = args
    cfg = resolve(cfg.replace(seed=seed, sampling_seed=None, measure_seed=None))
    res = train(cfg)
    return {
        "axis": axis, "value": _value_label(value), "seed": seed,
        "l2_error": res.l2_error, "param_error": _headline_param_error(res.param_errors),
        "diverged": res.diverged, "wall_s": res.wall_s,
    }


def _median(xs):
    xs = [x for x in xs if x is not None and np.isfinite(x)]
    return statistics.median(xs) if xs else None


def summarize(rows: list[dict]) -> dict:
    """Per-cell medians over seeds; diverged runs are excluded from the medians but counted."""
    cells: dict = {}
    for r in rows:
        cells.setdefault(r["value"], []).append(r)
    out = {}
    for value, rs in cells.items():
        ok = [r for r in rs if not r["diverged"]]
        out[value] = {
            "runs": len(rs), "diverged": len(rs) - len(ok),
            "median_l2_error": _median([r["l2_error"] for r in ok]),
            "median_param_error": _median([r["param_error"] for r in ok]),
            "median_wall_s": _median([r["wall_s"] for r in rs]),
        }
    return out


def run_sweep(sweep: SweepConfig, jobs: int = 1, out_dir=None) -> tuple[list[dict], dict]:
    """Train every (cell, seed) pair; rows come back in cell-major, seed-minor order.

    With ``out_dir`` the rows go to ``sweep.csv`` and the medians to ``summary.json``.
    """
    tasks = [(sweep.axis, v, s, cfg) for v, cfg in sweep.cells() for s in sweep.seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, tasks))
    else:
        rows = [_run_cell(t) for t in tasks]
    summary = summarize(rows)
    if out_dir is not None:
        write_sweep(out_dir, rows, summary, sweep)
    return rows, summary


def write_sweep(out_dir, rows, summary, sweep: SweepConfig | None = None) -> None:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SWEEP_COLUMNS)
            for r in rows:
                w.writerow(["" if r[c] is None else r[c] for c in SWEEP_COLUMNS])
        doc = {"cells": summary}
        if sweep is not None:
            doc.update(axis=sweep.axis, seeds=list(sweep.seeds), base=sweep.base.to_dict())
        (out / "summary.json").write_text(json.dumps(doc, indent=2))
    except OSError as exc:
        raise OutputError(f"cannot write sweep results to {out}: {exc}") from exc


@dataclass
class SchemeComparison:
    medians: dict
    ordering: list
    ratios: dict
    rows: list

    def ratio(self, a: str, b: str) -> float:
        """median(a) / median(b)."""
        return self.ratios[a][b]


def compare_schemes(base: ExperimentConfig, schemes, seeds=(0, 1, 2), jobs: int = 1,
                    out_dir=None) -> SchemeComparison:
    """Median L2 error per scheme at a fixed budget, ranked best first.

    ``ratios[a][b]`` is median(a) / median(b); the diagonal is 1.
    """
    schemes = tuple(schemes)
    if not schemes:
        raise ConfigError("compare_schemes needs at least one scheme")
    rows, summary = run_sweep(SweepConfig(base, "scheme", schemes, tuple(seeds)), jobs, out_dir)
    medians = {s: summary[s]["median_l2_error"] for s in schemes}
    ranked = sorted(schemes, key=lambda s: (medians[s] is None, medians[s] or 0.0))
    ratios = {a: {b: (medians[a] / medians[b] if medians[a] is not None and medians[b]
                      else None) for b in schemes} for a in schemes}
    return SchemeComparison(medians, ranked, ratios, rows)


__all__ = [
    "l2_relative_error", "SweepConfig", "run_sweep", "summarize", "write_sweep",
    "compare_schemes", "SchemeComparison", "SWEEP_COLUMNS",
]
