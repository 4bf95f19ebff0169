"""Command-line entry point: ``dapinn {run,inverse,sweep,verify}``.

Exit codes: 0 ok, 2 configuration error, 3 divergence, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .config import ExperimentConfig, parse_config, render_config, resolve
from .errors import ConfigError, DapinnError, DivergenceError, OutputError

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4


def _load(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if args.config else resolve(ExperimentConfig())
    changes = {}
    if args.seed is not None:
        changes.update(seed=args.seed, sampling_seed=None, measure_seed=None)
    if args.out is not None:
        changes["out"] = args.out
    return resolve(cfg.replace(**changes)) if changes else cfg


def _prepare_out(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _log(args, row):
    if not args.quiet:
        print(f"epoch {row['epoch']:>6}  loss {row['total']:.4e}  l2 {row['l2_error']:.4e}",
              flush=True)


def _finish_run(result, out: Path) -> int:
    from .network import save_checkpoint

    result.write(out)
    (out / "config.txt").write_text(render_config(resolve_from_echo(result.config)))
    if result.state is not None:
        save_checkpoint(out / "checkpoint.bin", result.state.net)
        if result.state.source_net is not None:
            save_checkpoint(out / "source_checkpoint.bin", result.state.source_net)
    print(json.dumps({"status": result.status, "l2_error": result.l2_error,
                      "param_errors": result.param_errors, "out": str(out)}))
    return EXIT_OK if result.status == "ok" else EXIT_DIVERGED


def resolve_from_echo(echo: dict) -> ExperimentConfig:
    """Rebuild a config from the ``config`` block of run.json."""
    d = dict(echo)
    d["hidden"] = tuple(d["hidden"])
    d["source_hidden"] = None if d["source_hidden"] is None else tuple(d["source_hidden"])
    d["sweep"] = tuple((a, tuple(v)) for a, v in d.get("sweep", ()))
    d["sweep_seeds"] = tuple(d.get("sweep_seeds", ()))
    return resolve(ExperimentConfig(**d))


def cmd_run(args) -> int:
    from .training import train

    cfg = _load(args)
    out = _prepare_out(cfg.out)
    return _finish_run(train(cfg, progress=lambda r: _log(args, r)), out)


def cmd_inverse(args) -> int:
    from .training import solve_inverse

    cfg = _load(args)
    out = _prepare_out(cfg.out)
    return _finish_run(solve_inverse(cfg, progress=lambda r: _log(args, r)), out)


def cmd_sweep(args) -> int:
    from .bench import SweepConfig, run_sweep

    cfg = _load(args)
    out = _prepare_out(cfg.out)
    sweep = SweepConfig.from_config(cfg)
    if args.seed is not None:
        sweep = SweepConfig(sweep.base, sweep.axis, sweep.values, (args.seed,))
    rows, summary = run_sweep(sweep, jobs=args.jobs, out_dir=out)
    for value, cell in summary.items():
        print(f"{sweep.axis}={value}: median l2 {cell['median_l2_error']}  "
              f"diverged {cell['diverged']}/{cell['runs']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    """Finite-difference gradient checks plus every hand-expanded residual kernel."""
    from .expansions import EXPANSIONS, expanded_residual_equivalence
    from .verify import finite_difference_suite

    tol = 1e-10
    report = {"expansions": {}, "finite_differences": {}}
    ok = True
    t0 = time.perf_counter()
    for eid in EXPANSIONS:
        dev = expanded_residual_equivalence(eid, n_cases=args.cases)
        report["expansions"][eid] = dev
        ok &= dev <= tol
        print(f"expansion {eid:<20} max deviation {dev:.3e}  {'ok' if dev <= tol else 'FAIL'}")
    for name, (worst, limit) in finite_difference_suite(n_cases=max(1, args.cases // 10)).items():
        report["finite_differences"][name] = worst
        ok &= worst <= limit
        print(f"fd check  {name:<20} max rel error {worst:.3e}  {'ok' if worst <= limit else 'FAIL'}")
    report["status"] = "ok" if ok else "failed"
    report["wall_s"] = time.perf_counter() - t0
    if args.out:
        out = _prepare_out(args.out)
        try:
            (out / "verify.json").write_text(json.dumps(report, indent=2))
        except OSError as exc:
            raise OutputError(str(exc)) from exc
    return EXIT_OK if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dapinn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in [
        ("run", cmd_run, "train one forward problem"),
        ("inverse", cmd_inverse, "train an inverse problem"),
        ("sweep", cmd_sweep, "run the [sweep] grid of a config"),
        ("verify", cmd_verify, "derivative and expansion self-checks"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="parallel runs for sweeps")
        p.add_argument("--quiet", action="store_true", help="no per-epoch log lines")
        if name == "verify":
            p.add_argument("--cases", type=int, default=500,
                           help="random cases per expansion kernel")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OutputError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DapinnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "exit_code", 1)


if __name__ == "__main__":
    sys.exit(main())
