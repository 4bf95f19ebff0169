import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dapinn import cli
from dapinn.config import (ExperimentConfig, input_width, parse_config, parse_config_text,
                           render_config, resolve)
from dapinn.errors import ConfigError

MINIMAL = """
[experiment]
problem = poisson1d
scheme = {scheme}
hidden = 20, 20, 20, 20
epochs = 10000
"""

TINY_RUN = """
[experiment]
problem = poisson1d
scheme = power2
hidden = 5, 5
epochs = 30
log_every = 10
[sampling]
n_interior = 8
"""


@pytest.mark.parametrize("scheme,width", [("power2", 2), ("identity", 1), ("power3", 3),
                                          ("replica", 2)])
def test_minimal_config_input_width(scheme, width):
    cfg = parse_config_text(MINIMAL.format(scheme=scheme))
    assert input_width(cfg) == width
    assert cfg.hidden == (20, 20, 20, 20) and cfg.epochs == 10000


def test_input_width_for_time_problems():
    assert input_width(resolve(ExperimentConfig(problem="heat1d", scheme="power3"))) == 4
    assert input_width(resolve(ExperimentConfig(problem="allen-cahn1d", scheme="fourier"))) == 4


def test_misspelled_key_names_line():
    text = "[experiment]\nproblem = poisson1d\n\nepochz = 10\n"
    with pytest.raises(ConfigError, match="line 4") as info:
        parse_config_text(text)
    assert info.value.line == 4 and "epochz" in str(info.value)


@pytest.mark.parametrize("text,line", [
    ("[experiment]\nepochs = ten\n", 2),
    ("[sampling]\nepochs = 10\n", 2),
    ("[nope]\n", 1),
    ("problem = heat1d\n", 1),
    ("[experiment]\nseed = 1\nseed = 2\n", 3),
    ("[experiment]\nhidden = 4,,4\n", 2),
    ("[sweep]\nactivation = tanh\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert info.value.line == line


@pytest.mark.parametrize("text", ["[experiment]\nepochs = -1\n", "[experiment]\nscheme = power9\n",
                                  "[sampling]\ndistribution = sobol\n",
                                  "[experiment]\nproblem = wave\n"])
def test_semantic_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_problem_defaults_resolved():
    cfg = resolve(ExperimentConfig(problem="inverse-diffusion1d", seed=5))
    assert cfg.n_measure == 80 and cfg.measure_layout == "boundary+initial+final"
    assert cfg.sampling_seed == 5 and cfg.measure_seed == 5
    assert resolve(ExperimentConfig(problem="heat1d")).n_initial == 50


@settings(max_examples=40, deadline=None)
@given(problem=st.sampled_from(["poisson1d", "heat1d", "burgers1d", "inverse-diffusion1d"]),
       scheme=st.sampled_from(["identity", "power2", "power3", "fourier:T=2.0,n=2"]),
       hidden=st.lists(st.integers(1, 64), min_size=1, max_size=5).map(tuple),
       lr=st.floats(1e-6, 1.0), seed=st.integers(0, 2**31), n=st.integers(0, 500),
       dist=st.sampled_from(["uniform-random", "equispaced"]))
def test_render_parse_round_trip(problem, scheme, hidden, lr, seed, n, dist):
    cfg = resolve(ExperimentConfig(problem=problem, scheme=scheme, hidden=hidden, lr=lr, seed=seed,
                                   n_interior=n, distribution=dist))
    assert parse_config_text(render_config(cfg)) == cfg


def test_sweep_section_round_trip():
    text = "[experiment]\nepochs = 5\n[sweep]\nscheme = identity fourier:T=2,n=3\nseeds = 0, 1\n"
    cfg = parse_config_text(text)
    assert dict(cfg.sweep)["scheme"] == ("identity", "fourier:T=2,n=3")
    assert parse_config_text(render_config(cfg)) == cfg


def test_seed_env_override(tmp_path, monkeypatch):
    path = tmp_path / "a.cfg"
    path.write_text(MINIMAL.format(scheme="power2"))
    monkeypatch.setenv("DAPINN_SEED", "17")
    cfg = parse_config(path)
    assert cfg.seed == 17 and cfg.sampling_seed == 17
    path.write_text(MINIMAL.format(scheme="power2") + "seed = 3\n")
    assert parse_config(path).seed == 3
    monkeypatch.setenv("DAPINN_SEED", "x")
    path.write_text(MINIMAL.format(scheme="power2"))
    with pytest.raises(ConfigError):
        parse_config(path)


def _write(tmp_path, text=TINY_RUN):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_cmd_run_writes_artifacts_and_echo_round_trips(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["run", "--config", _write(tmp_path), "--out", str(out), "--quiet"])
    assert code == 0
    for name in ("run.json", "history.csv", "checkpoint.bin", "config.txt"):
        assert (out / name).exists()
    doc = json.loads((out / "run.json").read_text())
    assert doc["status"] == "ok"
    echoed = cli.resolve_from_echo(doc["config"])
    assert echoed == parse_config(_write(tmp_path)).replace(out=str(out))
    assert parse_config(out / "config.txt") == echoed
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["status"] == "ok"


def test_cmd_run_seed_flag(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", "--config", _write(tmp_path), "--out", str(out), "--seed", "9",
                     "--quiet"]) == 0
    cfg = json.loads((out / "run.json").read_text())["config"]
    assert cfg["seed"] == 9 and cfg["sampling_seed"] == 9


def test_unwritable_output_gives_io_exit(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = cli.main(["run", "--config", _write(tmp_path), "--out", str(blocker / "sub"),
                     "--quiet"])
    assert code == cli.EXIT_IO == 4


def test_bad_config_gives_config_exit(tmp_path, capsys):
    code = cli.main(["run", "--config", _write(tmp_path, "[experiment]\nepochz = 1\n")])
    assert code == cli.EXIT_CONFIG == 2
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_divergence_exit_matches_status(tmp_path, monkeypatch):
    from dapinn import training

    monkeypatch.setattr(training, "DIVERGENCE_THRESHOLD", 1e-12)
    out = tmp_path / "d"
    code = cli.main(["run", "--config", _write(tmp_path), "--out", str(out), "--quiet"])
    status = json.loads((out / "run.json").read_text())["status"]
    assert status == "diverged" and code == cli.EXIT_DIVERGED == 3


def test_inverse_command(tmp_path):
    text = ("[experiment]\nproblem = inverse-diffusion1d\nscheme = power2\nhidden = 6, 6\n"
            "epochs = 20\nlog_every = 10\n[sampling]\nn_interior = 10\n[inverse]\nn_measure = 12\n")
    out = tmp_path / "inv"
    assert cli.main(["inverse", "--config", _write(tmp_path, text), "--out", str(out),
                     "--quiet"]) == 0
    doc = json.loads((out / "run.json").read_text())
    assert "C" in doc["param_errors"] and doc["coeff_history"]
    assert cli.main(["inverse", "--config", _write(tmp_path), "--out", str(out), "--quiet"]) == 2


def test_sweep_command(tmp_path):
    text = TINY_RUN + "[sweep]\nwidth = 3, 4\nseeds = 0, 1\n"
    out = tmp_path / "sw"
    assert cli.main(["sweep", "--config", _write(tmp_path, text), "--out", str(out),
                     "--jobs", "2"]) == 0
    assert len((out / "sweep.csv").read_text().splitlines()) == 5
    assert (out / "summary.json").exists()


def test_verify_command(tmp_path, capsys):
    code = cli.main(["verify", "--cases", "20", "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["status"] == "ok"
    assert all(v <= 1e-10 for v in report["expansions"].values())
    assert "expansion" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dapinn", "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "verify" in res.stdout


def test_shipped_configs_parse():
    from pathlib import Path

    paths = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))
    assert paths
    for path in paths:
        parse_config(path)
