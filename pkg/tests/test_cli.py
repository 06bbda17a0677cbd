import json

import pytest

from mu2opt import cli, harness

BASE_CONFIG = """\
[problem]
kind = "additive_quadratic"
dimension = 2
sigma = 0.5
x_star = 0.0

[set]
kind = "ball"
center = 0.0
radius = 1.0

[run]
algorithms = ["sgd"]
learning_rates = [0.1]
seeds = [0]
T = 30
"""


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text(BASE_CONFIG)
    return path


def test_run_writes_artifacts(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", str(config_path), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["diverged"] is False
    assert summary["algo"] == "sgd"
    rows = harness.read_results_csv(out / "trajectory.csv")
    assert rows and rows[0]["algo"] == "sgd"


def test_run_override_echoed_in_provenance(config_path, tmp_path):
    out = tmp_path / "out"
    rc = cli.main(["run", str(config_path), "--out", str(out), "--set", "lr=0.5"])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["lr"] == 0.5
    assert "lr=0.5" in summary["provenance"]["overrides"]
    assert summary["provenance"]["config"]["run"]["learning_rates"] == [0.5]


def test_run_missing_config_exits_2(tmp_path, capsys):
    rc = cli.main(["run", str(tmp_path / "nope.toml"), "--out", str(tmp_path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "usage:" in err


def test_run_rejects_grid_config(config_path, tmp_path):
    rc = cli.main(["run", str(config_path), "--out", str(tmp_path / "o"),
                   "--set", "run.learning_rates=[0.1, 0.2]"])
    assert rc == 2


@pytest.mark.filterwarnings("ignore:overflow")
def test_run_diverged_exits_3_with_artifacts(config_path, tmp_path):
    out = tmp_path / "div"
    rc = cli.main(["run", str(config_path), "--out", str(out),
                   "--set", "set.kind=unconstrained",
                   "--set", "problem.sigma=0", "--set", "lr=1e8",
                   "--set", "T=200", "--set", "run.x_init=[1.0, 0.0]"])
    assert rc == 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["diverged"] is True
    assert (out / "trajectory.csv").exists()


def test_sweep_row_cardinality(config_path, tmp_path):
    out = tmp_path / "sweep"
    rc = cli.main(["sweep", str(config_path), "--out", str(out),
                   "--set", 'run.algorithms=["sgd", "mu2_sgd"]',
                   "--set", "run.learning_rates=[0.01, 0.1, 0.5]",
                   "--set", "run.seeds=[0, 1]"])
    assert rc == 0
    rows = harness.read_results_csv(out / "results.csv")
    per_run = len({r["t"] for r in rows if r["algo"] == "sgd" and
                   r["lr"] == 0.01 and r["seed"] == 0})
    assert len(rows) == 2 * 3 * 2 * per_run
    summary = json.loads((out / "sweep_summary.json").read_text())
    assert {c["algo"] for c in summary["cells"]} == {"sgd", "mu2_sgd"}
    assert "stability" in summary and "slopes" in summary


def test_analyze_reproduces_sweep_summary(config_path, tmp_path):
    out = tmp_path / "s"
    cli.main(["sweep", str(config_path), "--out", str(out)])
    out2 = tmp_path / "a"
    rc = cli.main(["analyze", str(out / "results.csv"), "--out", str(out2)])
    assert rc == 0
    a = json.loads((out / "sweep_summary.json").read_text())
    a.pop("provenance")
    b = json.loads((out2 / "sweep_summary.json").read_text())
    assert a == b


def test_analyze_rejects_foreign_schema(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("algo,lr\nsgd,0.1\n")
    assert cli.main(["analyze", str(bad), "--out", str(tmp_path)]) == 2


def test_list_problems_prints_registry(capsys):
    assert cli.main(["list-problems"]) == 0
    out = capsys.readouterr().out
    for kind in ("additive_quadratic", "curvature_quadratic", "finite_sum_csv"):
        assert kind in out


def test_workers_env_default(config_path, tmp_path, monkeypatch):
    monkeypatch.setenv("MU2OPT_WORKERS", "3")
    from mu2opt import config as cfgmod
    assert cfgmod.default_workers() == 3
    monkeypatch.delenv("MU2OPT_WORKERS")
    assert cfgmod.default_workers() == 1


def test_master_seed_flag_recorded(config_path, tmp_path):
    out = tmp_path / "seeded"
    rc = cli.main(["run", str(config_path), "--out", str(out), "--seed", "42"])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 42
    assert summary["provenance"]["seeds"] == [42]
