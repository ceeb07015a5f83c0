import json
import math
from dataclasses import replace

import pytest

from rispdl import cli, pdl, sweep
from rispdl.errors import ConfigError

BASE = """
[scenario]
rho_d = 0.7
rho_ru = 0.95
l_min = 0.5
alpha = 1.2
theta = 0.2
"""

SWEEP = BASE + """
[sweep]
label = "small"
axis = "N"
values = [16, 4]
trials = 4000
seed = 7
outputs = ["analytic", "simulated", "mu1_approx", "penalty"]
"""


@pytest.fixture
def cfg(tmp_path):
    def write(text, name="run.toml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


# ---------------------------------------------------------------- config parsing

def test_load_config_defaults():
    base, specs = sweep.load_config(BASE, is_text=True)
    assert specs == []
    assert base.geometry.M == 16 and base.geometry.N == 16
    assert base.tau_bar == pytest.approx(10 ** 9.5)


def test_load_config_db_and_linear():
    base, _ = sweep.load_config(BASE + "beta_d_db = -80.0\ntau_bar = 100.0\n", is_text=True)
    assert base.gains.beta_d == pytest.approx(1e-8)
    assert base.tau_bar == 100.0


@pytest.mark.parametrize("extra, field", [
    ("beta_d = 1e-8\nbeta_d_db = -80.0\n", "beta_d"),
    ("tau_bar = 1.0\nnoise_dbm = -60.0\n", "tau_bar"),
    ("bogus = 1\n", "bogus"),
    ("l_min = 2.0\n", "l_min"),
    ("N = 16\nn_y = 4\n", "N"),
])
def test_load_config_rejects(extra, field):
    text = BASE.replace("l_min = 0.5\n", "") if "l_min" in extra else BASE
    with pytest.raises(ConfigError, match=field):
        sweep.load_config(text + extra, is_text=True)


def test_load_config_invalid_toml():
    with pytest.raises(ConfigError):
        sweep.load_config("[scenario\n", is_text=True)


def test_sweep_spec_validation():
    base, _ = sweep.load_config(BASE, is_text=True)
    with pytest.raises(ConfigError, match="outputs"):
        sweep.SweepSpec(base=base, axis="N", values=(4,), outputs=())
    with pytest.raises(ConfigError, match="values"):
        sweep.SweepSpec(base=base, axis="N", values=())
    with pytest.raises(ConfigError, match="axis"):
        sweep.SweepSpec(base=base, axis="M", values=(4,))
    with pytest.raises(ConfigError):
        sweep.SweepSpec(base=base, axis="N", values=(4.5,))


def test_ris_shape():
    assert sweep.ris_shape(16) == (4, 4)
    assert sweep.ris_shape(36) == (6, 6)
    assert sweep.ris_shape(128) == (16, 8)
    assert sweep.ris_shape(7) == (7, 1)


# ---------------------------------------------------------------- sweeps / CSV

def test_run_sweep_rows_ordered():
    _, (spec,) = sweep.load_config(SWEEP, is_text=True)
    rows = sweep.run_sweep(spec, workers=2)
    assert [(r["value"], r["output"]) for r in rows] == [
        (v, o) for v in (4, 16) for o in ("analytic", "simulated", "mu1_approx", "penalty")]
    sim = [r for r in rows if r["output"] == "simulated"]
    assert all(r["std_error"] > 0 and r["trials"] == 4000 and r["seed"] == 7 for r in sim)
    assert all(r["route"] == "general" for r in rows)
    assert all(r["std_error"] == "" for r in rows if r["output"] != "simulated")


def test_csv_round_trip():
    _, (spec,) = sweep.load_config(SWEEP, is_text=True)
    rows = sweep.run_sweep(spec)
    text = sweep.rows_to_csv(rows)
    assert text.startswith("# generated")
    back = sweep.csv_to_rows(text)
    assert back == rows


def test_csv_round_trip_special_values():
    rows = [{"series": "a,b", "axis": "alpha", "value": 0.2, "output": "analytic",
             "linear": 0.0, "db": -math.inf, "std_error": "", "trials": "", "seed": "",
             "route": "general"}]
    assert sweep.csv_to_rows(sweep.rows_to_csv(rows, timestamp=False)) == rows


def test_fig4_analytic_theta_identical():
    specs = sweep.fig4_specs(outputs=("analytic",))
    rows = sweep.run_sweeps([s for s in specs if s.label.startswith("N=16,l_min=0.5")])
    by_theta = {}
    for r in rows:
        by_theta.setdefault(r["series"].split("theta=")[1], []).append(r["linear"])
    assert by_theta["0.2"] == by_theta["0.42"]


def test_presets_shape():
    assert len(sweep.fig3_specs()) == 3
    assert len(sweep.fig4_specs()) == 12
    assert sweep.fig3_specs()[0].values == (4, 16, 36, 64, 100)


# ---------------------------------------------------------------- verify

def test_verify_single_point():
    base, _ = sweep.load_config(BASE, is_text=True)
    spec = sweep.SweepSpec(base=base, axis="N", values=(16,), trials=20_000, seed=1)
    summary = sweep.verify_report(spec)
    assert len(summary["points"]) == 1
    assert summary["passed"] == (abs(summary["points"][0]["z"]) <= 3)
    json.loads(sweep.summary_json(summary))
    assert "1 points" in sweep.format_report(summary) or "1/1" in sweep.format_report(summary)


def test_verify_requires_both_outputs():
    base, _ = sweep.load_config(BASE, is_text=True)
    spec = sweep.SweepSpec(base=base, axis="N", values=(4,), outputs=("analytic",))
    with pytest.raises(ConfigError):
        sweep.verify_report(spec)


def _control_spec():
    spec = sweep.fig3_specs(trials=400_000, outputs=("analytic", "simulated"))[0]
    return replace(spec, values=(16,))


def test_verify_negative_control(monkeypatch):
    spec = _control_spec()
    assert sweep.verify_report(spec)["passed"]
    original = pdl.mu2
    monkeypatch.setattr(pdl, "mu2", lambda p: 1.1 * original(p))
    bad = sweep.verify_report(spec)
    assert not bad["passed"]
    (point,) = bad["points"]
    assert point["value"] == 16 and point["z"] < -3


# ---------------------------------------------------------------- command line

def test_cli_mean_snr(cfg, capsys):
    assert cli.main(["mean-snr", cfg(BASE)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["route"] == "general"
    assert out["total"] == pytest.approx(out["term_direct"] + out["term_cross"] + out["term_ris"])
    assert 0 < out["pdl_penalty"] < 1


def test_cli_simulate_reproducible(cfg, tmp_path):
    path = cfg(BASE)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert cli.main(["simulate", path, "--trials", "3000", "--seed", "4",
                         "--no-timestamp", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert not a.read_text().startswith("#")


def test_cli_sweep_plot_data(cfg, tmp_path):
    out = tmp_path / "res"
    assert cli.main(["sweep", cfg(SWEEP), "--trials", "2000", "--out", str(out),
                     "--plot-data", "--no-timestamp"]) == 0
    rows = sweep.csv_to_rows((out / "sweep.csv").read_text())
    assert len(rows) == 8
    series = sorted(p.name for p in (out / "plot").iterdir())
    assert "sweep_small_analytic.dat" in series
    lines = (out / "plot" / "sweep_small_analytic.dat").read_text().splitlines()
    assert lines[0].startswith("#") and len(lines) == 3


def test_cli_verify_exit_codes(cfg, tmp_path, monkeypatch):
    text = BASE.replace("rho_ru = 0.95", "rho_ru = 0.0") + """
[sweep]
axis = "N"
values = [16]
trials = 400000
seed = 2024
"""
    path = cfg(text)
    assert cli.main(["verify", path, "--out", str(tmp_path / "v")]) == 0
    summary = json.loads((tmp_path / "v" / "verify.json").read_text())
    assert summary["passed"] and len(summary["points"]) == 1
    original = pdl.mu2
    monkeypatch.setattr(pdl, "mu2", lambda p: 1.1 * original(p))
    assert cli.main(["verify", path]) == 2


def test_cli_invalid_config_exit_code(cfg, capsys):
    assert cli.main(["mean-snr", cfg(BASE + "bogus = 3\n")]) == 1
    assert "bogus" in capsys.readouterr().err
    assert cli.main(["mean-snr", "/nonexistent/file.toml"]) == 1
    assert cli.main(["sweep", cfg(BASE)]) == 1


def test_cli_numeric_exit_code(cfg, monkeypatch):
    from rispdl import analytic
    from rispdl.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("did not converge", 1e-3)
    monkeypatch.setattr(analytic, "mean_snr", boom)
    assert cli.main(["mean-snr", cfg(BASE)]) == 3


def test_cli_preset_small(tmp_path):
    assert cli.main(["preset", "fig3", "--trials", "1000", "--out", str(tmp_path),
                     "--no-timestamp"]) == 0
    rows = sweep.csv_to_rows((tmp_path / "fig3.csv").read_text())
    assert len(rows) == 3 * 5 * 3
    assert {r["route"] for r in rows} == {"uncorrelated", "general", "fully_correlated"}
