import copy
import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from coexist import analytic, cli
from coexist.model import ConfigError, QuadratureFailure

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

BASE = {
    "scenario": {
        "rats": [
            {"id": "s", "density": 1e-4, "power": 1.0, "sense_radius": 50.0, "sir_threshold": 0.5},
            {"id": "w", "density": 3e-4, "power": 0.5, "sense_radius": 30.0, "sir_threshold": 0.5},
        ],
        "channels": 5,
        "alpha": 4.0,
    },
    "experiment": "analytic",
}


def write(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return str(p)


def cfg(**top):
    raw = copy.deepcopy(BASE)
    raw.update(top)
    return raw


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_sweep_m_columns(tmp_path):
    raw = cfg(experiment="sweep-m", sweep={"variable": "channels", "start": 1, "stop": 10, "step": 1},
              mc={"drops": 300, "seed": 3})
    assert cli.main(["--config", write(tmp_path, raw), "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "sweep-m.csv")
    assert [int(r["m"]) for r in rows] == list(range(1, 11))
    expected = ["m", "eta_s", "eta_w", "rho_s_analytic", "rho_w_analytic", "rho_ce_analytic",
                "rho_s_mc", "rho_s_mc_ci", "rho_w_mc", "rho_w_mc_ci", "rho_ce_mc", "rho_ce_mc_ci"]
    assert list(rows[0]) == expected
    assert float(rows[4]["rho_s_analytic"]) == pytest.approx(0.64151533918006679, rel=1e-10)
    summary = json.loads((tmp_path / "o" / "sweep-m.json").read_text())
    assert summary["increasing"] and summary["concave"]


def test_optimize_reports_ratio(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["--config", str(CONFIGS / "optimize.json"), "--out", str(out)]) == 0
    summary = json.loads((out / "optimum.json").read_text())
    assert summary["lambda_ratio_star"] == pytest.approx(1.4, abs=0.05)
    assert summary["constraint"]["feasible"]


def test_analytic_db_thresholds(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["--config", str(CONFIGS / "analytic_db.json"), "--out", str(out)]) == 0
    summary = json.loads((out / "analytic.json").read_text())
    assert summary["rho"]["lte"] == pytest.approx(0.64151533918006679, rel=1e-5)
    assert not (out / "analytic.csv").exists()


def test_format_csv_for_scalar(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["--config", write(tmp_path, cfg()), "--out", str(out), "--format", "csv"]) == 0
    assert len(read_csv(out / "analytic.csv")) == 1


def test_seed_determinism(tmp_path):
    raw = cfg(experiment="simulate", mc={"drops": 500})
    path = write(tmp_path, raw)
    for d in ("a", "b"):
        assert cli.main(["--config", path, "--out", str(tmp_path / d), "--seed", "9"]) == 0
    a = (tmp_path / "a" / "simulate.json").read_text()
    b = (tmp_path / "b" / "simulate.json").read_text()
    assert a == b
    cli.main(["--config", path, "--out", str(tmp_path / "c"), "--seed", "10"])
    assert (tmp_path / "c" / "simulate.json").read_text() != a


def test_overrides_reach_mc(tmp_path):
    raw = cfg(experiment="simulate", mc={"drops": 500})
    spec = cli.load_spec(write(tmp_path, raw), {"drops": 200, "seed": 4, "mode": "matern"})
    assert (spec.mc.drops, spec.mc.seed, spec.mc.mode) == (200, 4, "matern")


def test_throughput_sweep(tmp_path):
    raw = cfg(experiment="throughput", baseline="w",
              sweep={"variable": "lambda_ratio", "start": 1.0, "stop": 3.0, "step": 1.0})
    out = tmp_path / "o"
    assert cli.main(["--config", write(tmp_path, raw), "--out", str(out)]) == 0
    rows = read_csv(out / "throughput.csv")
    assert [float(r["ratio_w_over_s"]) for r in rows] == [1.0, 2.0, 3.0]
    assert float(rows[2]["c_ce_bps_hz_ch_analytic"]) == pytest.approx(1.2543129170268696, rel=1e-6)
    summary = json.loads((out / "throughput.json").read_text())
    assert summary["baseline_analytic"] == pytest.approx(0.94803034135596233, rel=1e-6)


def test_sweep_ratio_summary(tmp_path):
    raw = cfg(experiment="sweep-ratio", sweep={"variable": "lambda_ratio", "start": 0.5, "stop": 4, "step": 0.05})
    out = tmp_path / "o"
    assert cli.main(["--config", write(tmp_path, raw), "--out", str(out)]) == 0
    summary = json.loads((out / "sweep-ratio.json").read_text())
    assert summary["argmax_analytic"] == pytest.approx(1.4, abs=0.1)
    assert len(read_csv(out / "sweep-ratio.csv")) == 71


@pytest.mark.parametrize("mutate, field", [
    (lambda r: r["scenario"].update(alpha=1.5), "scenario"),
    (lambda r: r["scenario"].update(channels=0), "scenario"),
    (lambda r: r["scenario"]["rats"][0].update(power=-1.0), "scenario"),
    (lambda r: r["scenario"]["rats"][1].update(id="s"), "scenario"),
    (lambda r: r["scenario"].update(fading="nakagami"), "scenario/fading"),
    (lambda r: r.update(experiment="sweep-m"), "sweep"),
    (lambda r: r.update(experiment="simulate"), "mc"),
    (lambda r: r.update(experiment="sweep-m", sweep={"variable": "lambda_ratio", "start": 1, "stop": 2, "step": 1}),
     "sweep/variable"),
    (lambda r: r.update(bogus=1), "<root>"),
    (lambda r: r.update(baseline="lte"), "baseline"),
])
def test_config_errors_exit_2(tmp_path, caplog, mutate, field):
    raw = cfg()
    mutate(raw)
    out = tmp_path / "o"
    assert cli.main(["--config", write(tmp_path, raw), "--out", str(out)]) == 2
    assert not out.exists()
    assert f"field {field}" in caplog.text


def test_malformed_json_reports_line(tmp_path, caplog):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "scenario": ,\n}')
    assert cli.main(["--config", str(p)]) == 2
    assert "line 2" in caplog.text


def test_missing_file_exit_2(tmp_path):
    assert cli.main(["--config", str(tmp_path / "nope.json")]) == 2


def test_bad_drops_exit_2(tmp_path):
    assert cli.main(["--config", write(tmp_path, cfg()), "--drops", "0"]) == 2


def test_numerical_failure_exit_3(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise QuadratureFailure("did not converge")

    monkeypatch.setattr(analytic, "report", boom)
    out = tmp_path / "o"
    assert cli.main(["--config", write(tmp_path, cfg()), "--out", str(out)]) == 3
    assert not (out / "analytic.json").exists()


def test_spec_from_dict_raises_config_error():
    with pytest.raises(ConfigError):
        cli.spec_from_dict({"experiment": "analytic"})


def test_sweep_values():
    assert cli.Sweep("lambda_ratio", 0.5, 4.0, 0.05).values().size == 71
    assert cli.Sweep("channels", 1, 10, 1).values().tolist() == list(range(1, 11))


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_validate(name):
    cli.load_spec(CONFIGS / name)


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "coexist", "--config", write(tmp_path, cfg()),
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "o" / "analytic.json").exists()
