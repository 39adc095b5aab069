"""Command-line experiment runner.

    coexist --config channels.json --out results/ [--seed N] [--drops N]
            [--mode thinned|matern] [--format csv|json]

Sweeps write ``<name>.csv`` (one row per grid point) plus a ``<name>.json``
summary; scalar experiments write the JSON summary, and a one-row CSV when
``--format csv`` is given. Exit codes: 0 ok, 2 configuration error, 3
numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional

import jsonschema
import numpy as np

from . import analytic, montecarlo, optimizer
from .model import (
    CoexistError,
    ConfigError,
    FadingModel,
    NetworkConfig,
    NumericalError,
    RatParams,
    db_to_linear,
    validate,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
EXPERIMENTS = ("analytic", "simulate", "sweep-m", "sweep-ratio", "optimize", "throughput")
SWEEP_VARIABLE = {"sweep-m": "channels", "sweep-ratio": "lambda_ratio", "throughput": "lambda_ratio"}


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    step: float

    def values(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        vals = self.start + self.step * np.arange(n)
        return np.round(vals, 12)


@dataclass(frozen=True)
class McSettings:
    drops: int = montecarlo.DEFAULT_DROPS
    seed: int = montecarlo.DEFAULT_SEED
    mode: str = "thinned"
    workers: int = 1
    compare_modes: bool = False


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: NetworkConfig
    experiment: str
    sweep: Optional[Sweep] = None
    mc: Optional[McSettings] = None
    out_dir: Path = Path(".")
    name: Optional[str] = None
    format: Optional[str] = None
    baseline: Optional[str] = None

    @property
    def stem(self) -> str:
        return self.name or self.experiment


def _schema():
    return json.loads(resources.files("coexist").joinpath("config.schema.json").read_text())


def _rat_from_json(d: Dict) -> RatParams:
    theta = d["sir_threshold"] if "sir_threshold" in d else db_to_linear(d["sir_threshold_db"])
    return RatParams(
        id=d["id"], density=d.get("density", d.get("lambda")), power=d["power"],
        sense_radius=d["sense_radius"], sir_threshold=theta,
    )


def spec_from_dict(raw: Dict, overrides: Optional[Dict] = None) -> ExperimentSpec:
    """Validate a parsed config (plus CLI overrides) into an ExperimentSpec.

    Raises ConfigError with a field path on any problem.
    """
    overrides = overrides or {}
    try:
        jsonschema.validate(raw, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"field {where}: {exc.message}") from None
    sc = raw["scenario"]
    config = NetworkConfig(
        rats=tuple(_rat_from_json(r) for r in sc["rats"]),
        channels=sc["channels"], alpha=float(sc["alpha"]),
        fading=FadingModel(sc.get("fading", "rayleigh")), csma=sc.get("csma", True),
    )
    try:
        validate(config)
    except ConfigError as exc:
        raise ConfigError(f"field scenario: {exc}") from None

    exp = raw["experiment"]
    sweep = Sweep(**raw["sweep"]) if "sweep" in raw else None
    if exp in ("sweep-m", "sweep-ratio") and sweep is None:
        raise ConfigError(f"field sweep: required for experiment {exp!r}")
    if sweep is not None and exp in SWEEP_VARIABLE and sweep.variable != SWEEP_VARIABLE[exp]:
        raise ConfigError(f"field sweep/variable: {exp!r} sweeps {SWEEP_VARIABLE[exp]!r}")
    if sweep is not None:
        if sweep.stop < sweep.start:
            raise ConfigError("field sweep/stop: must not be below start")
        vals = sweep.values()
        if sweep.variable == "channels" and (vals[0] < 1 or not np.allclose(vals, np.round(vals))):
            raise ConfigError("field sweep: channel sweep needs positive integer values")
        if sweep.variable == "lambda_ratio" and vals[0] <= 0:
            raise ConfigError("field sweep/start: ratios must be positive")
    if sweep is not None and sweep.variable == "lambda_ratio" and len(config.rats) != 2:
        raise ConfigError("field scenario/rats: ratio sweeps need exactly two RATs")
    if exp == "optimize" and len(config.rats) != 2:
        raise ConfigError("field scenario/rats: optimize needs exactly two RATs")

    mc_raw = dict(raw.get("mc", {}))
    for key in ("drops", "seed", "mode", "workers"):
        if overrides.get(key) is not None:
            mc_raw[key] = overrides[key]
    mc = McSettings(**mc_raw) if ("mc" in raw or mc_raw) else None
    if exp == "simulate" and mc is None:
        raise ConfigError("field mc: required for experiment 'simulate'")

    out = raw.get("output", {})
    baseline = raw.get("baseline", config.rats[-1].id)
    if baseline not in config.ids:
        raise ConfigError(f"field baseline: unknown RAT id {baseline!r}")
    return ExperimentSpec(
        scenario=config, experiment=exp, sweep=sweep, mc=mc,
        out_dir=Path(overrides.get("out") or out.get("dir", ".")),
        name=out.get("name"), format=overrides.get("format") or out.get("format"),
        baseline=baseline,
    )


def load_spec(path, overrides: Optional[Dict] = None) -> ExperimentSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return spec_from_dict(raw, overrides)


# --------------------------------------------------------------------------
# experiments

def _mc_kwargs(mc: McSettings) -> Dict:
    return dict(drops=mc.drops, seed=mc.seed, mode=mc.mode, workers=mc.workers)


def _est(e: montecarlo.McEstimate) -> Dict:
    return {"mean": e.mean, "ci_half_width": e.ci_half_width, "drops": e.drops,
            "seed": e.seed, "mode": e.mode, "no_serving": e.no_serving}


def _constraint_summary(config: NetworkConfig) -> Dict:
    feas = optimizer.check_constraint(config)
    out = {"feasible": feas.feasible, "margin": feas.margin, "bound": feas.bound, "c": feas.c}
    if feas.feasible:
        out["optimal_weighted_ratio"] = optimizer.optimal_weighted_ratio(config)
    return out


def _analytic(spec: ExperimentSpec):
    cfg = spec.scenario
    rep = analytic.report(cfg)
    summary = {"eta": rep.eta, "rho": rep.rho, "rho_ce": rep.rho_ce,
               "c_ce_bps_hz_ch": rep.c_ce,
               "tau_alpha": analytic.tau_alpha(cfg.alpha, cfg.fading),
               "ell": {r.id: analytic.ell(r.sir_threshold, cfg.alpha, cfg.fading) for r in cfg.rats}}
    if len(cfg.rats) == 2:
        summary["constraint"] = _constraint_summary(cfg)
    row = {"m": cfg.channels}
    for r in cfg.rats:
        row[f"eta_{r.id}"] = rep.eta[r.id]
    for r in cfg.rats:
        row[f"rho_{r.id}_analytic"] = rep.rho[r.id]
    row["rho_ce_analytic"] = rep.rho_ce
    row["c_ce_bps_hz_ch_analytic"] = rep.c_ce
    return [row], summary


def _simulate(spec: ExperimentSpec):
    cfg, mc = spec.scenario, spec.mc
    est = montecarlo.estimate_all(cfg, **_mc_kwargs(mc))
    rep = analytic.report(cfg)
    summary = {
        "analytic": {"eta": rep.eta, "rho": rep.rho, "rho_ce": rep.rho_ce, "c_ce_bps_hz_ch": rep.c_ce},
        "mc": {"rho": {k: _est(v) for k, v in est["rho"].items()},
               "rho_ce": _est(est["rho_ce"]), "c_ce_bps_hz_ch": _est(est["c_ce"])},
    }
    if mc.compare_modes:
        summary["mode_comparison"] = montecarlo.compare_modes(
            cfg, drops=mc.drops, seed=mc.seed, workers=mc.workers)
    row = {"m": cfg.channels}
    for r in cfg.rats:
        row[f"rho_{r.id}_analytic"] = rep.rho[r.id]
        row[f"rho_{r.id}_mc"] = est["rho"][r.id].mean
        row[f"rho_{r.id}_mc_ci"] = est["rho"][r.id].ci_half_width
    row["rho_ce_analytic"] = rep.rho_ce
    row["rho_ce_mc"] = est["rho_ce"].mean
    row["rho_ce_mc_ci"] = est["rho_ce"].ci_half_width
    row["c_ce_bps_hz_ch_analytic"] = rep.c_ce
    row["c_ce_bps_hz_ch_mc"] = est["c_ce"].mean
    row["c_ce_bps_hz_ch_mc_ci"] = est["c_ce"].ci_half_width
    return [row], summary


def _probability_rows(cfgs: List[NetworkConfig], lead: List[Dict], mc: Optional[McSettings]):
    est = montecarlo.sweep(cfgs, **_mc_kwargs(mc)) if mc else None
    rows = []
    for k, (cfg, first) in enumerate(zip(cfgs, lead)):
        row = dict(first)
        eta = analytic.transmit_probabilities(cfg)
        rho = analytic.success_probabilities(cfg)
        for r in cfg.rats:
            row[f"eta_{r.id}"] = eta[r.id]
        for r in cfg.rats:
            row[f"rho_{r.id}_analytic"] = rho[r.id]
        row["rho_ce_analytic"] = sum(rho.values()) / len(rho)
        if est:
            for r in cfg.rats:
                row[f"rho_{r.id}_mc"] = est[k]["rho"][r.id].mean
                row[f"rho_{r.id}_mc_ci"] = est[k]["rho"][r.id].ci_half_width
            row["rho_ce_mc"] = est[k]["rho_ce"].mean
            row["rho_ce_mc_ci"] = est[k]["rho_ce"].ci_half_width
        rows.append(row)
    return rows


def _max_gap(rows, ids):
    if "rho_ce_mc" not in rows[0]:
        return None
    keys = [f"rho_{i}" for i in ids] + ["rho_ce"]
    return max(abs(r[f"{k}_mc"] - r[f"{k}_analytic"]) for r in rows for k in keys)


def _sweep_m(spec: ExperimentSpec):
    cfg = spec.scenario
    ms = [int(v) for v in spec.sweep.values()]
    cfgs = [cfg.with_channels(m) for m in ms]
    rows = _probability_rows(cfgs, [{"m": m} for m in ms], spec.mc)
    ce = np.array([r["rho_ce_analytic"] for r in rows])
    summary = {
        "m": ms,
        "increasing": bool(np.all(np.diff(ce) > 0)),
        "concave": bool(np.all(np.diff(ce, 2) < 0)) if len(ce) >= 3 else None,
        "max_abs_mc_minus_analytic": _max_gap(rows, cfg.ids),
    }
    return rows, summary


def _sweep_ratio(spec: ExperimentSpec):
    cfg = spec.scenario
    ratios = spec.sweep.values()
    cfgs = optimizer.ratio_configs(cfg, ratios)
    s, w = cfg.ids
    lead = [{f"ratio_{w}_over_{s}": float(x), f"lambda_{s}_per_m2": c.rats[0].density,
             f"lambda_{w}_per_m2": c.rats[1].density} for x, c in zip(ratios, cfgs)]
    rows = _probability_rows(cfgs, lead, spec.mc)
    summary = {
        "argmax_analytic": float(ratios[int(np.argmax([r["rho_ce_analytic"] for r in rows]))]),
        "max_abs_mc_minus_analytic": _max_gap(rows, cfg.ids),
    }
    if "rho_ce_mc" in rows[0]:
        summary["argmax_mc"] = float(ratios[int(np.argmax([r["rho_ce_mc"] for r in rows]))])
    feas = optimizer.check_constraint(cfg)
    if feas.feasible:
        summary["lambda_ratio_star"] = optimizer.solve_lambda_ratio(cfg)
    return rows, summary


def _optimize(spec: ExperimentSpec):
    cfg = spec.scenario
    closed = optimizer.optimize_ratio(cfg, "closed-form")
    swept = optimizer.optimize_ratio(cfg, "sweep")
    summary = {
        "constraint": _constraint_summary(cfg),
        "y_star": closed.y_star,
        "lambda_ratio_star": closed.lambda_ratio_star,
        "rho_ce_at_star": closed.rho_ce_at_star,
        "equal_threshold_ratio": optimizer.equal_threshold_ratio(cfg),
        "lambda_ratio_star_eta_one": optimizer.equal_threshold_ratio(cfg) ** -1
        if cfg.rats[0].sir_threshold == cfg.rats[1].sir_threshold else None,
        "sweep_argmax": swept.lambda_ratio_star,
        "sweep_rho_ce": swept.rho_ce_at_star,
    }
    row = {k: v for k, v in summary.items() if isinstance(v, (int, float)) and not isinstance(v, bool)}
    row["feasible"] = int(closed.feasible)
    return [row], summary


def _throughput(spec: ExperimentSpec):
    cfg = spec.scenario
    base_cfg = cfg.only(spec.baseline)
    base = analytic.coexisting_throughput(base_cfg)
    summary = {"baseline_rat": spec.baseline, "baseline_analytic": base}
    kw = _mc_kwargs(spec.mc) if spec.mc else None
    if kw:
        summary["baseline_mc"] = _est(montecarlo.estimate_throughput(base_cfg, **kw))
    if spec.sweep is None:
        cfgs, lead = [cfg], [{"m": cfg.channels}]
    else:
        ratios = spec.sweep.values()
        cfgs = optimizer.ratio_configs(cfg, ratios)
        s, w = cfg.ids
        lead = [{f"ratio_{w}_over_{s}": float(x)} for x in ratios]
    est = montecarlo.sweep(cfgs, **kw) if kw else None
    rows = []
    for k, (c, first) in enumerate(zip(cfgs, lead)):
        row = dict(first)
        for r in c.rats:
            row[f"se_{r.id}_bps_hz_analytic"] = analytic.spectral_efficiency(c, r.id)
        row["c_ce_bps_hz_ch_analytic"] = sum(row[f"se_{r.id}_bps_hz_analytic"] for r in c.rats) / c.channels
        row["gain_analytic"] = row["c_ce_bps_hz_ch_analytic"] / base - 1.0
        if est:
            row["c_ce_bps_hz_ch_mc"] = est[k]["c_ce"].mean
            row["c_ce_bps_hz_ch_mc_ci"] = est[k]["c_ce"].ci_half_width
        rows.append(row)
    cce = [r["c_ce_bps_hz_ch_analytic"] for r in rows]
    best = int(np.argmax(cce))
    summary.update({
        "c_ce_min": min(cce), "c_ce_max": max(cce),
        "peak_gain_analytic": rows[best]["gain_analytic"],
        "argmax": rows[best][next(iter(lead[0]))],
    })
    return rows, summary


_RUNNERS = {
    "analytic": _analytic, "simulate": _simulate, "sweep-m": _sweep_m,
    "sweep-ratio": _sweep_ratio, "optimize": _optimize, "throughput": _throughput,
}


# --------------------------------------------------------------------------
# output

def _fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def write_csv(path: Path, rows: List[Dict]) -> None:
    header = list(rows[0])
    for r in rows[1:]:
        for k in r:
            if k not in header:
                header.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[k]) if k in r else "" for k in header])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def run(spec: ExperimentSpec) -> int:
    """Run one experiment and write its outputs; returns the exit status."""
    try:
        rows, summary = _RUNNERS[spec.experiment](spec)
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    summary = {"experiment": spec.experiment, "scenario": _scenario_json(spec.scenario), **summary}
    if spec.mc is not None:
        summary["mc_settings"] = {"drops": spec.mc.drops, "seed": spec.mc.seed, "mode": spec.mc.mode}
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    is_sweep = spec.sweep is not None
    fmt = spec.format or ("csv" if is_sweep else "json")
    if is_sweep or fmt == "csv":
        write_csv(spec.out_dir / f"{spec.stem}.csv", rows)
    with open(spec.out_dir / f"{spec.stem}.json", "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def _scenario_json(cfg: NetworkConfig) -> Dict:
    return {
        "rats": [{"id": r.id, "density": r.density, "power": r.power,
                  "sense_radius": r.sense_radius, "sir_threshold": r.sir_threshold} for r in cfg.rats],
        "channels": cfg.channels, "alpha": cfg.alpha, "fading": cfg.fading.kind, "csma": cfg.csma,
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coexist", description="Multi-RAT unlicensed-band coexistence experiments.")
    p.add_argument("--config", required=True, help="experiment JSON file")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--drops", type=int, help="Monte Carlo drops per scenario")
    p.add_argument("--mode", choices=montecarlo.MODES, help="contention mode for Monte Carlo")
    p.add_argument("--format", choices=("csv", "json"), help="primary output format")
    p.add_argument("--workers", type=int, help="worker processes for Monte Carlo chunks")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.drops is not None and args.drops < 1:
        log.error("--drops must be >= 1")
        return EXIT_CONFIG
    overrides = {"out": args.out, "seed": args.seed, "drops": args.drops, "mode": args.mode,
                 "format": args.format, "workers": args.workers}
    try:
        spec = load_spec(args.config, overrides)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        return run(spec)
    except CoexistError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
