"""Acceptance criteria 1-6, one pass/fail line each (printed in the summary).

Run alone with ``pytest tests/test_acceptance.py -s``; total runtime is
several minutes on one core.
"""

import math

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from coexist import analytic, geometry, montecarlo, optimizer
from coexist.model import NetworkConfig, RatParams, reference_scenario

pytestmark = pytest.mark.slow

SEED = montecarlo.DEFAULT_SEED
RATIOS = np.round(np.arange(0.5, 4.0 + 1e-9, 0.05), 10)


def record(n, checks):
    """Print one line for criterion ``n`` and fail if any check failed."""
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{name}={'ok' if good else 'FAIL'} ({info})" for name, good, info in checks)
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def ratio_sweep_mc():
    cfgs = optimizer.ratio_configs(reference_scenario(channels=5), RATIOS)
    return montecarlo.sweep(cfgs, drops=100_000, seed=SEED)


def test_criterion_1_reference():
    ms = range(1, 11)
    cfgs = [reference_scenario(channels=m) for m in ms]
    mc = montecarlo.sweep(cfgs, drops=100_000, seed=SEED)
    worst, gap_ok = 0.0, True
    curves = {"s": [], "w": [], "ce": []}
    for cfg, est in zip(cfgs, mc):
        rho = analytic.success_probabilities(cfg)
        pairs = [(est["rho"]["s"], rho["s"]), (est["rho"]["w"], rho["w"]),
                 (est["rho_ce"], analytic.coexisting_success_probability(cfg))]
        for e, a in pairs:
            gap = abs(e.mean - a)
            worst = max(worst, gap)
            gap_ok &= gap <= max(2 * e.ci_half_width, 0.015)
        curves["s"].append(rho["s"])
        curves["w"].append(rho["w"])
        curves["ce"].append(analytic.coexisting_success_probability(cfg))
    shape_ok = all(np.all(np.diff(v) > 0) and np.all(np.diff(v, 2) < 0) for v in curves.values())
    record(1, [
        ("mc_vs_analytic", gap_ok, f"max |gap| {worst:.4f}"),
        ("monotone_concave", shape_ok, "rho_s, rho_w, rho_ce over m=1..10"),
    ])


def test_criterion_2_optimum(ratio_sweep_mc):
    base = reference_scenario(channels=5)
    ana = optimizer.sweep_ratio(base, RATIOS)
    arg_ana = float(RATIOS[np.argmax(ana)])
    fixed = optimizer.solve_lambda_ratio(base)
    arg_mc = float(RATIOS[np.argmax([r["rho_ce"].mean for r in ratio_sweep_mc])])
    record(2, [
        ("analytic_argmax", abs(arg_ana - 1.4) <= 0.1 + 1e-12, f"{arg_ana:.2f}"),
        ("fixed_point", abs(fixed - arg_ana) <= 0.02, f"{fixed:.5f}"),
        ("mc_argmax", abs(arg_mc - arg_ana) <= 0.15 + 1e-12, f"{arg_mc:.2f}"),
    ])


def test_criterion_3_throughput(ratio_sweep_mc):
    base = reference_scenario(channels=5)
    wifi = base.only("w")
    wifi_ana = analytic.coexisting_throughput(wifi)
    wifi_mc = montecarlo.estimate_throughput(wifi, drops=200_000, seed=SEED)
    cce = np.array([analytic.coexisting_throughput(c) for c in optimizer.ratio_configs(base, RATIOS)])
    cce_mc = np.array([r["c_ce"].mean for r in ratio_sweep_mc])
    gain = cce / wifi_ana - 1
    at3 = float(gain[np.argmin(np.abs(RATIOS - 3.0))])
    peak = int(np.argmax(gain))
    in_band = lambda v: bool(np.all((v >= 0.78) & (v <= 0.87)))
    record(3, [
        ("wifi_only_analytic", abs(wifi_ana - 0.689) <= 0.02, f"{wifi_ana:.4f}"),
        ("wifi_only_mc", abs(wifi_mc.mean - 0.689) <= 0.02, f"{wifi_mc.mean:.4f} +/- {wifi_mc.ci_half_width:.4f}"),
        ("c_ce_range_analytic", in_band(cce), f"[{cce.min():.4f}, {cce.max():.4f}]"),
        ("c_ce_range_mc", in_band(cce_mc), f"[{cce_mc.min():.4f}, {cce_mc.max():.4f}]"),
        ("gain_at_3", abs(at3 - 0.22) <= 0.04, f"{100 * at3:.1f}%"),
        ("peak_gain", abs(gain[peak] - 0.30) <= 0.05 and abs(RATIOS[peak] - 1.45) <= 0.1,
         f"{100 * gain[peak]:.1f}% at {RATIOS[peak]:.2f}"),
    ])


def test_criterion_4_oracles():
    tau_gap = abs(analytic.tau_alpha(4.0) - analytic.tau_alpha_csc(4.0))
    tau_pi = abs(analytic.tau_alpha(4.0) - math.pi / 2)
    l05 = abs(analytic.ell(0.5, 4.0) - math.atan(math.sqrt(2)))
    l1 = abs(analytic.ell(1.0, 4.0) - math.pi / 4)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        cfg = NetworkConfig(
            rats=tuple(RatParams(i, 10 ** rng.uniform(-6, -2), 10 ** rng.uniform(-2, 2),
                                 rng.uniform(5, 200), 10 ** rng.uniform(-2, 2)) for i in ("s", "w")),
            channels=int(rng.integers(1, 30)), alpha=float(rng.uniform(2.1, 6.0)),
        )
        rs, rw = analytic.success_probability_two_rat(cfg)
        worst = max(worst, abs(analytic.success_probability(cfg, "s") - rs),
                    abs(analytic.success_probability(cfg, "w") - rw))
    red = 0.0
    for m in (1, 2, 5, 10, 50):
        for theta in (0.05, 0.5, 1.0, 4.0):
            for alpha in (2.5, 3.0, 4.0, 5.5):
                cfg = reference_scenario(channels=m, theta=theta)
                cfg = NetworkConfig(cfg.rats, m, alpha)
                red = max(red, abs(optimizer.optimal_weighted_ratio(cfg) - optimizer.equal_threshold_ratio(cfg)))
    record(4, [
        ("tau_4", max(tau_gap, tau_pi) <= 1e-12, f"{max(tau_gap, tau_pi):.1e}"),
        ("ell_0.5", l05 <= 1e-9, f"{l05:.1e}"),
        ("ell_1", l1 <= 1e-9, f"{l1:.1e}"),
        ("general_vs_two_rat", worst <= 1e-14, f"{worst:.1e} over 1000 sets"),
        ("equal_threshold_reduction", red <= 1e-12, f"{red:.1e}"),
    ])


def test_criterion_5_distributions():
    cfg = reference_scenario(channels=5)
    eta = analytic.transmit_probabilities(cfg)
    rec = montecarlo.simulate_drops(cfg, 10_000, seed=SEED)
    ks = {}
    for j, rid in enumerate(cfg.ids):
        rate = math.pi * eta[rid] * cfg.rat(rid).density
        ks[rid] = stats.kstest(rec.serving_distance[:, j] ** 2, "expon", args=(0, 1 / rate)).pvalue

    w = geometry.default_window(cfg)
    occ = {"thinned": np.zeros(5), "matern": np.zeros(5)}
    violations = 0
    for k in range(10_000):
        pat = geometry.sample_network(cfg, w, (SEED, k))
        mat = geometry.contend_matern_csma(pat, cfg, (SEED, k, 1))
        violations += geometry.hardcore_violations(mat, cfg)
        occ["matern"] += geometry.channel_occupancy(mat, 5)
        if k < 1000:
            occ["thinned"] += geometry.channel_occupancy(geometry.contend_thinned_ppp(pat, cfg, (SEED, k, 2)), 5)
    chi = {mode: stats.chisquare(v).pvalue for mode, v in occ.items()}
    record(5, [
        ("ks_d2", min(ks.values()) > 0.01, ", ".join(f"{k} p={v:.3f}" for k, v in ks.items())),
        ("occupancy_chi2", min(chi.values()) > 0.01, ", ".join(f"{k} p={v:.3f}" for k, v in chi.items())),
        ("matern_hardcore", violations == 0, f"{violations} violations over 10000 drops"),
    ])


def test_criterion_6_invariance():
    cfg = reference_scenario(channels=5)
    scaled = cfg.scale_powers(2.0)
    ana_same = (analytic.success_probabilities(scaled) == analytic.success_probabilities(cfg)
                and analytic.coexisting_success_probability(scaled) == analytic.coexisting_success_probability(cfg)
                and analytic.coexisting_throughput(scaled) == analytic.coexisting_throughput(cfg))
    a = montecarlo.estimate_all(cfg, 5000, seed=SEED)
    b = montecarlo.estimate_all(scaled, 5000, seed=SEED)
    mc_same = (all(a["rho"][k] == b["rho"][k] for k in cfg.ids)
               and a["rho_ce"] == b["rho_ce"] and a["c_ce"] == b["c_ce"])

    tiny = reference_scenario(channels=5, theta=1e-9)
    est = montecarlo.estimate_all(tiny, 20_000, seed=SEED)
    low = min([est["rho"][k].mean for k in tiny.ids] + [est["rho_ce"].mean])
    big = analytic.coexisting_success_probability(cfg.with_channels(10**6))
    record(6, [
        ("power_scaling_analytic", ana_same, "factor 2"),
        ("power_scaling_mc", mc_same, "factor 2, 5000 drops"),
        ("theta_to_zero_mc", low > 0.999, f"min rho {low:.5f}"),
        ("many_channels", big > 1 - 1e-3, f"rho_ce {big:.7f}"),
    ])
