"""
Coexisting throughput and the gain over WiFi alone
==================================================

C_ce is the per-channel sum of each RAT's mean spectral efficiency
E[log2(1 + SIR)], obtained by integrating rho_r over the threshold
2^x - 1. The baseline is the same WiFi network with no small cells.

Usage: python 03_coexisting_throughput.py [drops]
"""

import sys

import numpy as np

from coexist import analytic, montecarlo, optimizer
from coexist.model import reference_scenario

drops = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
cfg = reference_scenario(channels=5)
wifi = cfg.only("w")

###############################################################################
# Baseline

base = analytic.coexisting_throughput(wifi)
est = montecarlo.estimate_throughput(wifi, drops=drops)
print(f"WiFi only: {base:.4f} bps/Hz/channel (MC {est.mean:.4f} +/- {est.ci_half_width:.4f})")

###############################################################################
# Coexistence sweep
# -----------------
# Gains are relative to the WiFi-only baseline at the same lambda_w.

ratios = np.round(np.arange(0.5, 4.0 + 1e-9, 0.25), 10)
cfgs = optimizer.ratio_configs(cfg, ratios)
mc = montecarlo.sweep(cfgs, drops=drops)
print("ratio   C_ce analytic   C_ce MC    gain")
for r, c, e in zip(ratios, cfgs, mc):
    cce = analytic.coexisting_throughput(c)
    print(f"{r:5.2f}   {cce:.4f}          {e['c_ce'].mean:.4f}    {100 * (cce / base - 1):5.1f}%")

###############################################################################
# Where the rate comes from
# -------------------------
# Per-RAT spectral efficiency at the reference ratio of 3.

for r in cfg.rats:
    print(f"{r.id}: {analytic.spectral_efficiency(cfg, r.id):.4f} bps/Hz")
