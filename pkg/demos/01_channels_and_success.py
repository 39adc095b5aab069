"""
Success probability versus the number of channels
=================================================

Two RATs share m unlicensed channels: small cells ("s", 1 W, 50 m sensing
radius) and WiFi ("w", 0.5 W, 30 m). Each AP contends with CSMA, so only a
fraction eta_r of them transmits. This script tabulates eta_r, the per-RAT
success probability rho_r and their mean rho_ce for m = 1..10, then checks
the closed forms against a Monte Carlo run on shared drops.

Usage: python 01_channels_and_success.py [drops]
"""

import sys

import numpy as np

from coexist import analytic, montecarlo, optimizer
from coexist.model import reference_scenario

drops = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000

###############################################################################
# Closed forms
# ------------
# ``reference_scenario`` builds the reference two-RAT network with
# lambda_s = 1e-4 /m^2 and lambda_w = 3 lambda_s.

base = reference_scenario(channels=5)
ms = np.arange(1, 11)
cfgs = [base.with_channels(int(m)) for m in ms]

print(" m   eta_s    eta_w    rho_s    rho_w    rho_ce")
for m, cfg in zip(ms, cfgs):
    eta = analytic.transmit_probabilities(cfg)
    rho = analytic.success_probabilities(cfg)
    print(f"{m:2d}  {eta['s']:.5f}  {eta['w']:.5f}  {rho['s']:.5f}  {rho['w']:.5f}"
          f"  {analytic.coexisting_success_probability(cfg):.5f}")

###############################################################################
# More channels help, with diminishing returns
# --------------------------------------------
# rho_ce is increasing and concave in m; the optimizer module checks both
# with first and second differences.

rep = optimizer.verify_concavity_in_m(base, 10)
print("\nfirst differences :", np.round(rep.first_diff, 4))
print("second differences:", np.round(rep.second_diff, 4))

###############################################################################
# Monte Carlo check
# -----------------
# All ten scenarios are evaluated on thinnings of the same AP drops, so the
# curve keeps its shape even at modest drop counts.

mc = montecarlo.sweep(cfgs, drops=drops, seed=montecarlo.DEFAULT_SEED)
print(f"\nMonte Carlo, {drops} drops (thinned-PPP contention)")
print(" m   rho_ce analytic   rho_ce MC")
for m, cfg, est in zip(ms, cfgs, mc):
    e = est["rho_ce"]
    print(f"{m:2d}  {analytic.coexisting_success_probability(cfg):.4f}"
          f"            {e.mean:.4f} +/- {e.ci_half_width:.4f}")
