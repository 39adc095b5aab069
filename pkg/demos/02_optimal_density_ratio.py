"""
Optimal WiFi-to-small-cell density ratio
========================================

With m = 5 channels and lambda_s fixed, rho_ce depends on how many WiFi
APs are deployed per small cell. The optimum has a closed form in terms of
the power-weighted ratio of transmitting densities; mapping it back to
lambda_w / lambda_s needs a one-dimensional root search because the
transmit probabilities move with the total density.

Usage: python 02_optimal_density_ratio.py [drops]
"""

import sys

import numpy as np

from coexist import montecarlo, optimizer
from coexist.model import reference_scenario

drops = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
cfg = reference_scenario(channels=5)

###############################################################################
# Feasibility
# -----------
# An interior optimum exists only when min(c_s, c_w) exceeds
# (theta_s theta_w)^(1/alpha) tau_alpha / m.

feas = optimizer.check_constraint(cfg)
print(f"c = {feas.c}, bound = {feas.bound:.4f}, feasible = {feas.feasible}")

###############################################################################
# Closed form and fixed point
# ---------------------------
# With equal thresholds the optimal weighted ratio is (P_w / P_s)^(2/alpha).

y = optimizer.optimal_weighted_ratio(cfg)
print(f"optimal eta_s lambda_s / eta_w lambda_w = {y:.6f}"
      f" (equal-threshold form {optimizer.equal_threshold_ratio(cfg):.6f})")
ratio = optimizer.solve_lambda_ratio(cfg)
print(f"lambda_w / lambda_s at the optimum = {ratio:.5f}")
print(f"same without carrier sensing (eta = 1): "
      f"{optimizer.solve_lambda_ratio(reference_scenario(csma=False)):.5f}")

###############################################################################
# Sweep
# -----
# The curve is flat near its peak: moving the ratio by 0.15 costs less than
# 1e-3 in rho_ce, which is why the Monte Carlo sweep shares drops across
# grid points.

ratios = np.round(np.arange(0.5, 4.0 + 1e-9, 0.05), 10)
ana = optimizer.sweep_ratio(cfg, ratios)
mc = optimizer.sweep_ratio(cfg, ratios, backend="mc", drops=drops, seed=montecarlo.DEFAULT_SEED)
for r, a, b in zip(ratios[::5], ana[::5], mc[::5]):
    print(f"ratio {r:4.2f}  analytic {a:.4f}  MC {b:.4f}")
print(f"argmax: analytic {ratios[np.argmax(ana)]:.2f}, MC {ratios[np.argmax(mc)]:.2f}")
