"""
Point patterns and nearest-AP distances
=======================================

The geometry module samples AP patterns, applies contention and answers
nearest-transmitter queries. For a PPP of transmitting density
eta_r lambda_r the squared distance from the typical user to its nearest
AP is exponential with rate pi eta_r lambda_r.
"""

import numpy as np
from scipy import stats

from coexist import analytic, geometry, montecarlo
from coexist.model import reference_scenario

cfg = reference_scenario(channels=5)
eta = analytic.transmit_probabilities(cfg)

###############################################################################
# Sampling and contention

w = geometry.square(1000.0)
p = geometry.contend_thinned_ppp(geometry.sample_network(cfg, w, 1), cfg, 2)
for r in cfg.rats:
    sub = p.of(r.id)
    print(f"{r.id}: {len(sub)} APs (expected {r.density * w.area:.0f}),"
          f" {sub.transmitting.mean():.3f} transmitting (eta {eta[r.id]:.3f})")
idx, d = geometry.nearest_transmitting(p, "w")
print(f"nearest transmitting WiFi AP: #{idx} at {d:.1f} m on channel {p.channel[idx]}")

###############################################################################
# Nearest-distance law
# --------------------
# ``simulate_drops`` exposes the per-drop records behind every estimate.

rec = montecarlo.simulate_drops(cfg, 5000, seed=3)
for j, r in enumerate(cfg.rats):
    rate = np.pi * eta[r.id] * r.density
    d2 = rec.serving_distance[:, j] ** 2
    print(f"{r.id}: mean D^2 {d2.mean():8.1f} m^2 vs 1/rate {1 / rate:8.1f},"
          f" KS p-value {stats.kstest(d2, 'expon', args=(0, 1 / rate)).pvalue:.3f}")

###############################################################################
# SIR samples
# -----------

sir = rec.sir
print("median SIR (dB):", np.round(10 * np.log10(np.median(sir, axis=0)), 2))
print("empirical success at theta = 0.5:", rec.success([0.5, 0.5]).mean(axis=0))
