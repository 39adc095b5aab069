"""
Thinned PPP versus sequential CSMA
==================================

The closed forms treat transmitters as an independent thinning of each PPP
with retention eta_r. A more literal contention model visits APs in random
order and lets each take a channel nobody within its sensing radius holds
(a Matern type II style hard-core process). This script compares the two.

Usage: python 04_contention_modes.py [drops]
"""

import sys

import numpy as np

from coexist import geometry, montecarlo
from coexist.model import reference_scenario

drops = int(sys.argv[1]) if len(sys.argv) > 1 else 5_000
cfg = reference_scenario(channels=5)

###############################################################################
# One drop
# --------

w = geometry.default_window(cfg)
pattern = geometry.sample_network(cfg, w, 7)
thin = geometry.contend_thinned_ppp(pattern, cfg, 8)
mat = geometry.contend_matern_csma(pattern, cfg, 8)
print(f"{len(pattern)} APs in a {w.width:.0f} m square window")
print(f"transmitting: thinned {thin.transmitting.sum()}, sequential CSMA {mat.transmitting.sum()}")
print("per-channel occupancy (CSMA):", geometry.channel_occupancy(mat, cfg.channels))
print("hard-core violations: thinned", geometry.hardcore_violations(thin, cfg),
      " CSMA", geometry.hardcore_violations(mat, cfg))

###############################################################################
# Success and throughput under each mode
# --------------------------------------
# Hard-core spacing removes close interferers, so the CSMA mode is more
# optimistic than the thinned model.

diff = montecarlo.compare_modes(cfg, drops=drops)
for key, d in diff.items():
    print(f"{key:7s} thinned {d['thinned']:.4f}  CSMA {d['matern']:.4f}"
          f"  difference {d['difference']:+.4f} +/- {d['ci_half_width']:.4f}")

###############################################################################
# Sensing radius sensitivity
# --------------------------
# Shrinking every sensing radius lets more APs transmit, bringing the two
# modes closer together.

for scale in (0.25, 0.5, 1.0):
    c = cfg.with_rat("s", sense_radius=50.0 * scale).with_rat("w", sense_radius=30.0 * scale)
    d = montecarlo.compare_modes(c, drops=max(drops // 5, 200))["rho_ce"]
    print(f"radius x{scale:<4}  rho_ce difference {d['difference']:+.4f}")
