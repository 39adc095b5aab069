"""AP point patterns: PPP sampling, CSMA contention and nearest-AP queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from . import analytic
from ._kernels import matern_assign
from .model import NetworkConfig, validate

MIN_WINDOW_SIDE = 1000.0


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle of size ``width`` x ``height`` meters."""

    width: float
    height: float
    center: Tuple[float, float] = (0.0, 0.0)

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def bounds(self):
        cx, cy = self.center
        return (cx - self.width / 2, cy - self.height / 2,
                cx + self.width / 2, cy + self.height / 2)

    def contains(self, xy) -> np.ndarray:
        x0, y0, x1, y1 = self.bounds
        xy = np.atleast_2d(xy)
        return (xy[:, 0] >= x0) & (xy[:, 0] <= x1) & (xy[:, 1] >= y0) & (xy[:, 1] <= y1)


def square(side: float) -> Window:
    return Window(side, side)


@dataclass(frozen=True)
class PointPattern:
    """Marked AP locations in a window.

    ``channel`` is 1-based; 0 means no channel (and ``transmitting`` False).
    ``rat`` holds RAT ids as strings.
    """

    positions: np.ndarray
    rat: np.ndarray
    mark: np.ndarray
    channel: np.ndarray
    transmitting: np.ndarray
    window: Window
    torus: bool = True

    def __len__(self):
        return self.positions.shape[0]

    def select(self, mask) -> "PointPattern":
        return replace(
            self, positions=self.positions[mask], rat=self.rat[mask], mark=self.mark[mask],
            channel=self.channel[mask], transmitting=self.transmitting[mask],
        )

    def of(self, rat: str) -> "PointPattern":
        return self.select(self.rat == rat)


def empty_pattern(window: Window, torus: bool = True) -> PointPattern:
    return PointPattern(
        positions=np.empty((0, 2)), rat=np.empty(0, dtype=object), mark=np.empty(0),
        channel=np.zeros(0, dtype=np.int64), transmitting=np.zeros(0, dtype=bool),
        window=window, torus=torus,
    )


def merge(patterns: Sequence[PointPattern]) -> PointPattern:
    first = patterns[0]
    return replace(
        first,
        positions=np.concatenate([p.positions for p in patterns]),
        rat=np.concatenate([p.rat for p in patterns]),
        mark=np.concatenate([p.mark for p in patterns]),
        channel=np.concatenate([p.channel for p in patterns]),
        transmitting=np.concatenate([p.transmitting for p in patterns]),
    )


def sample_ppp(density: float, window: Window, rat: str, rng_seed=None,
               torus: bool = True) -> PointPattern:
    """Homogeneous PPP of ``density`` on ``window`` with uniform contention marks."""
    if density < 0:
        raise ValueError(f"density must be non-negative, got {density}")
    rng = np.random.default_rng(rng_seed)
    n = rng.poisson(density * window.area)
    x0, y0, _, _ = window.bounds
    pos = rng.random((n, 2)) * (window.width, window.height) + (x0, y0)
    return PointPattern(
        positions=pos, rat=np.full(n, rat, dtype=object), mark=rng.random(n),
        channel=np.zeros(n, dtype=np.int64), transmitting=np.zeros(n, dtype=bool),
        window=window, torus=torus,
    )


def sample_network(config: NetworkConfig, window: Window, rng_seed=None,
                   torus: bool = True) -> PointPattern:
    """One PPP per RAT, merged; seeds for each RAT are spawned from ``rng_seed``."""
    validate(config)
    seeds = np.random.SeedSequence(rng_seed).spawn(len(config.rats))
    return merge([sample_ppp(r.density, window, r.id, s, torus) for r, s in zip(config.rats, seeds)])


def contend_thinned_ppp(pattern: PointPattern, config: NetworkConfig, rng_seed=None) -> PointPattern:
    """Independent thinning: each AP transmits w.p. eta_r on a uniform channel."""
    validate(config)
    rng = np.random.default_rng(rng_seed)
    eta = analytic.transmit_probabilities(config)
    p = np.array([eta[r] for r in pattern.rat], dtype=float)
    tx = rng.random(len(pattern)) < p
    ch = rng.integers(1, config.channels + 1, size=len(pattern))
    return replace(pattern, transmitting=tx, channel=np.where(tx, ch, 0))


def contend_matern_csma(pattern: PointPattern, config: NetworkConfig, rng_seed=None) -> PointPattern:
    """Sequential CSMA (Matern type II style) over the pattern's marks.

    APs are visited in increasing mark order. An AP of RAT r treats a channel
    as busy when an already-visited AP within r's sensing radius holds it,
    and picks uniformly among the free channels; with none free it stays
    silent. With ``config.csma`` off every AP transmits on a uniform channel.
    """
    validate(config)
    rng = np.random.default_rng(rng_seed)
    choice = rng.random(len(pattern))
    m = config.channels
    if not config.csma:
        ch = np.minimum((choice * m).astype(np.int64), m - 1) + 1
        return replace(pattern, channel=ch, transmitting=np.ones(len(pattern), dtype=bool))
    ids = config.ids
    rat_idx = np.array([ids.index(r) for r in pattern.rat], dtype=np.int64)
    radius = np.array([r.sense_radius for r in config.rats], dtype=float)
    cx, cy = pattern.window.center
    ch = matern_assign(
        pattern.positions[:, 0] - cx, pattern.positions[:, 1] - cy, rat_idx,
        pattern.mark.astype(float), choice, radius, m,
        float(pattern.window.width), float(pattern.window.height), pattern.torus,
    )
    return replace(pattern, channel=ch + 1, transmitting=ch >= 0)


def distances(pattern: PointPattern, origin) -> np.ndarray:
    """Distance from ``origin`` to every point, wrapping if ``pattern.torus``."""
    d = np.abs(pattern.positions - np.asarray(origin, dtype=float))
    if pattern.torus:
        size = np.array([pattern.window.width, pattern.window.height])
        d = np.minimum(d, size - d)
    return np.hypot(d[:, 0], d[:, 1])


def nearest_transmitting(pattern: PointPattern, rat: str, origin=(0.0, 0.0)):
    """Closest transmitting AP of ``rat`` as ``(index, distance)``, or None.

    ``index`` refers to the position in ``pattern``.
    """
    cand = np.flatnonzero(pattern.transmitting & (pattern.rat == rat))
    if cand.size == 0:
        return None
    d = distances(pattern.select(cand), origin)
    j = int(np.argmin(d))
    return int(cand[j]), float(d[j])


def hardcore_violations(pattern: PointPattern, config: NetworkConfig) -> int:
    """Count transmitting same-channel pairs where the later AP could sense the earlier.

    Brute force over pairs (per channel), independent of the grid index used
    during contention.
    """
    radius = {r.id: r.sense_radius for r in config.rats}
    bad = 0
    for c in np.unique(pattern.channel[pattern.transmitting]):
        sub = pattern.select(pattern.transmitting & (pattern.channel == c))
        if len(sub) < 2:
            continue
        diff = np.abs(sub.positions[:, None, :] - sub.positions[None, :, :])
        if sub.torus:
            size = np.array([sub.window.width, sub.window.height])
            diff = np.minimum(diff, size - diff)
        dist = np.hypot(diff[..., 0], diff[..., 1])
        later = sub.mark[None, :] > sub.mark[:, None]  # [i, j]: j after i
        r_later = np.array([radius[r] for r in sub.rat])[None, :]
        bad += int(np.count_nonzero(later & (dist <= r_later)))
    return bad


def default_window(config: NetworkConfig) -> Window:
    """Square window centered on the typical user.

    Half-width is 5 mean nearest-transmitter distances of the sparsest RAT
    plus a guard of 10 / sqrt(pi lambda_min), and the side is never below
    1 km.
    """
    eta = analytic.transmit_probabilities(config)
    lam_min = min(r.density for r in config.rats)
    tx_min = min(eta[r.id] * r.density for r in config.rats)
    half = 5.0 / (2.0 * math.sqrt(tx_min)) + 10.0 / math.sqrt(math.pi * lam_min)
    return square(max(MIN_WINDOW_SIDE, 2.0 * half))


def channel_occupancy(pattern: PointPattern, channels: int, rat: Optional[str] = None) -> np.ndarray:
    """Number of transmitting APs on each channel 1..m."""
    mask = pattern.transmitting if rat is None else pattern.transmitting & (pattern.rat == rat)
    return np.bincount(pattern.channel[mask], minlength=channels + 1)[1:]
