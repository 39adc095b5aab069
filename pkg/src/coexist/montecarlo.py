"""Drop-based Monte Carlo estimates of success probability and throughput.

Each drop places the typical user of every RAT at the window center,
samples all AP processes, runs channel contention, serves each user from
its nearest transmitting AP of the same RAT and sums the interference from
every other AP transmitting on the serving channel.

Drops are generated in fixed-size chunks; chunk ``i`` draws from
``SeedSequence(seed, spawn_key=(i,))``. Results therefore depend only on
``(configs, drops, seed, mode, window)``, never on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import analytic
from ._kernels import simulate_chunk
from .geometry import PointPattern, Window, default_window, distances, nearest_transmitting
from .model import ConfigError, DegenerateScenario, NetworkConfig, validate

MODES = ("thinned", "matern")
DEFAULT_SEED = 1729
DEFAULT_DROPS = 100_000
DEFAULT_THROUGHPUT_DROPS = 200_000
CHUNK = 1000
Z95 = 1.96


@dataclass(frozen=True)
class McEstimate:
    mean: float
    ci_half_width: float
    drops: int
    seed: int
    mode: str
    no_serving: int = 0

    @property
    def low(self):
        return self.mean - self.ci_half_width

    @property
    def high(self):
        return self.mean + self.ci_half_width


@dataclass
class DropRecords:
    """Per-drop outcomes for one scenario; arrays are (drops, n_rats).

    ``serving_distance`` is inf and ``signal`` 0 when no AP of that RAT
    transmits. ``sir`` is inf for a served user without interferers.
    """

    rat_ids: tuple
    serving_distance: np.ndarray
    signal: np.ndarray
    interference: np.ndarray

    @property
    def sir(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.signal / self.interference
        out[self.signal == 0] = 0.0
        return out

    def success(self, thresholds) -> np.ndarray:
        return (self.signal >= np.asarray(thresholds) * self.interference) & np.isfinite(self.serving_distance)

    def served(self) -> np.ndarray:
        return np.isfinite(self.serving_distance)


@dataclass(frozen=True)
class DropRecord:
    """Outcome of one drop for one RAT's typical user."""

    serving_distance: float
    sir: float
    interference: float
    success: bool


# --------------------------------------------------------------------------
# batch preparation

@dataclass(frozen=True)
class _Batch:
    width: float
    height: float
    dom_mean: np.ndarray
    keep: np.ndarray
    eta: np.ndarray
    power: np.ndarray
    radius: np.ndarray
    channels: np.ndarray
    matern: np.ndarray
    alpha: float
    torus: bool
    thresholds: np.ndarray


def _prepare(configs: Sequence[NetworkConfig], mode: str, window: Optional[Window], torus: bool) -> _Batch:
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if not configs:
        raise ValueError("no scenarios given")
    for c in configs:
        validate(c)
    first = configs[0]
    for c in configs[1:]:
        if c.ids != first.ids or c.alpha != first.alpha or c.fading != first.fading:
            raise ConfigError("batched scenarios must share RAT ids, alpha and fading")
    for c in configs:
        c.fading._require_rayleigh()
    if window is None:
        sides = [default_window(c).width for c in configs]
        window = Window(max(sides), max(sides))
    dens = np.array([[r.density for r in c.rats] for c in configs])
    dom = dens.max(axis=0)
    for c in configs:
        for r in c.rats:
            if r.density * window.area < 1.0:
                raise DegenerateScenario(
                    f"expected number of RAT {r.id} APs in the window is "
                    f"{r.density * window.area:.3g} < 1")
    eta = np.array([[analytic.transmit_probability(c, r.id) for r in c.rats] for c in configs])
    return _Batch(
        width=float(window.width), height=float(window.height),
        dom_mean=dom * window.area, keep=dens / dom, eta=eta,
        power=np.array([[r.power for r in c.rats] for c in configs]),
        radius=np.array([[r.sense_radius for r in c.rats] for c in configs]),
        channels=np.array([c.channels for c in configs], dtype=np.int64),
        matern=np.array([mode == "matern" and c.csma for c in configs]),
        alpha=float(first.alpha), torus=bool(torus),
        thresholds=np.array([[r.sir_threshold for r in c.rats] for c in configs]),
    )


def _chunk_sizes(drops: int) -> List[int]:
    if drops < 1:
        raise ValueError(f"drops must be >= 1, got {drops}")
    full, rest = divmod(drops, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _raw_chunk(batch: _Batch, seed: int, index: int, size: int):
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    rng = np.random.Generator(np.random.PCG64(ss))
    shape = (batch.keep.shape[0], size, batch.keep.shape[1])
    dist, sig, itf = np.empty(shape), np.empty(shape), np.empty(shape)
    simulate_chunk(
        rng, size, batch.width, batch.height, batch.dom_mean, batch.keep, batch.eta,
        batch.power, batch.radius, batch.channels, batch.matern, batch.alpha,
        batch.torus, dist, sig, itf,
    )
    return dist, sig, itf


# statistic columns: success per RAT, rho_ce, throughput, and no-serving per RAT
def _reduce_chunk(args):
    batch, seed, index, size = args
    dist, sig, itf = _raw_chunk(batch, seed, index, size)
    served = np.isfinite(dist)
    ok = (sig >= batch.thresholds[:, None, :] * itf) & served
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(served, np.log2(1.0 + sig / itf), 0.0)
    thr = rate.sum(axis=2) / batch.channels[:, None]
    ce = ok.mean(axis=2)
    values = np.concatenate([ok.astype(float), ce[..., None], thr[..., None]], axis=2)
    sums = values.sum(axis=1)
    sumsq = (values * values).sum(axis=1)
    missing = (~served).sum(axis=1)
    return sums, sumsq, missing


def _map(fn, tasks, workers):
    if workers is None or workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _estimate(total, totsq, n, seed, mode, missing=0):
    mean = total / n
    var = max(totsq / n - mean * mean, 0.0)
    return McEstimate(float(mean), float(Z95 * math.sqrt(var) / math.sqrt(n)), n, seed, mode, int(missing))


# --------------------------------------------------------------------------
# public API

def sweep(
    configs: Sequence[NetworkConfig],
    drops: int = DEFAULT_DROPS,
    seed: int = DEFAULT_SEED,
    mode: str = "thinned",
    window: Optional[Window] = None,
    torus: bool = True,
    workers: int = 1,
) -> List[Dict]:
    """Estimate rho_r, rho_ce and C_ce for several scenarios on shared drops.

    All scenarios are evaluated on thinnings of one dominating AP pattern
    per drop (common random numbers), which keeps differences between
    neighboring sweep points far less noisy than independent runs. The
    window defaults to the largest :func:`default_window` among them.

    Returns
    -------
    list of dict
        One ``{"rho": {rat_id: McEstimate}, "rho_ce": McEstimate,
        "c_ce": McEstimate}`` per scenario.
    """
    batch = _prepare(configs, mode, window, torus)
    sizes = _chunk_sizes(drops)
    parts = _map(_reduce_chunk, [(batch, seed, i, s) for i, s in enumerate(sizes)], workers)
    sums = sum(p[0] for p in parts)
    sumsq = sum(p[1] for p in parts)
    missing = sum(p[2] for p in parts)
    out = []
    ids = configs[0].ids
    n_rats = len(ids)
    for k in range(len(configs)):
        rho = {
            rid: _estimate(sums[k, j], sumsq[k, j], drops, seed, mode, missing[k, j])
            for j, rid in enumerate(ids)
        }
        out.append({
            "rho": rho,
            "rho_ce": _estimate(sums[k, n_rats], sumsq[k, n_rats], drops, seed, mode, missing[k].sum()),
            "c_ce": _estimate(sums[k, n_rats + 1], sumsq[k, n_rats + 1], drops, seed, mode, missing[k].sum()),
        })
    return out


def estimate_all(config: NetworkConfig, drops: int = DEFAULT_DROPS, seed: int = DEFAULT_SEED,
                 mode: str = "thinned", window: Optional[Window] = None, torus: bool = True,
                 workers: int = 1) -> Dict:
    return sweep([config], drops, seed, mode, window, torus, workers)[0]


def estimate_success(config: NetworkConfig, rat: str, drops: int = DEFAULT_DROPS,
                     seed: int = DEFAULT_SEED, mode: str = "thinned", **kw) -> McEstimate:
    """Fraction of drops in which the ``rat`` user's SIR reaches its threshold.

    Drops without any transmitting AP of ``rat`` count as failures and are
    reported in ``no_serving``.
    """
    config.rat(rat)
    return estimate_all(config, drops, seed, mode, **kw)["rho"][rat]


def estimate_coexisting_success(config: NetworkConfig, drops: int = DEFAULT_DROPS,
                                seed: int = DEFAULT_SEED, mode: str = "thinned", **kw) -> McEstimate:
    """Per drop, average the per-RAT success indicators, then average over drops."""
    return estimate_all(config, drops, seed, mode, **kw)["rho_ce"]


def estimate_throughput(config: NetworkConfig, drops: int = DEFAULT_THROUGHPUT_DROPS,
                        seed: int = DEFAULT_SEED, mode: str = "thinned", **kw) -> McEstimate:
    """Mean of (1/m) sum_r log2(1 + SIR_r); unserved users contribute 0."""
    return estimate_all(config, drops, seed, mode, **kw)["c_ce"]


def simulate_drops(config: NetworkConfig, drops: int, seed: int = DEFAULT_SEED,
                   mode: str = "thinned", window: Optional[Window] = None,
                   torus: bool = True) -> DropRecords:
    """Raw per-drop outcomes, generated exactly as :func:`estimate_all` does."""
    batch = _prepare([config], mode, window, torus)
    parts = [_raw_chunk(batch, seed, i, s) for i, s in enumerate(_chunk_sizes(drops))]
    dist, sig, itf = (np.concatenate([p[j][0] for p in parts]) for j in range(3))
    return DropRecords(config.ids, dist, sig, itf)


def compare_modes(config: NetworkConfig, drops: int = DEFAULT_DROPS, seed: int = DEFAULT_SEED,
                  **kw) -> Dict[str, Dict[str, float]]:
    """Matern-minus-thinned differences of every estimate, for reporting only."""
    thin = estimate_all(config, drops, seed, "thinned", **kw)
    mat = estimate_all(config, drops, seed, "matern", **kw)
    out = {}
    for rid in config.ids:
        out[f"rho_{rid}"] = _diff(mat["rho"][rid], thin["rho"][rid])
    out["rho_ce"] = _diff(mat["rho_ce"], thin["rho_ce"])
    out["c_ce"] = _diff(mat["c_ce"], thin["c_ce"])
    return out


def _diff(a: McEstimate, b: McEstimate):
    return {"matern": a.mean, "thinned": b.mean, "difference": a.mean - b.mean,
            "ci_half_width": math.hypot(a.ci_half_width, b.ci_half_width)}


def evaluate_pattern(pattern: PointPattern, config: NetworkConfig, rat: str,
                     rng: np.random.Generator, origin=None) -> DropRecord:
    """Evaluate one contended pattern for the ``rat`` user (plain numpy path).

    The serving AP is the nearest transmitting AP of ``rat``; interference
    comes from every other transmitting AP on its channel with i.i.d.
    unit-mean exponential gains.
    """
    origin = pattern.window.center if origin is None else origin
    r = config.rat(rat)
    found = nearest_transmitting(pattern, rat, origin)
    if found is None:
        return DropRecord(math.inf, 0.0, 0.0, False)
    idx, dist = found
    power = {p.id: p.power for p in config.rats}
    co = pattern.transmitting & (pattern.channel == pattern.channel[idx])
    co[idx] = False
    sub = pattern.select(co)
    d = distances(sub, origin)
    p = np.array([power[x] for x in sub.rat], dtype=float)
    itf = float(np.sum(p * rng.standard_exponential(len(sub)) * d ** -config.alpha))
    sig = r.power * rng.standard_exponential() * dist ** -config.alpha
    sir = sig / itf if itf > 0 else math.inf
    return DropRecord(dist, sir, itf, sir >= r.sir_threshold)
