"""Optimal AP-density ratio and channel-count properties (two RATs).

Roles: ``config.rats[0]`` is the small-cell RAT ("s"), ``config.rats[1]``
the WiFi RAT ("w"). Ratios named ``lambda_ratio`` are lambda_w / lambda_s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import optimize

from . import analytic, montecarlo
from .model import (
    ConcavityViolation,
    InfeasibleConstraint,
    NetworkConfig,
    NoRootInBracket,
    reference_scenario,
    two_rat,
    validate,
)

BRACKET = (1e-3, 1e3)
RATIO_RTOL = 1e-6


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    margin: float
    c: dict
    bound: float


@dataclass(frozen=True)
class OptimalityResult:
    feasible: bool
    y_star: Optional[float]
    lambda_ratio_star: Optional[float]
    rho_ce_at_star: Optional[float]
    method: str


@dataclass(frozen=True)
class ConcavityReport:
    m: np.ndarray
    rho_ce: np.ndarray
    first_diff: np.ndarray
    second_diff: np.ndarray
    rho: dict = field(default_factory=dict)


def check_constraint(config: NetworkConfig) -> Feasibility:
    """Is min(c_s, c_w) above (theta_s theta_w)^(1/alpha) tau / m?"""
    validate(config)
    s, w = two_rat(config)
    it = analytic.intermediates(config)
    bound = (s.sir_threshold * w.sir_threshold) ** (1.0 / config.alpha) * it.tau_alpha / config.channels
    margin = min(it.c[s.id], it.c[w.id]) - bound
    return Feasibility(margin > 0, margin, dict(it.c), bound)


def rho_ce_of_y(config: NetworkConfig, y):
    """Coexisting success probability as a function of the power-weighted ratio y.

    y = (eta_s lambda_s / eta_w lambda_w)(P_s / P_w)^(2/alpha); the c_r and
    d_r coefficients come from ``config``.
    """
    s, w = two_rat(config)
    it = analytic.intermediates(config)
    cs, cw, ds, dw = it.c[s.id], it.c[w.id], it.d[s.id], it.d[w.id]
    y = np.asarray(y, dtype=float)
    return 0.5 * y / (cs * y + ds) + 0.5 / (cw + dw * y)


def optimal_weighted_ratio(config: NetworkConfig) -> float:
    """Optimal eta_s lambda_s / (eta_w lambda_w).

    Raises
    ------
    InfeasibleConstraint
        If the feasibility condition of :func:`check_constraint` fails.
    """
    feas = check_constraint(config)
    if not feas.feasible:
        raise InfeasibleConstraint(f"constraint margin {feas.margin:.4g} <= 0")
    s, w = two_rat(config)
    a, m = config.alpha, config.channels
    tau = analytic.tau_alpha(a, config.fading)
    k = tau * (s.sir_threshold * w.sir_threshold) ** (1.0 / a)
    lead = (math.sqrt(s.sir_threshold) * w.power / (math.sqrt(w.sir_threshold) * s.power)) ** (2.0 / a)
    return lead * (m * feas.c[w.id] - k) / (m * feas.c[s.id] - k)


def equal_threshold_ratio(config: NetworkConfig) -> float:
    """(P_w / P_s)^(2/alpha), the optimum when both thresholds coincide."""
    s, w = two_rat(config)
    return (w.power / s.power) ** (2.0 / config.alpha)


def _with_lambda_w(config: NetworkConfig, lam_w: float) -> NetworkConfig:
    return config.with_rat(config.rats[1].id, density=lam_w)


def _weighted_ratio(config: NetworkConfig, lam_w: float) -> float:
    cfg = _with_lambda_w(config, lam_w)
    s, w = cfg.rats
    eta = analytic.transmit_probabilities(cfg)
    return (eta[s.id] * s.density) / (eta[w.id] * w.density)


def solve_lambda_ratio(config: NetworkConfig, target: Optional[float] = None,
                       check_points: int = 200) -> float:
    """lambda_w / lambda_s at which eta_s lambda_s / (eta_w lambda_w) hits ``target``.

    lambda_s stays fixed; both eta's move with the total density. Bisection
    runs on lambda_w over ``BRACKET`` times lambda_s after checking that the
    objective is strictly monotone on a log grid over the bracket.
    """
    validate(config)
    s, _ = two_rat(config)
    if target is None:
        target = optimal_weighted_ratio(config)
    lo, hi = BRACKET[0] * s.density, BRACKET[1] * s.density

    def f(lam_w):
        return _weighted_ratio(config, lam_w) - target

    grid = np.geomspace(lo, hi, check_points)
    vals = np.array([f(x) for x in grid])
    steps = np.diff(vals)
    if not (np.all(steps < 0) or np.all(steps > 0)):
        raise NoRootInBracket("objective is not monotone on the bracket")
    if vals[0] * vals[-1] > 0:
        raise NoRootInBracket(
            f"no sign change on [{lo:.3g}, {hi:.3g}] (values {vals[0]:.3g}, {vals[-1]:.3g})")
    root = optimize.bisect(f, lo, hi, xtol=1e-300, rtol=RATIO_RTOL, maxiter=500)
    return root / s.density


def ratio_configs(config: NetworkConfig, ratios: Sequence[float]) -> List[NetworkConfig]:
    s, _ = two_rat(config)
    return [_with_lambda_w(config, float(r) * s.density) for r in ratios]


def sweep_ratio(config: NetworkConfig, ratios: Sequence[float], backend: str = "analytic",
                **mc) -> np.ndarray:
    """rho_ce over lambda_w / lambda_s values.

    ``backend="mc"`` runs :func:`coexist.montecarlo.sweep` on shared drops,
    forwarding ``mc`` (drops, seed, mode, ...).
    """
    cfgs = ratio_configs(config, ratios)
    if backend == "analytic":
        return np.array([analytic.coexisting_success_probability(c) for c in cfgs])
    if backend == "mc":
        return np.array([r["rho_ce"].mean for r in montecarlo.sweep(cfgs, **mc)])
    raise ValueError(f"unknown backend {backend!r}")


def optimize_ratio(config: NetworkConfig, method: str = "closed-form",
                   ratios: Optional[Sequence[float]] = None) -> OptimalityResult:
    """Optimal lambda_w / lambda_s either in closed form or by a grid sweep."""
    feas = check_constraint(config)
    if method == "closed-form":
        if not feas.feasible:
            return OptimalityResult(False, None, None, None, method)
        y = optimal_weighted_ratio(config)
        ratio = solve_lambda_ratio(config, y)
    elif method == "sweep":
        if ratios is None:
            ratios = np.round(np.arange(0.5, 4.0 + 1e-9, 0.01), 10)
        vals = sweep_ratio(config, ratios)
        ratio = float(ratios[int(np.argmax(vals))])
        y = _weighted_ratio(config, ratio * config.rats[0].density)
    else:
        raise ValueError(f"unknown method {method!r}")
    best = ratio_configs(config, [ratio])[0]
    return OptimalityResult(
        feas.feasible, y if feas.feasible else None, ratio,
        analytic.coexisting_success_probability(best), method,
    )


def verify_concavity_in_m(config: NetworkConfig, m_max: int = 10) -> ConcavityReport:
    """Evaluate rho_ce for m = 1..m_max and require it increasing and concave.

    Raises
    ------
    ConcavityViolation
        If a first difference is not positive or a second difference is not
        negative.
    """
    if m_max < 3:
        raise ValueError("m_max must be at least 3")
    ms = np.arange(1, m_max + 1)
    cfgs = [config.with_channels(int(m)) for m in ms]
    rho = {r.id: np.array([analytic.success_probability(c, r.id) for c in cfgs]) for r in config.rats}
    ce = sum(rho.values()) / len(rho)
    d1 = np.diff(ce)
    d2 = np.diff(ce, 2)
    rep = ConcavityReport(ms, ce, d1, d2, rho)
    if np.any(d1 <= 0):
        raise ConcavityViolation(f"rho_ce not increasing at m = {ms[1:][d1 <= 0].tolist()}")
    if np.any(d2 >= 0):
        raise ConcavityViolation(f"rho_ce not concave at m = {ms[1:-1][d2 >= 0].tolist()}")
    return rep


def scan_constraint(alpha: float = 4.0, channels: int = 1, thetas=None) -> np.ndarray:
    """Constraint margins over a (theta_s, theta_w) grid; rows index theta_s."""
    if thetas is None:
        thetas = np.geomspace(1e-4, 1e4, 41)
    base = reference_scenario(channels=channels)
    base = NetworkConfig(base.rats, channels, alpha)
    out = np.empty((len(thetas), len(thetas)))
    for i, ts in enumerate(thetas):
        for j, tw in enumerate(thetas):
            cfg = base.with_rat("s", sir_threshold=float(ts)).with_rat("w", sir_threshold=float(tw))
            out[i, j] = check_constraint(cfg).margin
    return out
