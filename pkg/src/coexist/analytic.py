"""Closed-form coexistence model: transmit, success and throughput.

All functions are pure and take a :class:`~coexist.model.NetworkConfig`.
Quadrature goes through :func:`scipy.integrate.quad` (adaptive
Gauss-Kronrod); any reported loss of accuracy becomes
:class:`~coexist.model.QuadratureFailure`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, Optional

from scipy import integrate

from .model import (
    AnalyticIntermediates,
    FadingModel,
    NetworkConfig,
    QuadratureFailure,
    RAYLEIGH,
    two_rat,
    validate,
)

ELL_RTOL = 1e-9
THROUGHPUT_RTOL = 1e-6
TAIL_FRACTION = 1e-10

# below this contention load the access probability uses its Taylor limit
_SMALL_LOAD = 1e-12


@dataclass(frozen=True)
class AnalyticReport:
    eta: Dict[str, float]
    rho: Dict[str, float]
    rho_ce: float
    c_ce: float


def _quad(f, a, b, rtol, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol / 10, limit=200, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(f"quadrature on [{a}, {b}] failed: {exc}") from exc
    if not math.isfinite(val) or err > rtol * abs(val) + 1e-300:
        raise QuadratureFailure(f"quadrature on [{a}, {b}] reached error {err:.3g} for value {val:.6g}")
    return val, err


# --------------------------------------------------------------------------
# transmit probability

def _access_miss(load: float, m: int) -> float:
    """[1 - p(m)]^m for contention load N = pi R^2 Lambda."""
    x = load / m
    if x < _SMALL_LOAD:
        one_minus_p = x / 2.0
    else:
        one_minus_p = 1.0 + math.expm1(-x) / x
    if one_minus_p <= 0.0:
        return 0.0
    return math.exp(m * math.log(one_minus_p))


def transmit_complement(config: NetworkConfig, rat: str) -> float:
    """Probability that an AP of ``rat`` finds no free channel (1 - eta)."""
    if not config.csma:
        return 0.0
    r = config.rat(rat)
    load = math.pi * r.sense_radius ** 2 * config.total_density
    return _access_miss(load, config.channels)


def transmit_probability(config: NetworkConfig, rat: str) -> float:
    """Probability that an AP of ``rat`` wins at least one of the m channels.

    The contention area uses the sensing AP's own radius against the
    aggregate density of all RATs.
    """
    validate(config)
    return 1.0 - transmit_complement(config, rat)


def transmit_probabilities(config: NetworkConfig) -> Dict[str, float]:
    validate(config)
    return {r.id: 1.0 - transmit_complement(config, r.id) for r in config.rats}


# --------------------------------------------------------------------------
# tau and ell

def tau_alpha(alpha: float, fading: FadingModel = RAYLEIGH) -> float:
    """Gamma(1 - 2/alpha) E[G^(2/alpha)]."""
    return math.gamma(1.0 - 2.0 / alpha) * fading.fractional_moment(alpha)


def tau_alpha_csc(alpha: float) -> float:
    """Cosecant form 2 pi csc(2 pi / alpha) / alpha, Rayleigh only."""
    x = 2.0 * math.pi / alpha
    return x / math.sin(x)


def ell(theta: float, alpha: float, fading: FadingModel = RAYLEIGH) -> float:
    """Integral of 1 - L_G(t^(-alpha/2)) over t in [0, theta^(-2/alpha)].

    The part beyond t = 1 is integrated after substituting t = 1/u so that
    very small thresholds (huge upper limits) stay accurate.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta!r}")
    half = alpha / 2.0
    upper = theta ** (-2.0 / alpha)

    def f(t):
        return float(fading.laplace_complement(t ** -half if t > 0 else math.inf))

    if upper <= 1.0:
        return _quad(f, 0.0, upper, ELL_RTOL)[0]

    def g(u):
        # f(1/u) / u^2
        return float(fading.laplace_complement(u ** half)) / (u * u)

    head = _quad(f, 0.0, 1.0, ELL_RTOL)[0]
    tail = _quad(g, 1.0 / upper, 1.0, ELL_RTOL)[0]
    return head + tail


# --------------------------------------------------------------------------
# success probability

def _load_ratio(config: NetworkConfig, rat: str, eta: Dict[str, float]) -> float:
    """Sum over t of (eta_t lambda_t / eta_r lambda_r) (P_t / P_r)^(2/alpha)."""
    r = config.rat(rat)
    own = eta[r.id] * r.density
    total = 0.0
    for t in config.rats:
        total += (eta[t.id] * t.density) / own * (t.power / r.power) ** (2.0 / config.alpha)
    return total


def _rho(theta, alpha, m, tau, load_ratio, ell_value):
    return 1.0 / (1.0 + theta ** (2.0 / alpha) / m * (tau * load_ratio - ell_value))


def success_probability(
    config: NetworkConfig, rat: str, theta: Optional[float] = None
) -> float:
    """Success probability of the typical user of ``rat`` (nearest-AP association).

    Parameters
    ----------
    config : NetworkConfig
    rat : str
        RAT id of the user.
    theta : float, optional
        Override of the RAT's SIR threshold (linear).

    Returns
    -------
    float
    """
    validate(config)
    r = config.rat(rat)
    theta = r.sir_threshold if theta is None else theta
    eta = transmit_probabilities(config)
    tau = tau_alpha(config.alpha, config.fading)
    return _rho(
        theta, config.alpha, config.channels, tau,
        _load_ratio(config, rat, eta), ell(theta, config.alpha, config.fading),
    )


def success_probability_two_rat(config: NetworkConfig):
    """(rho_s, rho_w) written out explicitly for a two-RAT scenario."""
    validate(config)
    s, w = two_rat(config)
    eta = transmit_probabilities(config)
    a, m = config.alpha, config.channels
    tau = tau_alpha(a, config.fading)
    es, ew = eta[s.id], eta[w.id]
    ell_s = ell(s.sir_threshold, a, config.fading)
    ell_w = ell(w.sir_threshold, a, config.fading)
    rho_s = 1.0 / (1.0 + s.sir_threshold ** (2.0 / a) / m * (
        tau * (1.0 + (ew * w.density) / (es * s.density) * (w.power / s.power) ** (2.0 / a)) - ell_s))
    rho_w = 1.0 / (1.0 + w.sir_threshold ** (2.0 / a) / m * (
        tau * (1.0 + (es * s.density) / (ew * w.density) * (s.power / w.power) ** (2.0 / a)) - ell_w))
    return rho_s, rho_w


def success_probabilities(config: NetworkConfig) -> Dict[str, float]:
    return {r.id: success_probability(config, r.id) for r in config.rats}


def coexisting_success_probability(config: NetworkConfig) -> float:
    rho = success_probabilities(config)
    return sum(rho.values()) / len(rho)


# --------------------------------------------------------------------------
# throughput

def _integrate_log_rate(rho_of_theta: Callable[[float], float], x_max: float) -> float:
    """Integral of rho(2^x - 1) over x in [0, x_max]."""

    def f(x):
        return float(rho_of_theta(math.expm1(x * math.log(2.0))))

    return _quad(f, 0.0, x_max, THROUGHPUT_RTOL)[0]


def _truncation_point(alpha, m, tau, load_ratio, rho_at_one):
    """x beyond which the integrand tail holds < TAIL_FRACTION of the mass.

    For x >= max(3, alpha), rho(2^x - 1) <= 2 m 2^(-2x/alpha) / (tau S), whose
    tail integral is closed form; the accumulated mass is at least rho(1).
    """
    x0 = max(3.0, alpha)
    coef = 2.0 * m / (tau * load_ratio) * alpha / (2.0 * math.log(2.0))
    target = TAIL_FRACTION * rho_at_one
    x = alpha / 2.0 * math.log2(coef / target)
    return max(x0, x)


def spectral_efficiency(config: NetworkConfig, rat: str) -> float:
    """E[log2(1 + SIR)] of the typical ``rat`` user, bps/Hz."""
    validate(config)
    a, m = config.alpha, config.channels
    eta = transmit_probabilities(config)
    tau = tau_alpha(a, config.fading)
    load = _load_ratio(config, rat, eta)

    def rho_of(theta):
        if theta <= 0.0:
            return 1.0
        return _rho(theta, a, m, tau, load, ell(theta, a, config.fading))

    x_max = _truncation_point(a, m, tau, load, rho_of(1.0))
    return _integrate_log_rate(rho_of, x_max)


def coexisting_throughput(config: NetworkConfig) -> float:
    """Per-channel sum of spectral efficiencies over all RATs (bps/Hz/channel)."""
    validate(config)
    return sum(spectral_efficiency(config, r.id) for r in config.rats) / config.channels


# --------------------------------------------------------------------------
# summaries

def intermediates(config: NetworkConfig) -> AnalyticIntermediates:
    """tau, ell_r, c_r, d_r and the power-weighted density ratio y."""
    validate(config)
    s, w = two_rat(config)
    a, m = config.alpha, config.channels
    tau = tau_alpha(a, config.fading)
    ells, cs, ds = {}, {}, {}
    for r in (s, w):
        ells[r.id] = ell(r.sir_threshold, a, config.fading)
        cs[r.id] = 1.0 + r.sir_threshold ** (2.0 / a) * (tau - ells[r.id]) / m
        ds[r.id] = tau * r.sir_threshold ** (2.0 / a) / m
    eta = transmit_probabilities(config)
    y = (eta[s.id] * s.density) / (eta[w.id] * w.density) * (s.power / w.power) ** (2.0 / a)
    return AnalyticIntermediates(tau_alpha=tau, ell=ells, c=cs, d=ds, y=y)


def report(config: NetworkConfig, throughput: bool = True) -> AnalyticReport:
    rho = success_probabilities(config)
    return AnalyticReport(
        eta=transmit_probabilities(config),
        rho=rho,
        rho_ce=sum(rho.values()) / len(rho),
        c_ce=coexisting_throughput(config) if throughput else float("nan"),
    )
