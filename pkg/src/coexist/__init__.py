"""Coexisting success probability and throughput of multi-RAT networks
sharing unlicensed channels, in closed form and by Monte Carlo."""

from .model import (
    AnalyticIntermediates,
    FadingModel,
    NetworkConfig,
    RatParams,
    RAYLEIGH,
    reference_scenario,
    validate,
)
from .analytic import (
    AnalyticReport,
    coexisting_success_probability,
    coexisting_throughput,
    ell,
    success_probability,
    tau_alpha,
    transmit_probability,
)

__version__ = "0.1.0"
