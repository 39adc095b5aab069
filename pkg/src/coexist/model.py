"""Scenario description types shared by the analytic and simulation code.

Thresholds are linear (not dB) and densities are in APs per square meter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np


class CoexistError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CoexistError, ValueError):
    pass


class AlphaOutOfRange(ConfigError):
    pass


class NonPositiveParameter(ConfigError):
    pass


class DuplicateRatId(ConfigError):
    pass


class ZeroChannels(ConfigError):
    pass


class UnsupportedFading(CoexistError):
    pass


class NotTwoRat(CoexistError):
    pass


class NumericalError(CoexistError):
    """A numerical routine (quadrature, root finding) did not converge."""


class QuadratureFailure(NumericalError):
    pass


class NoRootInBracket(NumericalError):
    pass


class InfeasibleConstraint(NumericalError):
    pass


class ConcavityViolation(NumericalError):
    pass


class DegenerateScenario(CoexistError):
    pass


@dataclass(frozen=True)
class FadingModel:
    """Unit-mean channel power gain distribution used for H and G.

    Only ``"rayleigh"`` is implemented; other kinds can be constructed but
    raise :class:`UnsupportedFading` as soon as they are used.
    """

    kind: str = "rayleigh"

    def _require_rayleigh(self):
        if self.kind != "rayleigh":
            raise UnsupportedFading(f"fading kind {self.kind!r} is not implemented")

    def sample(self, rng: np.random.Generator, size=None):
        self._require_rayleigh()
        return rng.standard_exponential(size)

    def fractional_moment(self, alpha: float) -> float:
        """E[G^(2/alpha)]."""
        self._require_rayleigh()
        return math.gamma(1.0 + 2.0 / alpha)

    def laplace(self, s):
        """Laplace transform E[exp(-s G)]."""
        self._require_rayleigh()
        return 1.0 / (1.0 + np.asarray(s, dtype=float))

    def laplace_complement(self, s):
        """1 - L_G(s), evaluated without cancellation; s may be inf."""
        self._require_rayleigh()
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / (1.0 + 1.0 / s)


RAYLEIGH = FadingModel("rayleigh")


@dataclass(frozen=True)
class RatParams:
    """Deployment of one radio access technology.

    Attributes
    ----------
    id : str
        Identifier, unique within a scenario (``"s"``, ``"w"``, ...).
    density : float
        AP density in APs per square meter.
    power : float
        Transmit power in watts.
    sense_radius : float
        CSMA sensing radius in meters.
    sir_threshold : float
        Linear SIR decoding threshold.
    """

    id: str
    density: float
    power: float
    sense_radius: float
    sir_threshold: float


@dataclass(frozen=True)
class NetworkConfig:
    """A full coexistence scenario.

    ``csma=False`` disables channel sensing: every AP transmits (eta = 1) and
    picks a channel uniformly at random.

    For the two-RAT operations the first RAT plays the small-cell role and
    the second the WiFi role.
    """

    rats: Tuple[RatParams, ...]
    channels: int
    alpha: float
    fading: FadingModel = RAYLEIGH
    csma: bool = True

    def __post_init__(self):
        object.__setattr__(self, "rats", tuple(self.rats))

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(r.id for r in self.rats)

    @property
    def total_density(self) -> float:
        return sum(r.density for r in self.rats)

    def rat(self, rat_id: str) -> RatParams:
        for r in self.rats:
            if r.id == rat_id:
                return r
        raise KeyError(f"no RAT with id {rat_id!r}; have {self.ids}")

    def index(self, rat_id: str) -> int:
        return self.ids.index(self.rat(rat_id).id)

    def with_channels(self, m: int) -> "NetworkConfig":
        return replace(self, channels=m)

    def with_rat(self, rat_id: str, **changes) -> "NetworkConfig":
        self.rat(rat_id)
        rats = tuple(replace(r, **changes) if r.id == rat_id else r for r in self.rats)
        return replace(self, rats=rats)

    def only(self, rat_id: str) -> "NetworkConfig":
        """Single-RAT scenario keeping just ``rat_id``."""
        return replace(self, rats=(self.rat(rat_id),))

    def scale_powers(self, factor: float) -> "NetworkConfig":
        return replace(self, rats=tuple(replace(r, power=r.power * factor) for r in self.rats))


@dataclass(frozen=True)
class AnalyticIntermediates:
    """Scalar building blocks of the optimal-density analysis (two RATs).

    ``ell``, ``c`` and ``d`` are keyed by RAT id.
    """

    tau_alpha: float
    ell: Dict[str, float] = field(default_factory=dict)
    c: Dict[str, float] = field(default_factory=dict)
    d: Dict[str, float] = field(default_factory=dict)
    y: Optional[float] = None


def _positive(value, name):
    try:
        ok = math.isfinite(value) and value > 0
    except TypeError:
        ok = False
    if not ok:
        raise NonPositiveParameter(f"{name} must be a finite positive number, got {value!r}")


def validate(config: NetworkConfig) -> NetworkConfig:
    """Return ``config`` unchanged if every invariant holds, else raise."""
    if not isinstance(config.channels, (int, np.integer)) or isinstance(config.channels, bool):
        raise ZeroChannels(f"channels must be a positive integer, got {config.channels!r}")
    if config.channels < 1:
        raise ZeroChannels(f"channels must be >= 1, got {config.channels}")
    if not (isinstance(config.alpha, (int, float)) and math.isfinite(config.alpha) and config.alpha > 2):
        raise AlphaOutOfRange(f"path-loss exponent must exceed 2, got {config.alpha!r}")
    if len(config.rats) < 1:
        raise ConfigError("at least one RAT is required")
    seen = set()
    for r in config.rats:
        if r.id in seen:
            raise DuplicateRatId(f"duplicate RAT id {r.id!r}")
        seen.add(r.id)
        for name in ("density", "power", "sense_radius", "sir_threshold"):
            _positive(getattr(r, name), f"rats[{r.id}].{name}")
    if not isinstance(config.fading, FadingModel):
        raise ConfigError(f"fading must be a FadingModel, got {config.fading!r}")
    return config


def two_rat(config: NetworkConfig) -> Tuple[RatParams, RatParams]:
    if len(config.rats) != 2:
        raise NotTwoRat(f"operation needs exactly two RATs, scenario has {len(config.rats)}")
    return config.rats[0], config.rats[1]


def reference_scenario(
    channels: int = 5,
    ratio: float = 3.0,
    lambda_s: float = 1e-4,
    theta: float = 0.5,
    csma: bool = True,
) -> NetworkConfig:
    """Reference small-cell/WiFi scenario.

    ``ratio`` is lambda_w / lambda_s.
    """
    return NetworkConfig(
        rats=(
            RatParams("s", lambda_s, 1.0, 50.0, theta),
            RatParams("w", ratio * lambda_s, 0.5, 30.0, theta),
        ),
        channels=channels,
        alpha=4.0,
        csma=csma,
    )


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)

