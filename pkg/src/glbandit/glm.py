"""Exponential-family reward models (link functions, cumulants, sampling).

Each family bundles the mean function mu, its first two derivatives, the
cumulant whose derivative is mu, the dispersion g, and a reward sampler.
Family objects are immutable and safe to share across concurrent trials.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DomainError

__all__ = [
    "GlmFamily",
    "LogisticFamily",
    "PoissonFamily",
    "GaussianFamily",
    "FamilyBounds",
    "make_family",
    "family_bounds",
    "nll_loss",
    "validate_family",
    "FAMILY_NAMES",
]


def _checked(z):
    """Coerce to float array/scalar and reject non-finite input."""
    if np.isscalar(z) or isinstance(z, (float, int)):
        z = float(z)
        if not math.isfinite(z):
            raise DomainError(f"non-finite input z={z!r}")
        return z
    z = np.asarray(z, dtype=float)
    if not np.isfinite(z).all():
        raise DomainError("non-finite entry in input array")
    return z


@dataclass(frozen=True)
class GlmFamily:
    """Base reward model; subclasses fill in the link-specific math.

    ``dispersion`` is the scale factor g: the reward variance is
    g * mu_prime(z).  ``self_concordance_R`` bounds |mu''| <= R * mu'.
    """

    dispersion: float = 1.0
    reward_cap: float | None = None

    name = "base"
    self_concordance_R = 0.0

    def __post_init__(self):
        if not (self.dispersion > 0 and math.isfinite(self.dispersion)):
            raise ConfigError(f"dispersion must be positive, got {self.dispersion}")
        if self.reward_cap is not None and not self.reward_cap > 0:
            raise ConfigError(f"reward_cap must be positive, got {self.reward_cap}")

    # -- link-specific hooks -------------------------------------------------
    def mu(self, z):
        """Mean reward at natural parameter z (the derivative of the cumulant)."""
        raise NotImplementedError

    def mu_prime(self, z):
        """First derivative of mu; strictly positive on any bounded interval."""
        raise NotImplementedError

    def mu_second(self, z):
        """Second derivative of mu."""
        raise NotImplementedError

    def cumulant(self, z):
        """Normalizer m(z) with m'(z) = mu(z)."""
        raise NotImplementedError

    def sample_reward(self, z, rng):
        """Draw one reward with mean mu(z) and variance dispersion * mu_prime(z)."""
        raise NotImplementedError

    def mu_prime_extrema(self, S):
        """Closed-form (min, max) of mu_prime over [-S, S]."""
        raise NotImplementedError


@dataclass(frozen=True)
class LogisticFamily(GlmFamily):
    """Bernoulli rewards: mu is the sigmoid, dispersion fixed at 1."""

    name = "logistic"
    self_concordance_R = 1.0

    def mu(self, z):
        z = _checked(z)
        out = expit(z)
        return float(out) if np.isscalar(z) else out

    def mu_prime(self, z):
        z = _checked(z)
        p = expit(z)
        out = p * (1.0 - p)
        return float(out) if np.isscalar(z) else out

    def mu_second(self, z):
        z = _checked(z)
        p = expit(z)
        out = p * (1.0 - p) * (1.0 - 2.0 * p)
        return float(out) if np.isscalar(z) else out

    def cumulant(self, z):
        # log(1 + e^z); for z > 30 evaluated as z + log1p(e^-z) to avoid overflow
        z = _checked(z)
        if np.isscalar(z):
            if z > 30.0:
                return z + math.log1p(math.exp(-z))
            return math.log1p(math.exp(z))
        out = np.empty_like(z)
        big = z > 30.0
        out[big] = z[big] + np.log1p(np.exp(-z[big]))
        out[~big] = np.log1p(np.exp(z[~big]))
        return out

    def sample_reward(self, z, rng):
        return 1.0 if rng.random() < self.mu(z) else 0.0

    def mu_prime_extrema(self, S):
        # sigmoid slope is even in z and decreasing in |z|
        p = float(expit(S))
        return p * (1.0 - p), 0.25


@dataclass(frozen=True)
class PoissonFamily(GlmFamily):
    """Poisson rewards: mu(z) = e^z, dispersion fixed at 1.

    ``reward_cap`` is an optional configuration bound used by baselines that
    assume effectively bounded rewards; it restricts mu's domain to
    z <= ln(cap) but never truncates samples.
    """

    name = "poisson"
    self_concordance_R = 1.0

    def _check_cap(self, z):
        if self.reward_cap is not None:
            if np.max(z) > math.log(self.reward_cap):
                raise DomainError(
                    f"z={np.max(z):g} exceeds ln(reward_cap)={math.log(self.reward_cap):g}"
                )

    def mu(self, z):
        z = _checked(z)
        self._check_cap(z)
        out = np.exp(z)
        return float(out) if np.isscalar(z) else out

    def mu_prime(self, z):
        z = _checked(z)
        out = np.exp(z)
        return float(out) if np.isscalar(z) else out

    def mu_second(self, z):
        return self.mu_prime(z)

    def cumulant(self, z):
        z = _checked(z)
        out = np.exp(z)
        return float(out) if np.isscalar(z) else out

    def sample_reward(self, z, rng):
        return float(rng.poisson(math.exp(z)))

    def mu_prime_extrema(self, S):
        return math.exp(-S), math.exp(S)


@dataclass(frozen=True)
class GaussianFamily(GlmFamily):
    """Gaussian rewards with identity link; dispersion is the noise variance."""

    name = "gaussian"
    self_concordance_R = 0.0

    def mu(self, z):
        return _checked(z)

    def mu_prime(self, z):
        z = _checked(z)
        return 1.0 if np.isscalar(z) else np.ones_like(z)

    def mu_second(self, z):
        z = _checked(z)
        return 0.0 if np.isscalar(z) else np.zeros_like(z)

    def cumulant(self, z):
        z = _checked(z)
        out = 0.5 * z * z
        return float(out) if np.isscalar(z) else out

    def sample_reward(self, z, rng):
        return float(rng.normal(z, math.sqrt(self.dispersion)))

    def mu_prime_extrema(self, S):
        return 1.0, 1.0


_FAMILIES = {
    "logistic": LogisticFamily,
    "poisson": PoissonFamily,
    "gaussian": GaussianFamily,
}
FAMILY_NAMES = tuple(_FAMILIES)


def make_family(name, dispersion=None, reward_cap=None):
    """Build a family by name; dispersion is configurable for gaussian only."""
    try:
        cls = _FAMILIES[name]
    except KeyError:
        raise ConfigError(f"unknown family {name!r}; expected one of {FAMILY_NAMES}") from None
    if name != "gaussian":
        if dispersion is not None and dispersion != 1.0:
            raise ConfigError(f"{name} dispersion is fixed at 1, got {dispersion}")
        return cls(reward_cap=reward_cap)
    return cls(dispersion=1.0 if dispersion is None else float(dispersion), reward_cap=reward_cap)


@dataclass(frozen=True)
class FamilyBounds:
    """Slope bounds of mu over [-S, S]: c_mu = min, C_mu = max, kappa = 1/c_mu."""

    S: float
    c_mu: float
    C_mu: float
    kappa: float


@lru_cache(maxsize=None)
def family_bounds(family, S):
    """Closed-form slope extrema of mu_prime over [-S, S]."""
    if not S > 0:
        raise ConfigError(f"S must be positive, got {S}")
    c_mu, C_mu = family.mu_prime_extrema(float(S))
    if not c_mu > 0:
        raise ConfigError(
            f"{family.name}: mu_prime not bounded away from zero on [-{S}, {S}]"
        )
    return FamilyBounds(S=float(S), c_mu=c_mu, C_mu=C_mu, kappa=1.0 / c_mu)


def nll_loss(family, z, r):
    """Per-observation negative log-likelihood (m(z) - r*z) / g at margin z."""
    z = _checked(z)
    r = _checked(r)
    return (family.cumulant(z) - r * z) / family.dispersion


@lru_cache(maxsize=None)
def validate_family(family, S, grid_points=4096):
    """Check the model's structural requirements on a dense grid of [-S, S].

    Verifies that mu_prime stays strictly positive, that |mu_second| is
    bounded by R * mu_prime, and that mu matches the derivative of the
    cumulant.  Raises ConfigError on the first violation.
    """
    if not S > 0:
        raise ConfigError(f"S must be positive, got {S}")
    z = np.linspace(-S, S, grid_points)
    mp = family.mu_prime(z)
    if not (mp > 0).all():
        raise ConfigError(f"{family.name}: mu_prime must be strictly positive on [-S, S]")
    ms = np.abs(family.mu_second(z))
    if not (ms <= family.self_concordance_R * mp + 1e-12).all():
        raise ConfigError(f"{family.name}: |mu_second| exceeds R * mu_prime on [-S, S]")
    h = 1e-6
    fd = (family.cumulant(z + h) - family.cumulant(z - h)) / (2 * h)
    if not np.allclose(fd, family.mu(z), atol=1e-5, rtol=1e-5):
        raise ConfigError(f"{family.name}: mu is not the derivative of the cumulant")
    return True
