"""Discrete lognormal, negative binomial and continuous lognormal laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import DomainError, log_gamma, log_rising, normal_cdf, normal_sf
from .rng import RngStream

_LOG_HALF = math.log(0.5)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_MIN_PMF_SIGMA = 1e-12


@dataclass(frozen=True)
class DiscreteLogNormal:
    """round(Y) with ln Y ~ Normal(mu, sigma); mu and sigma are on the log scale."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")

    def sample(self, s: RngStream, size: int) -> np.ndarray:
        """Draw ``size`` counts, rounding half away from zero."""
        y = np.exp(self.mu + self.sigma * s.normals(size))
        return np.floor(y + 0.5).astype(np.int64)

    def pmf(self, k):
        """P(round(Y) = k) for integer k >= 0 (scalar or array)."""
        if self.sigma < _MIN_PMF_SIGMA:
            raise DomainError("sigma below 1e-12 makes the mass function degenerate")
        k = np.asarray(k)
        if np.any(k < 0):
            raise DomainError("k must be non-negative")
        kf = k.astype(float)
        upper = (np.log(kf + 0.5) - self.mu) / self.sigma
        with np.errstate(divide="ignore"):
            lower = np.where(kf >= 1, (np.log(np.maximum(kf - 0.5, 0.5)) - self.mu) / self.sigma, -np.inf)
        # difference of upper tails where both bounds sit right of centre
        right = lower > 0
        out = np.where(
            right,
            normal_sf(np.where(right, lower, 0.0)) - normal_sf(np.where(right, upper, 0.0)),
            normal_cdf(upper) - normal_cdf(lower),
        )
        out = np.maximum(out, 0.0)
        return float(out) if out.ndim == 0 else out

    def zero_mass(self) -> float:
        return float(normal_cdf((_LOG_HALF - self.mu) / self.sigma))


def dln_sample(d: DiscreteLogNormal, s: RngStream) -> int:
    return int(d.sample(s, 1)[0])


def dln_pmf(d: DiscreteLogNormal, k):
    return d.pmf(k)


@dataclass(frozen=True)
class NegBinParams:
    """Negative binomial in mean/size form: variance = mu + mu**2 / theta."""

    mu: float
    theta: float

    def __post_init__(self):
        if not (self.mu > 0 and self.theta > 0):
            raise DomainError("negative binomial needs mu > 0 and theta > 0")

    @property
    def variance(self) -> float:
        return self.mu + self.mu * self.mu / self.theta


def nb_log_pmf(p: NegBinParams, k):
    """Log mass of the negative binomial at integer k >= 0 (scalar or array).

    Evaluated as sum_{j<k} log1p(j/theta) - lgamma(k+1) - (theta+k) log1p(mu/theta)
    + k ln mu, which is algebraically the textbook gamma-function form but
    keeps its accuracy as theta grows toward the Poisson limit.
    """
    k = np.asarray(k)
    if np.any(k < 0):
        raise DomainError("k must be non-negative")
    kf = k.astype(float)
    out = (
        np.asarray(log_rising(p.theta, k))
        - np.asarray(log_gamma(kf + 1.0))
        - (p.theta + kf) * math.log1p(p.mu / p.theta)
        + kf * math.log(p.mu)
    )
    return float(out) if out.ndim == 0 else out


def lognormal_log_density(y, mu, sigma: float):
    """Log density of the continuous lognormal at y > 0."""
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("lognormal density requires y > 0")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    ly = np.log(y)
    out = -ly - math.log(sigma) - _HALF_LOG_2PI - (ly - mu) ** 2 / (2.0 * sigma * sigma)
    return float(out) if out.ndim == 0 else out
