"""Maximum likelihood fits: negative binomial (log link) and continuous lognormal."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import NegBinParams, lognormal_log_density, nb_log_pmf
from .linear_model import DegenerateDataError, Dataset, ZeroMode, group_moments, log_transform
from .numerics import clamp_p, digamma_rising, normal_sf, t_sf_two_sided, trigamma_rising

THETA_CAP = 1e8
THETA_FLOOR = 1e-8
MAX_OUTER = 50
MAX_INNER = 25
TOL = 1e-8


@dataclass(frozen=True)
class NbFit:
    b0: float
    b1: float
    theta: float
    se_b1: float
    wald_z: float
    p_value: float
    converged: bool
    iterations: int
    loglik: float
    theta_at_bound: bool = False
    loglik_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def group_means(self) -> tuple[float, float]:
        return math.exp(self.b0), math.exp(self.b0 + self.b1)


@dataclass(frozen=True)
class LognoFit:
    b0: float
    b1: float
    sigma_hat: float
    se_b1: float
    p_value: float
    loglik: float
    n_used: int


@dataclass
class _Collapsed:
    """Distinct (group, count) cells with their frequencies."""

    y: np.ndarray
    g: np.ndarray
    freq: np.ndarray

    @classmethod
    def from_dataset(cls, d: Dataset) -> _Collapsed:
        span = int(d.citations.max()) + 1
        keys, freq = np.unique(d.factor.astype(np.int64) * span + d.citations, return_counts=True)
        return cls(y=keys % span, g=keys // span, freq=freq.astype(float))


def _check_nb_data(d: Dataset) -> None:
    n0, n1 = d.group_sizes()
    if n0 == 0 or n1 == 0:
        raise DegenerateDataError("both factor levels need observations")
    for level in (0, 1):
        if not np.any(d.citations[d.factor == level] > 0):
            raise DegenerateDataError(f"factor level {level} has only zero counts")


def _irls(cells: _Collapsed, beta: np.ndarray, theta: float) -> tuple[np.ndarray, int]:
    """Fisher scoring for the log-link coefficients at fixed theta."""
    y = cells.y.astype(float)
    x1 = cells.g.astype(float)
    for it in range(1, MAX_INNER + 1):
        eta = beta[0] + beta[1] * x1
        mu = np.exp(eta)
        w = cells.freq * mu / (1.0 + mu / theta)
        z = eta + (y - mu) / mu
        s00 = w.sum()
        s01 = (w * x1).sum()
        s11 = (w * x1 * x1).sum()
        r0 = (w * z).sum()
        r1 = (w * x1 * z).sum()
        det = s00 * s11 - s01 * s01
        new = np.array([(s11 * r0 - s01 * r1) / det, (s00 * r1 - s01 * r0) / det])
        step = np.max(np.abs(new - beta))
        beta = new
        if step < 1e-12 * (1.0 + np.max(np.abs(beta))):
            break
    return beta, it


def _theta_score(cells: _Collapsed, mu: np.ndarray, theta: float) -> tuple[float, float]:
    """Score of the log-likelihood in theta and its derivative."""
    y = cells.y
    f = cells.freq
    tm = theta + mu
    score = f * (digamma_rising(theta, y) - np.log1p(mu / theta) + (mu - y) / tm)
    slope = f * (trigamma_rising(theta, y) + mu / (theta * tm) - (mu - y) / (tm * tm))
    return float(score.sum()), float(slope.sum())


def _solve_theta(cells: _Collapsed, mu: np.ndarray, theta0: float) -> tuple[float, bool]:
    """Root of the theta score by Newton in log(theta), guarded by a bisection bracket."""
    hi_score, _ = _theta_score(cells, mu, THETA_CAP)
    if hi_score >= 0.0:
        return THETA_CAP, True
    lo, hi = math.log(THETA_FLOOR), math.log(THETA_CAP)
    lo_score, _ = _theta_score(cells, mu, THETA_FLOOR)
    if lo_score <= 0.0:
        return THETA_FLOOR, True
    t = min(max(math.log(theta0), lo), hi)
    for _ in range(200):
        theta = math.exp(t)
        s, ds = _theta_score(cells, mu, theta)
        if s > 0.0:
            lo = t
        elif s < 0.0:
            hi = t
        else:
            break
        slope = theta * ds
        step = -s / slope if slope < 0.0 else math.inf
        if abs(step) < 1e-12:
            t += step
            break
        t_new = t + step
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        t = t_new
        if hi - lo < 1e-12:
            break
    return math.exp(t), False


def _nb_loglik(cells: _Collapsed, beta: np.ndarray, theta: float) -> float:
    total = 0.0
    for level in (0, 1):
        sel = cells.g == level
        mu = math.exp(beta[0] + beta[1] * level)
        total += float(np.dot(cells.freq[sel], nb_log_pmf(NegBinParams(mu, theta), cells.y[sel])))
    return total


def _theta_start(d: Dataset) -> float:
    c = d.citations.astype(float)
    mean = c.mean()
    var = c.var(ddof=1) if c.size > 1 else 0.0
    if var <= mean:
        return 1e4
    return min(max(mean * mean / (var - mean), 0.1), 1e4)


def nb_fit(d: Dataset) -> NbFit:
    """Negative binomial regression of the counts on the factor.

    Alternates Fisher scoring for the coefficients with an ML update of
    theta. The factor p-value is a Wald z-test using the expected
    information at the optimum.
    """
    _check_nb_data(d)
    cells = _Collapsed.from_dataset(d)
    means = [d.citations[d.factor == level].mean() for level in (0, 1)]
    beta = np.log(np.array(means) + 0.1)
    beta = np.array([beta[0], beta[1] - beta[0]])
    theta = _theta_start(d)
    trace: list[float] = []
    converged = False
    at_bound = False
    outer = 0
    for outer in range(1, MAX_OUTER + 1):
        new_beta, _ = _irls(cells, beta, theta)
        mu = np.exp(new_beta[0] + new_beta[1] * cells.g)
        new_theta, at_bound = _solve_theta(cells, mu, theta)
        beta_step = float(np.max(np.abs(new_beta - beta)))
        theta_step = abs(math.log(new_theta) - math.log(theta))
        beta, theta = new_beta, new_theta
        trace.append(_nb_loglik(cells, beta, theta))
        if beta_step < TOL and theta_step < TOL:
            converged = True
            break

    mu = np.exp(beta[0] + beta[1] * cells.g)
    w = cells.freq * mu / (1.0 + mu / theta)
    w0 = float(w[cells.g == 0].sum())
    w1 = float(w[cells.g == 1].sum())
    se_b1 = math.sqrt(1.0 / w0 + 1.0 / w1)
    z = float(beta[1]) / se_b1
    return NbFit(
        b0=float(beta[0]),
        b1=float(beta[1]),
        theta=theta,
        se_b1=se_b1,
        wald_z=z,
        p_value=clamp_p(2.0 * normal_sf(abs(z))),
        converged=converged,
        iterations=outer,
        loglik=trace[-1],
        theta_at_bound=at_bound,
        loglik_trace=tuple(trace),
    )


def nb_profile_loglik(d: Dataset, theta: float) -> float:
    """NB log-likelihood at fixed theta with each group's mean as its fitted value."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    total = 0.0
    for level in (0, 1):
        counts = d.citations[d.factor == level]
        if counts.size == 0:
            continue
        mean = float(counts.mean())
        if mean <= 0.0:
            raise DegenerateDataError(f"factor level {level} has a zero mean count")
        total += float(np.sum(nb_log_pmf(NegBinParams(mean, theta), counts)))
    return total


def lognormal_fit(ylog, factor) -> LognoFit:
    """ML fit of ln(response) ~ Normal(b0 + b1 * factor, sigma), from the logged responses."""
    ylog = np.asarray(ylog, dtype=float)
    f = np.asarray(factor)
    n0, n1, m0, m1, rss = group_moments(ylog, f)
    if n0 < 2 or n1 < 2:
        raise DegenerateDataError("each factor level needs at least two observations")
    n = n0 + n1
    scale = float(np.abs(ylog).max())
    if not rss > n * (1e-14 * max(1.0, scale)) ** 2:
        raise DegenerateDataError("zero residual variance")
    sigma_hat = math.sqrt(rss / n)
    b1 = m1 - m0
    se_b1 = sigma_hat * math.sqrt(1.0 / n0 + 1.0 / n1)
    fitted = np.where(f == 1, m1, m0)
    loglik = float(np.sum(lognormal_log_density(np.exp(ylog), fitted, sigma_hat)))
    return LognoFit(
        b0=m0,
        b1=b1,
        sigma_hat=sigma_hat,
        se_b1=se_b1,
        p_value=clamp_p(t_sf_two_sided(b1 / se_b1, n - 2)),
        loglik=loglik,
        n_used=n,
    )


def logno_fit(d: Dataset, mode: ZeroMode) -> LognoFit:
    """Lognormal-error regression on the counts after dropping zeros or adding one."""
    ylog, f, _ = log_transform(d, mode)
    return lognormal_fit(ylog, f)
