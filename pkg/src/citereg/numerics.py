"""Special functions and distribution CDFs.

Everything that turns a statistic into a p-value, or parameters into a
likelihood, goes through here. Functions taking ``x`` as the first argument
accept scalars or numpy arrays unless noted otherwise.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "DomainError",
    "log_gamma",
    "digamma",
    "trigamma",
    "log_rising",
    "digamma_rising",
    "trigamma_rising",
    "normal_cdf",
    "normal_sf",
    "reg_incomplete_beta",
    "reg_incomplete_gamma_lower",
    "t_cdf",
    "t_sf_two_sided",
    "f_cdf",
    "f_sf",
    "chisq_cdf",
    "clamp_p",
]

EPS = 2.220446049250313e-16
TINY = 1e-300
P_FLOOR = 1e-300

# Bernoulli coefficients B_2k / (2k (2k-1)) for the Stirling series.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# B_2k / (2k) for the digamma asymptotic series.
_DIGAMMA = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# B_2k for the trigamma asymptotic series.
_TRIGAMMA = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LGAMMA_SHIFT = 10.0
_PSI_SHIFT = 6.0


class DomainError(ValueError):
    """An argument lies outside the domain of a special function."""


def _positive(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} requires x > 0")
    return arr


def _out(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def _poly(w: np.ndarray, coeffs) -> np.ndarray:
    # Horner in w for sum coeffs[k] * w**k
    acc = np.zeros_like(w)
    for c in reversed(coeffs):
        acc = acc * w + c
    return acc


def log_gamma(x):
    """ln Gamma(x) for x > 0.

    Arguments below 10 are shifted up with the recurrence and the Stirling
    series is evaluated at the shifted point.
    """
    x = _positive(x, "log_gamma")
    z = x.copy()
    prod = np.ones_like(z)
    small = z < _LGAMMA_SHIFT
    while np.any(small):
        prod = np.where(small, prod * z, prod)
        z = np.where(small, z + 1.0, z)
        small = z < _LGAMMA_SHIFT
    w = 1.0 / (z * z)
    series = _poly(w, _STIRLING) / z
    out = (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + series - np.log(prod)
    return _out(out)


def digamma(x):
    """psi(x) = d/dx ln Gamma(x) for x > 0."""
    x = _positive(x, "digamma")
    z = x.copy()
    acc = np.zeros_like(z)
    small = z < _PSI_SHIFT
    while np.any(small):
        acc = np.where(small, acc - 1.0 / z, acc)
        z = np.where(small, z + 1.0, z)
        small = z < _PSI_SHIFT
    w = 1.0 / (z * z)
    out = acc + np.log(z) - 0.5 / z - w * _poly(w, _DIGAMMA)
    return _out(out)


def trigamma(x):
    """psi'(x) for x > 0."""
    x = _positive(x, "trigamma")
    z = x.copy()
    acc = np.zeros_like(z)
    small = z < _PSI_SHIFT
    while np.any(small):
        acc = np.where(small, acc + 1.0 / (z * z), acc)
        z = np.where(small, z + 1.0, z)
        small = z < _PSI_SHIFT
    w = 1.0 / (z * z)
    out = acc + 1.0 / z + 0.5 * w + _poly(w, _TRIGAMMA) * w / z
    return _out(out)


# Above this many terms the rising-factorial helpers fall back to
# differences of the gamma-family functions.
_RISING_MAX_TERMS = 1_000_000


def _rising_terms(k) -> tuple[np.ndarray, int]:
    k = np.asarray(k)
    if k.size and (np.any(k < 0) or np.any(k != np.floor(k))):
        raise DomainError("rising factorial needs non-negative integer counts")
    k = k.astype(np.int64)
    kmax = int(k.max()) if k.size else 0
    return k, kmax


def log_rising(theta: float, k):
    """ln Gamma(theta + k) - ln Gamma(theta) - k ln(theta), for integer k >= 0.

    Equals sum_{j<k} log1p(j/theta), which stays accurate when theta is huge
    compared to k (the negative binomial Poisson limit).
    """
    if not theta > 0:
        raise DomainError("log_rising requires theta > 0")
    k, kmax = _rising_terms(k)
    if kmax > _RISING_MAX_TERMS:
        kf = k.astype(float)
        return _out(np.asarray(log_gamma(theta + kf) - log_gamma(theta) - kf * math.log(theta)))
    table = np.concatenate(([0.0], np.cumsum(np.log1p(np.arange(kmax) / theta))))
    return _out(table[k])


def digamma_rising(theta: float, k):
    """psi(theta + k) - psi(theta) for integer k >= 0, as sum_{j<k} 1/(theta+j)."""
    if not theta > 0:
        raise DomainError("digamma_rising requires theta > 0")
    k, kmax = _rising_terms(k)
    if kmax > _RISING_MAX_TERMS:
        return _out(np.asarray(digamma(theta + k.astype(float)) - digamma(theta)))
    table = np.concatenate(([0.0], np.cumsum(1.0 / (theta + np.arange(kmax)))))
    return _out(table[k])


def trigamma_rising(theta: float, k):
    """psi'(theta + k) - psi'(theta) for integer k >= 0."""
    if not theta > 0:
        raise DomainError("trigamma_rising requires theta > 0")
    k, kmax = _rising_terms(k)
    if kmax > _RISING_MAX_TERMS:
        return _out(np.asarray(trigamma(theta + k.astype(float)) - trigamma(theta)))
    table = np.concatenate(([0.0], -np.cumsum(1.0 / (theta + np.arange(kmax)) ** 2)))
    return _out(table[k])


_erfc = np.frompyfunc(math.erfc, 1, 1)
_SQRT1_2 = math.sqrt(0.5)


def normal_cdf(z):
    """Standard normal CDF, clamped to [0, 1]."""
    z = np.asarray(z, dtype=float)
    out = 0.5 * np.asarray(_erfc(-z * _SQRT1_2), dtype=float)
    return _out(np.clip(out, 0.0, 1.0))


def normal_sf(z):
    """Upper tail 1 - Phi(z), computed without cancellation."""
    return normal_cdf(-np.asarray(z, dtype=float))


def _stirling_tail(z: float) -> float:
    w = 1.0 / (z * z)
    return float(_poly(np.asarray(w), _STIRLING)) / z


def _log_beta(a: float, b: float) -> float:
    big, small = max(a, b), min(a, b)
    if big < _LGAMMA_SHIFT:
        return float(log_gamma(a)) + float(log_gamma(b)) - float(log_gamma(a + b))
    # lgamma(big) - lgamma(big + small) without cancelling two large numbers
    total = big + small
    diff = (
        -(big - 0.5) * math.log1p(small / big)
        - small * math.log(total)
        + small
        + _stirling_tail(big)
        - _stirling_tail(total)
    )
    return float(log_gamma(small)) + diff


def _beta_cf(a: float, b: float, x: float, max_iter: int = 20000) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def reg_incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for scalar arguments."""
    if not (a > 0 and b > 0):
        raise DomainError("reg_incomplete_beta requires a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError("reg_incomplete_beta requires 0 <= x <= 1")
    if x == 0.0 or x == 1.0:
        return float(x)
    log_front = a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, math.exp(log_front) * _beta_cf(a, b, x) / a)
    return max(0.0, 1.0 - math.exp(log_front) * _beta_cf(b, a, 1.0 - x) / b)


def reg_incomplete_gamma_lower(s: float, x: float) -> float:
    """Regularized lower incomplete gamma P(s, x) for scalar arguments."""
    if not s > 0:
        raise DomainError("reg_incomplete_gamma_lower requires s > 0")
    if not x >= 0:
        raise DomainError("reg_incomplete_gamma_lower requires x >= 0")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    log_front = s * math.log(x) - x - float(log_gamma(s))
    if x < s + 1.0:
        # power series
        ap = s
        term = 1.0 / s
        total = term
        for _ in range(100000):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return min(1.0, total * math.exp(log_front))
    # continued fraction for the upper tail
    b = x + 1.0 - s
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, 100000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < TINY:
            d = TINY
        c = b + an / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return max(0.0, 1.0 - math.exp(log_front) * h)


def _check_df(*dfs: float) -> None:
    for df in dfs:
        if not df > 0:
            raise DomainError("degrees of freedom must be positive")


def t_cdf(t: float, df: float) -> float:
    """Student t CDF."""
    _check_df(df)
    if math.isnan(t):
        raise DomainError("t_cdf of NaN")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * reg_incomplete_beta(0.5 * df, 0.5, df / (df + t * t))
    return 1.0 - tail if t > 0 else tail


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for T ~ t(df)."""
    _check_df(df)
    if math.isinf(t):
        return 0.0
    return reg_incomplete_beta(0.5 * df, 0.5, df / (df + t * t))


def f_cdf(x: float, d1: float, d2: float) -> float:
    """F distribution CDF."""
    _check_df(d1, d2)
    if not x >= 0:
        raise DomainError("f_cdf requires x >= 0")
    if math.isinf(x):
        return 1.0
    return reg_incomplete_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))


def f_sf(x: float, d1: float, d2: float) -> float:
    """F distribution upper tail, evaluated directly rather than as 1 - CDF."""
    _check_df(d1, d2)
    if not x >= 0:
        raise DomainError("f_sf requires x >= 0")
    if math.isinf(x):
        return 0.0
    return reg_incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x))


def chisq_cdf(x: float, df: float) -> float:
    """Chi-square CDF."""
    _check_df(df)
    if not x >= 0:
        raise DomainError("chisq_cdf requires x >= 0")
    return reg_incomplete_gamma_lower(0.5 * df, 0.5 * x)


def clamp_p(p: float) -> float:
    """Clamp a p-value into [1e-300, 1] so its log is always finite."""
    return min(1.0, max(P_FLOOR, float(p)))
