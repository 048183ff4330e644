"""The model battery applied to an observed citation dataset."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .distributions import DiscreteLogNormal
from .glm import logno_fit, nb_fit
from .linear_model import DegenerateDataError, Dataset, log_transform, ols_binary_fit
from .montecarlo import Method

ZERO_POLICIES = ("auto", "truncate", "plus1", "both")

POLICY_METHODS = {
    "truncate": (Method.NB_RAW, Method.LOGNO_TRUNC, Method.ANOVA_LOG_TRUNC),
    "plus1": (Method.NB_RAW, Method.LOGNO_PLUS1, Method.ANOVA_LOG_PLUS1),
    "both": tuple(Method),
    "auto": tuple(Method),
}


@dataclass(frozen=True)
class MethodReport:
    method: Method
    n_used: int
    b0: float
    b1: float
    se_b1: float
    p_value: float
    detected: bool
    converged: bool
    error: str = ""


@dataclass(frozen=True)
class ZeroInflationCheck:
    observed: float
    expected: float
    se: float
    flagged: bool
    mu0: float
    mu1: float
    sigma: float


@dataclass(frozen=True)
class FitReport:
    n: int
    zeros: int
    alpha: float
    policy: str
    methods: list[MethodReport]
    zero_check: ZeroInflationCheck | None


def _fit_method(d: Dataset, m: Method, alpha: float) -> MethodReport:
    try:
        if m is Method.NB_RAW:
            f = nb_fit(d)
            return MethodReport(m, len(d), f.b0, f.b1, f.se_b1, f.p_value, f.converged and f.p_value < alpha, f.converged)
        mode = "drop_zeros" if m in (Method.LOGNO_TRUNC, Method.ANOVA_LOG_TRUNC) else "add_one"
        if m in (Method.LOGNO_TRUNC, Method.LOGNO_PLUS1):
            f = logno_fit(d, mode)
        else:
            y, fac, _ = log_transform(d, mode)
            f = ols_binary_fit(y, fac)
        return MethodReport(m, f.n_used, f.b0, f.b1, f.se_b1, f.p_value, f.p_value < alpha, True)
    except (ValueError, ArithmeticError) as exc:
        nan = math.nan
        return MethodReport(m, 0, nan, nan, nan, nan, False, False, str(exc))


def zero_truncated_dln_fit(d: Dataset) -> tuple[float, float, float]:
    """ML (mu0, mu1, sigma) of a discrete lognormal fitted to the positive counts only.

    The likelihood conditions on a count being positive, so the fit is not
    pulled toward the zeros it is later used to predict.
    """
    pos = d.citations > 0
    counts = d.citations[pos]
    groups = d.factor[pos]
    if groups.size == 0 or groups.min() == groups.max():
        raise DegenerateDataError("need positive counts in both factor levels")
    cells = []
    for level in (0, 1):
        k, freq = np.unique(counts[groups == level], return_counts=True)
        cells.append((k, freq.astype(float)))

    def nll(params):
        m0, m1, log_s = params
        s = math.exp(log_s)
        total = 0.0
        for mu, (k, freq) in zip((m0, m1), cells):
            dist = DiscreteLogNormal(mu, s)
            keep = 1.0 - dist.zero_mass()
            if keep <= 1e-300:
                return 1e300
            total -= float(np.dot(freq, np.log(np.maximum(dist.pmf(k), 1e-300)))) - freq.sum() * math.log(keep)
        return total

    logs = [np.log(c[0]).repeat(c[1].astype(int)) for c in cells]
    sd = float(np.std(np.concatenate([x - x.mean() for x in logs])))
    start = [logs[0].mean(), logs[1].mean(), math.log(max(sd, 0.1))]
    res = minimize(nll, start, method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 5000})
    m0, m1, log_s = res.x
    return float(m0), float(m1), math.exp(log_s)


def zero_inflation_check(d: Dataset) -> ZeroInflationCheck:
    """Compare the observed zero share with the share implied by a zero-truncated fit."""
    m0, m1, s = zero_truncated_dln_fit(d)
    n0, n1 = d.group_sizes()
    p0 = DiscreteLogNormal(m0, s).zero_mass()
    p1 = DiscreteLogNormal(m1, s).zero_mass()
    n = n0 + n1
    expected = (n0 * p0 + n1 * p1) / n
    observed = float(np.mean(d.citations == 0))
    se = math.sqrt(expected * (1.0 - expected) / n)
    return ZeroInflationCheck(observed, expected, se, observed - expected > 3.0 * se, m0, m1, s)


def fit_battery(d: Dataset, alpha: float = 0.05, policy: str = "auto") -> FitReport:
    if policy not in ZERO_POLICIES:
        raise ValueError(f"zero policy must be one of {ZERO_POLICIES}")
    n0, n1 = d.group_sizes()
    if n0 == 0 or n1 == 0:
        raise DegenerateDataError("both factor levels need at least one observation")
    methods = [_fit_method(d, m, alpha) for m in POLICY_METHODS[policy]]
    check = None
    if policy == "auto":
        try:
            check = zero_inflation_check(d)
        except DegenerateDataError:
            check = None
    return FitReport(len(d), int(np.sum(d.citations == 0)), alpha, policy, methods, check)
