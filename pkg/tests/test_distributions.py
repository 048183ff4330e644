import math

import numpy as np
import pytest
from scipy import integrate, stats

from citereg.distributions import (
    DiscreteLogNormal,
    NegBinParams,
    dln_pmf,
    dln_sample,
    lognormal_log_density,
    nb_log_pmf,
)
from citereg.numerics import DomainError, normal_cdf
from citereg.rng import new_stream

# Phi((ln 0.5 - 0.5) / 1), from mpmath.ncdf
ZERO_MASS_05_1 = 0.11640586826199838925


def gof_pvalue(sample, pmf_fn):
    """Pearson chi-square of a count sample against a mass function, tail pooled."""
    n = sample.size
    kmax = int(sample.max())
    probs = pmf_fn(np.arange(kmax + 1))
    observed = np.bincount(sample, minlength=kmax + 1).astype(float)
    expected = n * probs
    # pool from the first cell whose expectation drops under 5
    cut = int(np.argmax(expected < 5)) if np.any(expected < 5) else kmax + 1
    cut = max(cut, 2)
    obs = np.append(observed[:cut], n - observed[:cut].sum())
    exp = np.append(expected[:cut], n - expected[:cut].sum())
    stat = float(((obs - exp) ** 2 / exp).sum())
    return stats.chi2.sf(stat, df=obs.size - 1)


def test_degenerate_sigma_sampling():
    d = DiscreteLogNormal(0.5, 1e-9)
    s = new_stream(1, 0)
    assert np.all(d.sample(s, 1000) == 2)
    assert dln_sample(d, s) == 2


def test_sigma_must_be_positive():
    with pytest.raises(DomainError):
        DiscreteLogNormal(0.0, 0.0)
    with pytest.raises(DomainError):
        DiscreteLogNormal(0.0, 1e-13).pmf(1)


def test_zero_mass_oracle():
    d = DiscreteLogNormal(0.5, 1.0)
    assert dln_pmf(d, 0) == pytest.approx(ZERO_MASS_05_1, abs=1e-12)
    assert d.zero_mass() == pytest.approx(ZERO_MASS_05_1, abs=1e-12)
    assert dln_pmf(d, 0) == pytest.approx(0.1165, abs=0.0002)


def test_empirical_zero_frequency():
    x = DiscreteLogNormal(0.5, 1.0).sample(new_stream(3, 0), 1_000_000)
    assert abs(np.mean(x == 0) - ZERO_MASS_05_1) < 0.0013


def test_sample_mean_against_pmf_sum():
    d = DiscreteLogNormal(0.5, 1.0)
    k = np.arange(200_000)
    brute_mean = float(np.dot(k, d.pmf(k)))
    x = d.sample(new_stream(3, 1), 1_000_000)
    sd = math.sqrt(float(np.dot((k - brute_mean) ** 2, d.pmf(k))))
    assert abs(x.mean() - brute_mean) < 4 * sd / math.sqrt(x.size)
    assert x.mean() == pytest.approx(math.exp(1.0), rel=0.02)


@pytest.mark.parametrize(("mu", "sigma"), [(0.5, 1.0), (0.5, 2.0), (1.0, 1.0), (1.5, 2.0), (-1.0, 0.3)])
def test_pmf_sums_to_one(mu, sigma):
    d = DiscreteLogNormal(mu, sigma)
    # upper tail of the underlying normal below 1e-10
    kmax = int(math.exp(mu + 6.5 * sigma)) + 2
    assert 1 - normal_cdf((math.log(kmax + 0.5) - mu) / sigma) < 1e-10
    assert d.pmf(np.arange(kmax + 1)).sum() == pytest.approx(1.0, abs=1e-9)


def test_pmf_of_million_samples():
    d = DiscreteLogNormal(0.5, 1.0)
    x = d.sample(new_stream(5, 0), 1_000_000)
    assert gof_pvalue(x, d.pmf) > 0.001


@pytest.mark.parametrize("mu", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("sigma", [1.0, 2.0])
def test_sample_matches_pmf(mu, sigma):
    d = DiscreteLogNormal(mu, sigma)
    x = d.sample(new_stream(9, int(mu * 10 + sigma)), 100_000)
    assert gof_pvalue(x, d.pmf) > 0.001


@pytest.mark.parametrize("mu", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_pmf_nonnegative_and_unimodal_after_zero(mu, sigma):
    p = DiscreteLogNormal(mu, sigma).pmf(np.arange(1, 5000))
    assert np.all(p >= 0)
    peak = int(np.argmax(p))
    assert np.all(np.diff(p[: peak + 1]) >= -1e-15)
    assert np.all(np.diff(p[peak:]) <= 1e-15)


def test_pmf_tail_has_no_cancellation():
    d = DiscreteLogNormal(0.0, 1.0)
    k = 2000
    lo = (math.log(k - 0.5)) / 1.0
    hi = (math.log(k + 0.5)) / 1.0
    ref = stats.norm.sf(lo) - stats.norm.sf(hi)
    assert d.pmf(k) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize(("mu", "theta"), [(0.3, 0.5), (2.0, 1.0), (7.5, 12.0), (3.0, 1e6)])
def test_nb_log_pmf_matches_gamma_form(mu, theta):
    from scipy.special import gammaln

    k = np.arange(0, 60)
    textbook = (
        gammaln(k + theta)
        - gammaln(theta)
        - gammaln(k + 1)
        + theta * np.log(theta / (theta + mu))
        + k * np.log(mu / (theta + mu))
    )
    tol = 1e-9 if theta < 1e5 else 1e-4  # the textbook form cancels at large theta
    np.testing.assert_allclose(nb_log_pmf(NegBinParams(mu, theta), k), textbook, atol=tol)


def test_nb_zero_and_geometric():
    p = NegBinParams(2.5, 3.0)
    assert nb_log_pmf(p, 0) == pytest.approx(3.0 * math.log(3.0 / 5.5), abs=1e-14)
    g = NegBinParams(2.5, 1.0)
    for k in range(10):
        assert nb_log_pmf(g, k) == pytest.approx(math.log((1 / 3.5) * (2.5 / 3.5) ** k), abs=1e-12)


@pytest.mark.parametrize(("mu", "theta"), [(0.4, 0.2), (3.0, 1.5), (20.0, 4.0)])
def test_nb_pmf_sums_to_one(mu, theta):
    k = np.arange(0, 20000)
    assert np.exp(nb_log_pmf(NegBinParams(mu, theta), k)).sum() == pytest.approx(1.0, abs=1e-9)


def test_nb_poisson_limit():
    k = np.arange(0, 30)
    np.testing.assert_allclose(
        nb_log_pmf(NegBinParams(4.0, 1e12), k), stats.poisson.logpmf(k, 4.0), atol=1e-9
    )


@pytest.mark.parametrize(("mu", "theta"), [(2.0, 0.7), (5.0, 3.0)])
def test_nb_moments_by_inverse_cdf_sampler(mu, theta):
    p = NegBinParams(mu, theta)
    k = np.arange(0, 5000)
    cdf = np.cumsum(np.exp(nb_log_pmf(p, k)))
    u = new_stream(17, 0).uniforms(200_000)
    x = np.searchsorted(cdf, u, side="right")
    var = p.variance
    assert var > mu
    assert abs(x.mean() - mu) < 4 * math.sqrt(var / x.size)
    # sample variance standard error via the fourth central moment
    m4 = float(np.dot((k - mu) ** 4, np.exp(nb_log_pmf(p, k))))
    assert abs(x.var() - var) < 4 * math.sqrt((m4 - var**2) / x.size)


def test_nb_params_validated():
    with pytest.raises(DomainError):
        NegBinParams(0.0, 1.0)
    with pytest.raises(DomainError):
        NegBinParams(1.0, -2.0)


def test_lognormal_density_at_exp_mu():
    mu, sigma = 0.7, 1.3
    y = math.exp(mu)
    assert lognormal_log_density(y, mu, sigma) == pytest.approx(-math.log(y * sigma * math.sqrt(2 * math.pi)))


@pytest.mark.parametrize(("mu", "sigma"), [(0.5, 1.0), (-1.0, 0.4), (2.0, 2.0)])
def test_lognormal_density_integrates_to_one(mu, sigma):
    # substitute y = exp(t) so the integrand is smooth; +-40 sigma holds all the mass
    lo, hi = mu - 40 * sigma, mu + 40 * sigma
    val, _ = integrate.quad(lambda t: math.exp(lognormal_log_density(math.exp(t), mu, sigma) + t), lo, hi, points=[mu])
    assert val == pytest.approx(1.0, abs=1e-6)


def test_lognormal_density_mode():
    mu, sigma = 0.5, 0.8
    grid = np.linspace(0.01, 10, 200_001)
    dens = lognormal_log_density(grid, mu, sigma)
    assert grid[np.argmax(dens)] == pytest.approx(math.exp(mu - sigma**2), abs=1e-4)


def test_lognormal_density_domain():
    with pytest.raises(DomainError):
        lognormal_log_density(0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        lognormal_log_density(1.0, 0.0, 0.0)
