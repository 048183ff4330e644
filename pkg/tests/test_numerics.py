import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citereg.numerics import (
    DomainError,
    chisq_cdf,
    digamma,
    digamma_rising,
    f_cdf,
    f_sf,
    log_gamma,
    log_rising,
    normal_cdf,
    reg_incomplete_beta,
    reg_incomplete_gamma_lower,
    t_cdf,
    t_sf_two_sided,
    trigamma,
    trigamma_rising,
)

# Reference values from mpmath at 40 significant digits, frozen here.
LOG_GAMMA_REF = [
    (1e-06, 13.815509980749431714),
    (0.1, 2.252712651734205902),
    (0.5, 0.57236494292470008707),
    (1, 0.0),
    (1.5, -0.12078223763524522235),
    (2.5, 0.28468287047291915963),
    (5, 3.1780538303479456196),
    (5.5, 3.9578139676187162939),
    (9.75, 12.242204940050762559),
    (10, 12.801827480081469611),
    (37.2, 96.439710161568400564),
    (123.4, 469.33609744219058579),
    (10000.0, 82099.717496442377273),
    (1000000.0, 12815504.56914761166),
]
DIGAMMA_REF = [
    (1e-06, -1000000.5772140200139),
    (0.1, -10.423754940411076232),
    (0.5, -1.9635100260214234794),
    (1, -0.57721566490153286061),
    (1.5, 0.036489973978576520559),
    (2.5, 0.70315664064524318723),
    (5, 1.5061176684318004727),
    (5.5, 1.6110931485817511237),
    (9.75, 2.225109535044576012),
    (10, 2.2517525890667211076),
    (37.2, 3.6028076865063575928),
    (123.4, 4.8113737751162774191),
    (10000.0, 9.2102903711428494036),
    (1000000.0, 13.815510057964190771),
]
TRIGAMMA_REF = [
    (1e-06, 1000000000001.6450222),
    (0.1, 101.4332991507927477),
    (0.5, 4.9348022005446793094),
    (1, 1.6449340668482264365),
    (1.5, 0.93480220054467930942),
    (2.5, 0.49035775610023486497),
    (5, 0.22132295573711532536),
    (5.5, 0.19934238698962765913),
    (9.75, 0.10800324333663185456),
    (10, 0.10516633568168574612),
    (37.2, 0.0272462709847649267),
    (123.4, 0.0081366516108652633096),
    (10000.0, 0.00010000500016666666633),
    (1000000.0, 1.0000005000001666667e-6),
]
NORMAL_REF = [
    (-8, 6.2209605742717841235e-16),
    (-3, 0.0013498980316300945267),
    (-1, 0.15865525393145705141),
    (-0.3, 0.38208857781104736693),
    (0, 0.5),
    (0.7, 0.75803634777692697138),
    (1, 0.84134474606854294859),
    (2.5, 0.99379033467422386483),
    (6, 0.99999999901341235496),
]
BETA_REF = [
    (0.5, 2, 0.25, 0.6875),
    (2, 3, 0.4, 0.5248),
    (10, 0.5, 0.9, 0.15164090963470996856),
    (0.5, 0.5, 0.01, 0.063768560858519848583),
    (2500, 0.5, 0.999, 0.025318024564887529284),
    (30, 40, 0.45, 0.64474800855856811281),
    (1.5, 7, 0.05, 0.1369316217312546995),
]
GAMMA_REF = [
    (0.5, 1.9207294, 0.94999999938291230709),
    (1, 2, 0.86466471676338730811),
    (3, 0.5, 0.014387677966970686644),
    (10, 12, 0.75760783832948765132),
    (0.25, 4, 0.99845731780336081427),
    (50, 40, 0.070335066659394954437),
    (2.5, 30, 0.99999999998784543022),
]


def scaled(tol, ref):
    """Absolute tolerance for |ref| <= 1, relative beyond (float64 cannot do better)."""
    return tol * max(1.0, abs(ref))


def test_frozen_references_match_mpmath():
    mpmath.mp.dps = 40
    for x, ref in LOG_GAMMA_REF:
        assert float(mpmath.loggamma(x)) == pytest.approx(ref, rel=1e-15, abs=1e-300)
    for x, ref in DIGAMMA_REF:
        assert float(mpmath.digamma(x)) == pytest.approx(ref, rel=1e-15)
    for x, ref in TRIGAMMA_REF:
        assert float(mpmath.psi(1, x)) == pytest.approx(ref, rel=1e-15)
    for a, b, x, ref in BETA_REF:
        assert float(mpmath.betainc(a, b, 0, x, regularized=True)) == pytest.approx(ref, rel=1e-14)
    for s, x, ref in GAMMA_REF:
        assert float(mpmath.gammainc(s, 0, x, regularized=True)) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize(("x", "ref"), LOG_GAMMA_REF)
def test_log_gamma_reference(x, ref):
    assert abs(log_gamma(x) - ref) <= scaled(1e-12, ref)


def test_log_gamma_identities():
    assert log_gamma(1) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(5) == pytest.approx(math.log(24), abs=1e-12)
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-12)
    assert log_gamma(1e8) == pytest.approx(math.lgamma(1e8), rel=1e-15)


@pytest.mark.parametrize(("x", "ref"), DIGAMMA_REF)
def test_digamma_reference(x, ref):
    assert abs(digamma(x) - ref) <= scaled(1e-10, ref)


def test_digamma_recurrence_examples():
    assert digamma(2) - digamma(1) == pytest.approx(1.0, abs=1e-12)
    assert digamma(1) == pytest.approx(-0.5772156649, abs=1e-10)
    assert digamma(10) == pytest.approx(2.2517525891, abs=1e-10)


@pytest.mark.parametrize(("x", "ref"), TRIGAMMA_REF)
def test_trigamma_reference(x, ref):
    assert abs(trigamma(x) - ref) <= scaled(1e-9, ref)


def test_trigamma_identities():
    assert trigamma(1) == pytest.approx(math.pi**2 / 6, abs=1e-12)
    assert trigamma(2) == pytest.approx(math.pi**2 / 6 - 1, abs=1e-12)


def test_vectorised_matches_scalar():
    xs = np.array([0.3, 1.0, 7.5, 80.0])
    np.testing.assert_array_equal(log_gamma(xs), [log_gamma(x) for x in xs])
    np.testing.assert_array_equal(digamma(xs), [digamma(x) for x in xs])
    np.testing.assert_array_equal(trigamma(xs), [trigamma(x) for x in xs])


@pytest.mark.parametrize("fn", [log_gamma, digamma, trigamma])
@pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, math.nan])
def test_gamma_family_domain(fn, bad):
    with pytest.raises(DomainError):
        fn(bad)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=0.1, max_value=1e6))
def test_log_gamma_recurrence(x):
    lhs = log_gamma(x + 1) - log_gamma(x) - math.log(x)
    # the stated 1e-11 plus the representation error of the two operands
    tol = 1e-11 + 2 * (np.spacing(abs(log_gamma(x + 1))) + np.spacing(abs(log_gamma(x))))
    assert abs(lhs) <= tol


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.5, max_value=1e3))
def test_digamma_is_derivative_of_log_gamma(x):
    h = 1e-5
    fd = (log_gamma(x + h) - log_gamma(x - h)) / (2 * h)
    assert abs(fd - digamma(x)) <= 1e-6


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.5, max_value=1e3))
def test_trigamma_is_derivative_of_digamma(x):
    h = 1e-5
    fd = (digamma(x + h) - digamma(x - h)) / (2 * h)
    assert abs(fd - trigamma(x)) <= 1e-6


@pytest.mark.parametrize("theta", [1e-6, 0.37, 2.0, 150.0, 1e8])
def test_rising_helpers_match_gamma_differences(theta):
    k = np.array([0, 1, 2, 5, 17, 300])
    mpmath.mp.dps = 50
    for kk, lr, dr, tr in zip(k, log_rising(theta, k), digamma_rising(theta, k), trigamma_rising(theta, k)):
        t = mpmath.mpf(theta)
        exp_lr = mpmath.loggamma(t + int(kk)) - mpmath.loggamma(t) - int(kk) * mpmath.log(t)
        exp_dr = mpmath.digamma(t + int(kk)) - mpmath.digamma(t)
        exp_tr = mpmath.psi(1, t + int(kk)) - mpmath.psi(1, t)
        assert lr == pytest.approx(float(exp_lr), rel=1e-12, abs=1e-15)
        assert dr == pytest.approx(float(exp_dr), rel=1e-12, abs=1e-20)
        assert tr == pytest.approx(float(exp_tr), rel=1e-12, abs=1e-25)


@pytest.mark.parametrize(("z", "ref"), NORMAL_REF)
def test_normal_cdf_reference(z, ref):
    assert abs(normal_cdf(z) - ref) <= 1e-12


def test_normal_cdf_against_quadrature():
    from scipy.integrate import quad

    pdf = lambda u: math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)  # noqa: E731
    val, _ = quad(pdf, -math.inf, 1.0, epsabs=1e-14)
    assert normal_cdf(1.0) == pytest.approx(val, abs=1e-12)
    assert normal_cdf(1.0) == pytest.approx(0.8413447461, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-40, max_value=40))
def test_normal_cdf_symmetry(z):
    assert normal_cdf(z) + normal_cdf(-z) == pytest.approx(1.0, abs=1e-15)


def test_normal_cdf_monotone_and_clamped():
    z = np.linspace(-40, 40, 20001)
    p = normal_cdf(z)
    assert np.all(np.diff(p) >= 0)
    assert p.min() >= 0 and p.max() <= 1
    assert normal_cdf(-np.inf) == 0.0 and normal_cdf(np.inf) == 1.0
    assert normal_cdf(-40) <= 1e-12 and 1 - normal_cdf(40) <= 1e-12


@pytest.mark.parametrize(("a", "b", "x", "ref"), BETA_REF)
def test_incomplete_beta_reference(a, b, x, ref):
    assert abs(reg_incomplete_beta(a, b, x) - ref) <= 1e-10


def test_incomplete_beta_against_quadrature():
    from scipy.integrate import quad

    a, b, x = 0.5, 2.0, 0.25
    dens = lambda t: t ** (a - 1) * (1 - t) ** (b - 1)  # noqa: E731
    num, _ = quad(dens, 0, x, epsabs=1e-14)
    den, _ = quad(dens, 0, 1, epsabs=1e-14)
    assert reg_incomplete_beta(a, b, x) == pytest.approx(num / den, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=0.05, max_value=200),
    st.floats(min_value=0.05, max_value=200),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_incomplete_beta_symmetry(a, b, x):
    y = 1.0 - x
    x = 1.0 - y  # x + y == 1 exactly
    assert reg_incomplete_beta(a, b, x) == pytest.approx(1 - reg_incomplete_beta(b, a, y), abs=1e-10)


def test_incomplete_beta_uniform_case():
    assert reg_incomplete_beta(1, 1, 0.3) == pytest.approx(0.3, abs=1e-14)


@pytest.mark.parametrize("args", [(0, 1, 0.5), (1, -1, 0.5), (1, 1, -0.1), (1, 1, 1.1)])
def test_incomplete_beta_domain(args):
    with pytest.raises(DomainError):
        reg_incomplete_beta(*args)


@pytest.mark.parametrize(("s", "x", "ref"), GAMMA_REF)
def test_incomplete_gamma_reference(s, x, ref):
    assert abs(reg_incomplete_gamma_lower(s, x) - ref) <= 1e-10


@pytest.mark.parametrize("x", [0.0, 0.01, 0.7, 3.0, 25.0])
def test_incomplete_gamma_exponential_case(x):
    assert reg_incomplete_gamma_lower(1, x) == pytest.approx(1 - math.exp(-x), abs=1e-14)
    assert reg_incomplete_gamma_lower(2.3, 0) == 0.0


def test_incomplete_gamma_domain():
    with pytest.raises(DomainError):
        reg_incomplete_gamma_lower(0, 1)
    with pytest.raises(DomainError):
        reg_incomplete_gamma_lower(1, -1)


def test_chisq_cdf_matches_erf():
    # chi-square(1) CDF is erf(sqrt(x/2))
    for x in (0.1, 1.0, 3.8414588, 9.0):
        assert chisq_cdf(x, 1) == pytest.approx(math.erf(math.sqrt(x / 2)), abs=1e-12)
    assert chisq_cdf(3.8414588, 1) == pytest.approx(0.95, abs=1e-8)


@pytest.mark.parametrize("df", [1, 2.5, 7, 30, 4998])
def test_t_cdf_symmetry_and_f_identity(df):
    assert t_cdf(0.0, df) == 0.5
    for t in (0.3, 1.0, 2.2, 5.0):
        assert t_cdf(t, df) + t_cdf(-t, df) == pytest.approx(1.0, abs=1e-14)
        assert f_cdf(t * t, 1, df) == pytest.approx(2 * t_cdf(t, df) - 1, abs=1e-12)
        assert f_sf(t * t, 1, df) == pytest.approx(t_sf_two_sided(t, df), abs=1e-14)
        assert f_sf(t * t, 1, df) + f_cdf(t * t, 1, df) == pytest.approx(1.0, abs=1e-12)


def test_t_cdf_against_mpmath():
    mpmath.mp.dps = 30
    for t, df in [(1.3, 4998), (-2.1, 3), (0.5, 1), (4.0, 12.5)]:
        x = df / (df + t * t)
        tail = mpmath.betainc(df / 2, 0.5, 0, x, regularized=True) / 2
        ref = 1 - tail if t > 0 else tail
        assert t_cdf(t, df) == pytest.approx(float(ref), abs=1e-12)


@pytest.mark.parametrize(
    ("cdf", "lower"),
    [
        (lambda x: t_cdf(x, 4.0), -math.inf),
        (lambda x: f_cdf(max(x, 0.0), 3.0, 11.0), 0.0),
        (lambda x: chisq_cdf(max(x, 0.0), 5.0), 0.0),
    ],
)
def test_cdfs_monotone_with_limits(cdf, lower):
    xs = np.linspace(-50, 400, 2001)
    vals = [cdf(x) for x in xs]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert cdf(lower) <= 1e-12
    assert cdf(math.inf) == pytest.approx(1.0, abs=1e-12)


def test_distribution_domains():
    with pytest.raises(DomainError):
        t_cdf(1.0, 0)
    with pytest.raises(DomainError):
        f_cdf(-1.0, 1, 2)
    with pytest.raises(DomainError):
        chisq_cdf(1.0, -2)
