import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import stats

from redalloc import distributions as dist
from redalloc.distributions import LifetimeFamily, LifetimeModel
from redalloc.errors import DomainError, ParameterError, PoleError

FAMILIES = [dist.LOMAX, dist.GENERALIZED_EXPONENTIAL, dist.INVERTED_EXPONENTIAL,
            dist.pareto1(1.5), dist.WEIBULL, dist.RAYLEIGH, dist.SHIFTED_EXPONENTIAL]


def scipy_law(family, b):
    """Independent reference for each family through scipy.stats."""
    k = family.kind.value
    if k == "lomax":
        return stats.lomax(c=b)
    if k == "generalized_exponential":
        return stats.exponweib(a=math.sqrt(b), c=1.0)
    if k == "inverted_exponential":
        return stats.invweibull(c=1.0, scale=b)
    if k == "pareto1":
        return stats.pareto(b=family.alpha, scale=b)
    if k == "weibull":
        return stats.weibull_min(c=b)
    if k == "rayleigh":
        return stats.rayleigh(scale=1 / math.sqrt(2 * b))
    if k == "shifted_exponential":
        return stats.expon(loc=b)
    raise AssertionError(k)


def model(family, b):
    return LifetimeModel(family, b)


# -- point values ---------------------------------------------------------------

def test_lomax_cdf_at_support_start():
    assert dist.cdf(model(dist.LOMAX, 1.2), 0.0) == 0.0


def test_lomax_cdf_hand_value():
    assert_allclose(dist.cdf(model(dist.LOMAX, 1.0), 1.0), 0.5, rtol=1e-15)


def test_pareto_below_support_is_zero():
    assert dist.cdf(model(dist.pareto1(1.5), 0.5), 0.4) == 0.0


def test_inverted_exponential_rev_hazard():
    m = model(dist.INVERTED_EXPONENTIAL, 0.05)
    assert_allclose(dist.rev_hazard(m, 1.0), 0.05, rtol=1e-14)
    # b / t^2 against a finite difference of log F
    h = 1e-5
    fd = (dist.logcdf(m, 2 + h) - dist.logcdf(m, 2 - h)) / (2 * h)
    assert_allclose(dist.rev_hazard(m, 2.0), fd, rtol=1e-8)


def test_weibull_unit_shape_rev_hazard_at_ln2():
    assert_allclose(dist.rev_hazard(model(dist.WEIBULL, 1.0), math.log(2)), 1.0, rtol=1e-14)


def test_rayleigh_sf_at_zero():
    assert dist.sf(model(dist.RAYLEIGH, 1.5), 0.0) == 1.0


def test_inverted_exponential_cdf_at_zero_is_limit():
    assert dist.cdf(model(dist.INVERTED_EXPONENTIAL, 0.05), 0.0) == 0.0


def test_cdf_partial_b_zero_at_origin():
    assert dist.cdf_partial_b(model(dist.LOMAX, 1.0), 0.0) == 0.0


# -- agreement with scipy.stats ------------------------------------------------------

@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.token)
@pytest.mark.parametrize("b", [0.3, 1.0, 2.5])
def test_matches_scipy(family, b):
    m = model(family, b)
    ref = scipy_law(family, b)
    t = m.support_start + np.geomspace(1e-3, 20, 60)
    assert_allclose(dist.cdf(m, t), ref.cdf(t), rtol=1e-10, atol=1e-300)
    assert_allclose(dist.sf(m, t), ref.sf(t), rtol=1e-9, atol=1e-300)
    assert_allclose(dist.pdf(m, t), ref.pdf(t), rtol=1e-9, atol=1e-300)


# -- invariants -------------------------------------------------------------------

family_st = st.sampled_from(FAMILIES)
b_st = st.floats(0.05, 5.0)


@settings(max_examples=1000, deadline=None)
@given(family_st, b_st, st.floats(0.0, 50.0))
def test_probability_bounds_and_complement(family, b, t):
    m = model(family, b)
    c, s = dist.cdf(m, t), dist.sf(m, t)
    assert 0.0 <= c <= 1.0 and 0.0 <= s <= 1.0
    # each side is computed in log space, so the sum is 1 up to rounding of the two exps
    assert abs(c + s - 1.0) <= 4 * np.finfo(float).eps
    if t > m.support_start:
        assert dist.pdf(m, t) >= 0.0


@settings(max_examples=200, deadline=None)
@given(family_st, b_st, st.floats(0.05, 10.0))
def test_pdf_is_derivative_of_cdf(family, b, dt):
    m = model(family, b)
    t = m.support_start + dt
    h = 1e-6 * max(1.0, t)
    # difference whichever of cdf and sf is small: the other one has lost the digits
    if dist.cdf(m, t) < 0.5:
        fd = (dist.cdf(m, t + h) - dist.cdf(m, t - h)) / (2 * h)
    else:
        fd = (dist.sf(m, t - h) - dist.sf(m, t + h)) / (2 * h)
    p = dist.pdf(m, t)
    if p > 1e-8:
        assert_allclose(p, fd, rtol=1e-6)


@settings(max_examples=300, deadline=None)
@given(family_st, b_st, st.floats(0.05, 10.0))
def test_rate_identities(family, b, dt):
    m = model(family, b)
    t = m.support_start + dt
    p, c, s = dist.pdf(m, t), dist.cdf(m, t), dist.sf(m, t)
    if s > 1e-300:
        assert_allclose(dist.hazard(m, t) * s, p, rtol=1e-12)
    if c > 1e-300:
        assert_allclose(dist.rev_hazard(m, t) * c, p, rtol=1e-12)


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.token)
def test_cdf_nondecreasing_in_t(family):
    m = model(family, 0.7)
    t = np.linspace(0, 30, 3001)
    assert np.all(np.diff(dist.cdf(m, t)) >= 0)


def test_monotonicity_in_b():
    bs = np.linspace(0.1, 3.0, 30)
    t = np.array([0.2, 1.0, 4.0])
    F = lambda fam: np.array([dist.cdf(model(fam, b), t) for b in bs])  # noqa: E731
    # F(t; b) for fixed t: Lomax increases in b, the sqrt(b)-power and inverted exponential decrease
    assert np.all(np.diff(F(dist.LOMAX), axis=0) >= 0)
    assert np.all(np.diff(F(dist.GENERALIZED_EXPONENTIAL), axis=0) <= 0)
    assert np.all(np.diff(F(dist.INVERTED_EXPONENTIAL), axis=0) <= 0)
    # Weibull: increasing in b beyond t = 1 only
    assert np.all(np.diff(F(dist.WEIBULL)[:, 2]) >= 0)


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.token)
def test_partial_b_closed_form_matches_numeric(family):
    m = model(family, 0.8)
    t = m.support_start + np.array([0.3, 1.0, 3.0])
    if family.kind.value == "pareto1":
        t = 1.0 + np.array([0.3, 1.0, 3.0])
    assert_allclose(dist.cdf_partial_b(m, t), dist.cdf_partial_b_numeric(m, t), rtol=1e-6, atol=1e-12)


# -- curvature along b --------------------------------------------------------------

def test_lomax_log_cdf_concave_in_b():
    rep = dist.log_cdf_b_curvature(dist.LOMAX, 1.0, np.linspace(0.2, 1.2, 101))
    assert rep.label == "concave"
    # independent: ln(1 - 2^-b) has second derivative -ln2^2 2^-b / (1 - 2^-b)^2 < 0
    b = rep.b_grid[1:-1]
    exact = -(math.log(2) ** 2) * 2.0**-b / (1 - 2.0**-b) ** 2
    assert_allclose(rep.second_differences, exact, rtol=1e-2)


def test_inverted_exponential_log_cdf_linear_in_b():
    rep = dist.log_cdf_b_curvature(dist.INVERTED_EXPONENTIAL, 1.0, np.linspace(0.02, 0.06, 21))
    assert rep.concave and rep.convex and rep.label == "linear"


def test_b_grid_at_boundary_rejected():
    with pytest.raises(DomainError):
        dist.log_cdf_b_curvature(dist.LOMAX, 1.0, np.linspace(0.0, 1.0, 5))
    with pytest.raises(DomainError):
        dist.validate_b_grid([0.2, 0.1, 0.3])


# -- errors and tokens -------------------------------------------------------------

@pytest.mark.parametrize("b", [0.0, -1.0, float("nan"), float("inf")])
def test_bad_parameter(b):
    with pytest.raises(ParameterError):
        model(dist.LOMAX, b)


def test_generalized_exponential_rejects_zero():
    with pytest.raises(ParameterError):
        model(dist.GENERALIZED_EXPONENTIAL, 0.0)


def test_density_outside_support_is_an_error():
    with pytest.raises(DomainError):
        dist.pdf(model(dist.pareto1(1.5), 0.5), 0.4)
    with pytest.raises(PoleError):
        dist.rev_hazard(model(dist.LOMAX, 1.0), 0.0)


def test_hazard_finite_where_sf_underflows():
    # sf = exp(-t^3) is below the smallest double at t = 50; the log-space ratio is still exact
    m = model(dist.WEIBULL, 3.0)
    assert dist.sf(m, 50.0) == 0.0
    # logpdf - logsf subtracts two numbers of size 1.25e5: about 11 digits survive
    assert_allclose(dist.hazard(m, 50.0), 3.0 * 50.0**2, rtol=1e-10)


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.token)
def test_token_round_trip(family):
    assert LifetimeFamily.from_token(family.token, family.alpha) == family


def test_unknown_token():
    with pytest.raises(ParameterError):
        LifetimeFamily.from_token("gamma")


def test_supports():
    assert dist.pareto1(1.5).support_start(0.5) == 0.5
    assert dist.SHIFTED_EXPONENTIAL.support_start(0.3) == 0.3
    assert dist.LOMAX.support_start(2.0) == 0.0
