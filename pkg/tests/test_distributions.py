import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modules.metrics.core import DomainError
from modules.metrics.distributions import (
    chi2_cdf, chi2_sf, erfc, f_cdf, f_sf, kolmogorov_cdf, kolmogorov_sf, normal_cdf, normal_ppf, normal_sf,
    regularized_beta, regularized_gamma_p, regularized_gamma_q, t_cdf, t_sf, tail_p_value,
)
from modules.oracles import numeric_cdf

GRID_TOLERANCE = 1e-8


@pytest.mark.parametrize("z", [-6.0, -3.5, -1.0, -0.25, 0.0, 0.4, 1.96, 3.0, 5.5])
def test_normal_against_quadrature(z):
    assert normal_cdf(z) == pytest.approx(numeric_cdf("normal", z), abs=GRID_TOLERANCE)
    assert normal_sf(z) == pytest.approx(numeric_cdf("normal", z, upper=True), abs=GRID_TOLERANCE)


@pytest.mark.parametrize("df", [1.0, 2.5, 5.0, 30.0])
@pytest.mark.parametrize("t", [-10.0, -2.0, -0.5, 0.0, 0.7, 1.5, 4.0])
def test_student_t_against_quadrature(t, df):
    assert t_cdf(t, df) == pytest.approx(numeric_cdf("t", t, df=df), abs=GRID_TOLERANCE)
    assert t_sf(t, df) == pytest.approx(numeric_cdf("t", t, upper=True, df=df), abs=GRID_TOLERANCE)


@pytest.mark.parametrize("df", [1.0, 2.0, 5.0, 20.0])
@pytest.mark.parametrize("x", [0.1, 0.8, 2.0, 7.5, 25.0, 50.0])
def test_chi_square_against_quadrature(x, df):
    assert chi2_sf(x, df) == pytest.approx(numeric_cdf("chi2", x, upper=True, df=df), abs=GRID_TOLERANCE)
    if df > 2:
        assert chi2_cdf(x, df) == pytest.approx(numeric_cdf("chi2", x, df=df), abs=GRID_TOLERANCE)


@pytest.mark.parametrize("d1,d2", [(1.0, 1.0), (2.0, 6.0), (5.0, 12.0), (20.0, 3.0)])
@pytest.mark.parametrize("f", [0.05, 0.5, 1.0, 2.5, 20.0])
def test_f_against_quadrature(f, d1, d2):
    assert f_sf(f, d1, d2) == pytest.approx(numeric_cdf("f", f, upper=True, df=d1, df2=d2), abs=GRID_TOLERANCE)
    if d1 > 2:
        assert f_cdf(f, d1, d2) == pytest.approx(numeric_cdf("f", f, df=d1, df2=d2), abs=GRID_TOLERANCE)


@pytest.mark.parametrize("x", [0.3, 0.6, 0.9, 1.17, 1.19, 1.5, 2.0, 2.8])
def test_kolmogorov_against_theta_series(x):
    assert kolmogorov_cdf(x) == pytest.approx(numeric_cdf("kolmogorov", x), abs=1e-10)
    assert kolmogorov_sf(x) == pytest.approx(numeric_cdf("kolmogorov", x, upper=True), abs=1e-10)


def test_closed_forms():
    for x in (0.5, 3.0, 11.0):
        assert chi2_sf(x, 2.0) == pytest.approx(math.exp(-x / 2.0), rel=1e-12)
        # df = 1 is the Cauchy distribution
        assert t_cdf(x, 1.0) == pytest.approx(0.5 + math.atan(x) / math.pi, rel=1e-12)
        assert erfc(x) == pytest.approx(math.erfc(x), rel=1e-12)
    assert normal_cdf(0.0) == 0.5
    assert t_sf(0.0, 7.0) == pytest.approx(0.5)


def test_f_with_one_numerator_df_is_squared_t():
    for t in (0.3, 1.0, 2.2, 5.0):
        for df in (3.0, 10.0):
            assert f_sf(t * t, 1.0, df) == pytest.approx(2.0 * t_sf(t, df), rel=1e-10)


def test_boundaries():
    assert regularized_gamma_p(2.0, 0.0) == 0.0
    assert regularized_gamma_q(2.0, 0.0) == 1.0
    assert regularized_gamma_p(2.0, math.inf) == 1.0
    assert regularized_beta(2.0, 3.0, 0.0) == 0.0
    assert regularized_beta(2.0, 3.0, 1.0) == 1.0
    assert t_sf(math.inf, 4.0) == 0.0
    assert t_sf(-math.inf, 4.0) == 1.0
    assert chi2_sf(0.0, 3.0) == 1.0
    assert kolmogorov_cdf(0.0) == 0.0
    assert kolmogorov_sf(0.0) == 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        regularized_gamma_p(0.0, 1.0)
    with pytest.raises(DomainError):
        regularized_gamma_q(1.0, -1.0)
    with pytest.raises(DomainError):
        regularized_beta(-1.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        t_sf(1.0, 0.0)
    with pytest.raises(DomainError):
        normal_ppf(1.0)
    with pytest.raises(DomainError):
        tail_p_value(0.2, 0.8, "both")


def test_two_sided_tail_doubles_the_smaller_side():
    assert tail_p_value(0.1, 0.9, "two-sided") == pytest.approx(0.2)
    assert tail_p_value(0.9, 0.1, "two-sided") == pytest.approx(0.2)
    assert tail_p_value(0.7, 0.6, "two-sided") == 1.0
    assert tail_p_value(0.1, 0.9, "greater") == 0.9
    assert tail_p_value(0.1, 0.9, "less") == 0.1


@pytest.mark.property_based
@given(st.floats(min_value=1e-10, max_value=1.0 - 1e-10))
@settings(max_examples=100)
def test_normal_quantile_inverts_cdf(p):
    """normal_ppf is the inverse of normal_cdf across both tails"""
    z = normal_ppf(p)
    if p < 0.5:
        assert normal_cdf(z) == pytest.approx(p, rel=1e-8)
    else:
        assert normal_sf(z) == pytest.approx(1.0 - p, rel=1e-8, abs=1e-15)


@pytest.mark.property_based
@given(st.floats(min_value=-50.0, max_value=50.0), st.floats(min_value=0.5, max_value=200.0))
@settings(max_examples=100)
def test_t_tails_are_complementary(t, df):
    """Lower and upper tails of the t distribution sum to one"""
    lower, upper = t_cdf(t, df), t_sf(t, df)
    assert 0.0 <= lower <= 1.0
    assert 0.0 <= upper <= 1.0
    assert lower + upper == pytest.approx(1.0, abs=1e-12)
