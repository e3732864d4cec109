import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modules.metrics.core import DomainError, ShapeError, Validity
from modules.metrics.regress import (
    MapeUnits, PairedSeries, R2Variant, ZeroPolicy, basic_errors, mape, msle, relative_errors, robust_losses,
    variance_explained,
)


def series(y, y_hat) -> PairedSeries:
    return PairedSeries(np.array(y, dtype=float), np.array(y_hat, dtype=float))


def test_paired_series_preconditions():
    with pytest.raises(ShapeError):
        series([1.0, 2.0], [1.0])
    with pytest.raises(ShapeError):
        series([1.0], [1.0])
    with pytest.raises(DomainError):
        series([1.0, math.nan], [1.0, 2.0])


def test_basic_errors_examples():
    perfect = basic_errors(series([1, 2, 3], [1, 2, 3]))
    assert [perfect.mae.value, perfect.mse.value, perfect.rmse.value, perfect.medae.value] == [0, 0, 0, 0]

    e = basic_errors(series([1, 2, 3], [2, 2, 2]))
    assert e.mae.value == pytest.approx(2 / 3)
    assert e.mse.value == pytest.approx(2 / 3)
    assert e.rmse.value == pytest.approx(0.8165, abs=1e-4)
    assert e.medae.value == 1.0

    e = basic_errors(series([0, 0], [3, 4]))
    assert (e.mae.value, e.mse.value, e.medae.value) == (3.5, 12.5, 3.5)
    assert e.rmse.value == pytest.approx(3.5355, abs=1e-4)


def test_relative_errors_examples():
    assert relative_errors(series([1, 2], [1, 2])).mape.value == 0.0
    assert relative_errors(series([1, 2], [2, 2])).mape.value == pytest.approx(0.5)
    assert relative_errors(series([1, 2], [2, 2]), mape_units=MapeUnits.PERCENT).mape.value == pytest.approx(50.0)


def test_relative_errors_zero_truth_policies():
    s = series([0, 1], [0, 1])
    with pytest.raises(DomainError):
        mape(s)
    assert relative_errors(s).mape.validity == Validity.UNDEFINED
    assert relative_errors(s, zero_policy=ZeroPolicy.DROP).mape.value == 0.0
    assert relative_errors(s, zero_policy=ZeroPolicy.EPSILON).mape.value == 0.0
    all_zero = series([0, 0], [1, 1])
    assert relative_errors(all_zero, zero_policy=ZeroPolicy.DROP).mape.validity == Validity.UNDEFINED


def test_msle_rejects_negative_values():
    with pytest.raises(DomainError):
        msle(series([1, -1], [1, 1]))


def test_zero_truths_leave_msle_defined():
    s = series([0, 1, 3], [0, 1, 2])
    expected = math.log(4 / 3) ** 2 / 3
    assert msle(s).value == pytest.approx(expected)
    both = relative_errors(s)
    assert both.msle.value == pytest.approx(expected)
    assert both.mape.validity == Validity.UNDEFINED
    assert "zero truths" in both.mape.notes[0]


def test_negative_truths_leave_mape_defined():
    s = series([-1, 2], [-1, 1])
    assert mape(s).value == pytest.approx(0.25)
    both = relative_errors(s)
    assert both.mape.value == pytest.approx(0.25)
    assert both.msle.validity == Validity.UNDEFINED
    assert "non-negative" in both.msle.notes[0]


def test_variance_explained_examples():
    perfect = series([1, 2, 3], [1, 2, 3])
    for variant in R2Variant:
        result = variance_explained(perfect, variant)
        assert result.r_squared.value == pytest.approx(1.0)
        assert result.explained_variance.value == pytest.approx(1.0)

    constant = series([1, 2, 3], [2, 2, 2])
    assert variance_explained(constant).r_squared.value == pytest.approx(0.0)
    assert variance_explained(constant).explained_variance.value == pytest.approx(0.0)
    assert variance_explained(constant, R2Variant.SQUARED_PEARSON).r_squared.validity == Validity.UNDEFINED

    affine = series([1, 2, 3], [2, 4, 6])
    assert variance_explained(affine, R2Variant.SQUARED_PEARSON).r_squared.value == pytest.approx(1.0)
    assert variance_explained(affine).r_squared.value == pytest.approx(-6.0)


def test_adjusted_r_squared():
    s = series([1, 2, 3, 4, 5], [1.1, 1.9, 3.2, 3.9, 5.1])
    plain = variance_explained(s).r_squared.value
    adjusted = variance_explained(s, R2Variant.ADJUSTED, predictors=2).r_squared.value
    assert adjusted == pytest.approx(1 - (1 - plain) * 4 / 2)
    with pytest.raises(DomainError):
        variance_explained(series([1, 2, 3], [1, 2, 2]), R2Variant.ADJUSTED, predictors=2)


def test_zero_variance_truth():
    with pytest.raises(DomainError):
        variance_explained(series([2, 2, 2], [1, 2, 3]))


@pytest.mark.property_based
def test_squared_pearson_dominates_coefficient_of_determination(rng):
    for _ in range(1000):
        n = int(rng.integers(3, 30))
        y = rng.normal(0.0, 1.0, n)
        y_hat = rng.normal(0.0, 1.0) + rng.normal(0.0, 2.0) * y + rng.normal(0.0, 1.0, n)
        s = series(y, y_hat)
        cod = variance_explained(s).r_squared.value
        sq = variance_explained(s, R2Variant.SQUARED_PEARSON).r_squared
        if sq.value is not None:
            assert sq.value >= cod - 1e-12


@pytest.mark.property_based
@given(st.lists(st.floats(-100, 100), min_size=3, max_size=20), st.floats(-10, 10), st.floats(0.1, 10))
@settings(max_examples=200)
def test_squared_pearson_is_affine_invariant(values, a, b):
    y = np.array(values)
    if np.ptp(y) < 1e-3:
        return
    y_hat = y + np.linspace(-1.0, 1.0, y.size)
    base = variance_explained(series(y, y_hat), R2Variant.SQUARED_PEARSON).r_squared.value
    moved = variance_explained(series(y, a + b * y_hat), R2Variant.SQUARED_PEARSON).r_squared.value
    assert moved == pytest.approx(base, abs=1e-9)


def test_robust_losses_examples():
    s = series([1, 2, 3], [2, 2, 2])
    losses = robust_losses(s)
    assert losses.tweedie_deviance.value == pytest.approx(2 / 3)
    assert losses.huber.value == pytest.approx(1 / 3)
    assert robust_losses(series([0, 0], [2, 2]), huber_delta=0.5).huber.value == pytest.approx(0.875)


def test_tweedie_domains():
    with pytest.raises(DomainError):
        robust_losses(series([1, 2], [1, 2]), tweedie_power=0.5)
    with pytest.raises(DomainError):
        robust_losses(series([0, 2], [1, 2]), tweedie_power=2.0)
    with pytest.raises(DomainError):
        robust_losses(series([1, 2], [0, 2]), tweedie_power=1.0)
    poisson = robust_losses(series([0, 2], [1, 2]), tweedie_power=1.0).tweedie_deviance.value
    assert poisson == pytest.approx(1.0)
    with pytest.raises(DomainError):
        robust_losses(series([1, 2], [1, 2]), huber_delta=0.0)


@pytest.mark.property_based
def test_loss_identities(rng):
    for _ in range(200):
        n = int(rng.integers(2, 40))
        y = rng.uniform(0.5, 10.0, n)
        y_hat = rng.uniform(0.5, 10.0, n)
        s = series(y, y_hat)
        errors = basic_errors(s)
        assert robust_losses(s).tweedie_deviance.value == pytest.approx(errors.mse.value, abs=1e-12)
        assert errors.rmse.value ** 2 == pytest.approx(errors.mse.value, rel=1e-12)
        big = robust_losses(s, huber_delta=1e6).huber.value
        small = robust_losses(s, huber_delta=1e-6).huber.value
        assert big == pytest.approx(errors.mse.value / 2, rel=1e-6)
        assert small == pytest.approx(errors.mae.value * 1e-6, rel=1e-6)


@pytest.mark.property_based
def test_explained_variance_equals_r_squared_for_centred_errors(rng):
    for _ in range(100):
        y = rng.normal(0.0, 3.0, 20)
        noise = rng.normal(0.0, 1.0, 20)
        s = series(y, y + noise - noise.mean())
        result = variance_explained(s)
        assert result.explained_variance.value == pytest.approx(result.r_squared.value, abs=1e-12)
