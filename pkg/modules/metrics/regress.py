"""
Regression error and goodness-of-fit metrics.

The R² family is the main convention axis: the coefficient of
determination, the squared Pearson correlation and the adjusted form
answer different questions and can disagree in sign.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .core import ConventionDescriptor, DomainError, MetricId, MetricValue
from .numeric import as_float_array, check_same_length
from .registry import describe

logger = logging.getLogger(__name__)


class ZeroPolicy(str, Enum):
    ERROR = "error"
    EPSILON = "epsilon"
    DROP = "drop"


class MapeUnits(str, Enum):
    FRACTION = "fraction"
    PERCENT = "percent"


class R2Variant(str, Enum):
    COEFFICIENT_OF_DETERMINATION = "CoefficientOfDetermination"
    SQUARED_PEARSON = "SquaredPearson"
    ADJUSTED = "Adjusted"


@dataclass(frozen=True)
class PairedSeries:
    """Truth y and prediction y_hat of equal length n >= 2"""
    y: np.ndarray
    y_hat: np.ndarray

    def __post_init__(self):
        y = as_float_array(self.y, "y", min_length=2)
        y_hat = as_float_array(self.y_hat, "y_hat", min_length=2)
        check_same_length(y, y_hat, "y and y_hat")
        y.setflags(write=False)
        y_hat.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_hat", y_hat)

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def residuals(self) -> np.ndarray:
        return self.y - self.y_hat


@dataclass(frozen=True)
class ErrorSummary:
    mae: MetricValue
    mse: MetricValue
    rmse: MetricValue
    medae: MetricValue


@dataclass(frozen=True)
class RelativeErrors:
    mape: MetricValue
    msle: MetricValue


@dataclass(frozen=True)
class VarianceExplained:
    r_squared: MetricValue
    explained_variance: MetricValue


@dataclass(frozen=True)
class RobustLosses:
    tweedie_deviance: MetricValue
    huber: MetricValue


def basic_errors(s: PairedSeries) -> ErrorSummary:
    """MAE, MSE, RMSE and median absolute error"""
    e = s.residuals
    abs_e = np.abs(e)
    mse = float(np.mean(e * e))
    return ErrorSummary(
        mae=MetricValue.ok(describe(MetricId.MAE, "Standard"), float(np.mean(abs_e))),
        mse=MetricValue.ok(describe(MetricId.MSE, "Standard"), mse),
        rmse=MetricValue.ok(describe(MetricId.RMSE, "Standard"), math.sqrt(mse)),
        medae=MetricValue.ok(describe(MetricId.MEDAE, "Standard"), float(np.median(abs_e))),
    )


def _mape_descriptor(zero_policy: ZeroPolicy, units: MapeUnits, epsilon: float) -> ConventionDescriptor:
    params = {"units": units.value, "zero_policy": zero_policy.value}
    if zero_policy == ZeroPolicy.EPSILON:
        params["epsilon"] = float(epsilon)
    return describe(MetricId.MAPE, "Standard", **params)


def mape(s: PairedSeries, zero_policy: ZeroPolicy = ZeroPolicy.ERROR, units: MapeUnits = MapeUnits.FRACTION,
         epsilon: float = 2.220446049250313e-16) -> MetricValue:
    """
    Mean absolute percentage error under an explicit zero-truth policy.

    Raises:
        DomainError: Zero truths under zero_policy=error, or a non-positive epsilon
    """
    zero_policy, units = ZeroPolicy(zero_policy), MapeUnits(units)
    descriptor = _mape_descriptor(zero_policy, units, epsilon)
    y, e = s.y, s.residuals
    zero = y == 0
    if zero_policy == ZeroPolicy.ERROR:
        if np.any(zero):
            raise DomainError("MAPE is undefined for zero truths under zero_policy=error")
        ratios = np.abs(e / y)
    elif zero_policy == ZeroPolicy.EPSILON:
        if not epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {epsilon}")
        ratios = np.abs(e) / np.maximum(np.abs(y), epsilon)
    else:
        keep = ~zero
        if not np.any(keep):
            return MetricValue.undefined(descriptor, "every truth is zero")
        ratios = np.abs(e[keep] / y[keep])
    value = float(np.mean(ratios))
    if units == MapeUnits.PERCENT:
        value *= 100.0
    return MetricValue.ok(descriptor, value)


def msle(s: PairedSeries) -> MetricValue:
    """Mean squared logarithmic error; truths and predictions must be non-negative"""
    if np.any(s.y < 0) or np.any(s.y_hat < 0):
        raise DomainError("MSLE requires non-negative truths and predictions")
    d = np.log1p(s.y) - np.log1p(s.y_hat)
    return MetricValue.ok(describe(MetricId.MSLE, "Standard"), float(np.mean(d * d)))


def _undefined_on_domain_error(compute: Callable[[], MetricValue], descriptor: ConventionDescriptor) -> MetricValue:
    try:
        return compute()
    except DomainError as exc:
        return MetricValue.undefined(descriptor, str(exc))


def relative_errors(s: PairedSeries, zero_policy: ZeroPolicy = ZeroPolicy.ERROR,
                    mape_units: MapeUnits = MapeUnits.FRACTION, epsilon: float = 2.220446049250313e-16) -> RelativeErrors:
    """
    MAPE under an explicit zero-truth policy and unit, plus MSLE.

    Each value is checked against its own domain only: zero truths leave
    MSLE defined and negative values leave MAPE defined.

    Args:
        s: Paired series
        zero_policy: error leaves MAPE undefined on zero truths, epsilon
            floors |y| at epsilon, drop ignores those samples
        mape_units: fraction or percent
        epsilon: Denominator floor for the epsilon policy

    Returns:
        RelativeErrors: MAPE and MSLE
    """
    zero_policy, mape_units = ZeroPolicy(zero_policy), MapeUnits(mape_units)
    return RelativeErrors(
        _undefined_on_domain_error(lambda: mape(s, zero_policy, mape_units, epsilon),
                                   _mape_descriptor(zero_policy, mape_units, epsilon)),
        _undefined_on_domain_error(lambda: msle(s), describe(MetricId.MSLE, "Standard")),
    )


def _coefficient_of_determination(s: PairedSeries) -> float:
    e = s.residuals
    centered = s.y - np.mean(s.y)
    return 1.0 - float(np.dot(e, e)) / float(np.dot(centered, centered))


def _squared_pearson(s: PairedSeries):
    y = s.y - np.mean(s.y)
    y_hat = s.y_hat - np.mean(s.y_hat)
    var_hat = float(np.dot(y_hat, y_hat))
    if var_hat == 0.0:
        return None
    r = float(np.dot(y, y_hat)) / math.sqrt(float(np.dot(y, y)) * var_hat)
    return min(1.0, r * r)


def variance_explained(s: PairedSeries, r2_variant: R2Variant = R2Variant.COEFFICIENT_OF_DETERMINATION,
                       predictors: int = 1) -> VarianceExplained:
    """
    R² under one convention plus explained variance (population variances).

    Raises:
        DomainError: Var(y) = 0, or too few samples for the adjusted form
    """
    r2_variant = R2Variant(r2_variant)
    if float(np.var(s.y)) == 0.0:
        raise DomainError("R² is undefined when the truth has zero variance")
    ev = 1.0 - float(np.var(s.residuals)) / float(np.var(s.y))
    explained = MetricValue.ok(describe(MetricId.EXPLAINED_VARIANCE, "Standard"), ev)

    if r2_variant == R2Variant.COEFFICIENT_OF_DETERMINATION:
        r2 = MetricValue.ok(describe(MetricId.R_SQUARED, r2_variant.value), _coefficient_of_determination(s))
    elif r2_variant == R2Variant.SQUARED_PEARSON:
        r2 = MetricValue.from_optional(describe(MetricId.R_SQUARED, r2_variant.value), _squared_pearson(s),
                                       "constant prediction")
    else:
        descriptor = describe(MetricId.R_SQUARED, r2_variant.value, predictors=int(predictors))
        if predictors < 1:
            raise DomainError(f"predictor count must be at least 1, got {predictors}")
        if s.n < 3 or s.n - predictors - 1 <= 0:
            raise DomainError(f"adjusted R² needs n > p + 1 and n >= 3 (n={s.n}, p={predictors})")
        base = _coefficient_of_determination(s)
        r2 = MetricValue.ok(descriptor, 1.0 - (1.0 - base) * (s.n - 1) / (s.n - predictors - 1))
    return VarianceExplained(r2, explained)


def tweedie_deviance(s: PairedSeries, power: float = 0.0) -> float:
    """Mean Tweedie deviance; the power fixes the distribution family"""
    y, mu = s.y, s.y_hat
    if 0.0 < power < 1.0:
        raise DomainError(f"Tweedie power in (0, 1) has no distribution, got {power}")
    if power == 0.0:
        dev = (y - mu) ** 2
    elif power < 0.0:
        if np.any(mu <= 0):
            raise DomainError("Tweedie power < 0 requires positive predictions")
        dev = 2.0 * (np.power(np.maximum(y, 0.0), 2.0 - power) / ((1.0 - power) * (2.0 - power))
                     - y * np.power(mu, 1.0 - power) / (1.0 - power)
                     + np.power(mu, 2.0 - power) / (2.0 - power))
    elif power == 1.0:
        if np.any(y < 0) or np.any(mu <= 0):
            raise DomainError("Poisson deviance requires y >= 0 and positive predictions")
        with np.errstate(divide="ignore", invalid="ignore"):
            y_log = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0) / mu), 0.0)
        dev = 2.0 * (y_log - (y - mu))
    elif power == 2.0:
        if np.any(y <= 0) or np.any(mu <= 0):
            raise DomainError("Gamma deviance requires positive truths and predictions")
        dev = 2.0 * (np.log(mu / y) + y / mu - 1.0)
    else:
        if power < 2.0:
            if np.any(y < 0) or np.any(mu <= 0):
                raise DomainError(f"Tweedie power {power} requires y >= 0 and positive predictions")
        elif np.any(y <= 0) or np.any(mu <= 0):
            raise DomainError(f"Tweedie power {power} requires positive truths and predictions")
        dev = 2.0 * (np.power(y, 2.0 - power) / ((1.0 - power) * (2.0 - power))
                     - y * np.power(mu, 1.0 - power) / (1.0 - power)
                     + np.power(mu, 2.0 - power) / (2.0 - power))
    return float(np.mean(dev))


def huber_loss(s: PairedSeries, delta: float = 1.0) -> float:
    if not delta > 0:
        raise DomainError(f"Huber delta must be positive, got {delta}")
    abs_e = np.abs(s.residuals)
    loss = np.where(abs_e <= delta, 0.5 * abs_e * abs_e, delta * abs_e - 0.5 * delta * delta)
    return float(np.mean(loss))


def robust_losses(s: PairedSeries, tweedie_power: float = 0.0, huber_delta: float = 1.0) -> RobustLosses:
    """Tweedie deviance at one power and the Huber loss at one delta"""
    return RobustLosses(
        MetricValue.ok(describe(MetricId.TWEEDIE_DEVIANCE, "Tweedie", power=float(tweedie_power)),
                       tweedie_deviance(s, tweedie_power)),
        MetricValue.ok(describe(MetricId.HUBER, "Huber", delta=float(huber_delta)), huber_loss(s, huber_delta)),
    )
