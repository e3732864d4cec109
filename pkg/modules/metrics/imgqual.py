"""
Image-to-image quality metrics: voxel errors, PSNR and SSIM.

The dynamic range L is always an explicit policy. SSIM averages over
valid window positions only (no padding), and axes of length 1 are
ignored so a depth-1 volume scores like its 2D slice.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.ndimage import correlate1d

from .core import DomainError, MetricId, MetricValue, ShapeError
from .regress import PairedSeries, R2Variant, basic_errors, variance_explained
from .registry import describe

logger = logging.getLogger(__name__)


class DataRange(str, Enum):
    DECLARED = "declared"
    OBSERVED_REF_RANGE = "observed_ref_range"
    UNIT_INTERVAL = "unit_interval"


class SsimWindow(str, Enum):
    GAUSSIAN = "Gaussian"
    UNIFORM = "Uniform"


class Covariance(str, Enum):
    POPULATION = "population"
    SAMPLE = "sample"


@dataclass(frozen=True)
class RasterPair:
    """
    Reference and test rasters of identical 2D or 3D shape.

    ``declared_max`` is the L used under the ``declared`` policy (e.g. 255
    for 8-bit images).
    """
    ref: np.ndarray
    test: np.ndarray
    declared_max: Optional[float] = None
    data_range: DataRange = DataRange.DECLARED

    def __post_init__(self):
        ref = np.asarray(self.ref, dtype=float)
        test = np.asarray(self.test, dtype=float)
        if ref.ndim not in (2, 3) or min(ref.shape) < 1:
            raise ShapeError(f"raster must be a non-empty 2D or 3D array, got shape {ref.shape}")
        if ref.shape != test.shape:
            raise ShapeError(f"raster shapes differ: {ref.shape} vs {test.shape}")
        if not (np.all(np.isfinite(ref)) and np.all(np.isfinite(test))):
            raise DomainError("rasters must be finite")
        ref = ref.copy()
        test = test.copy()
        ref.setflags(write=False)
        test.setflags(write=False)
        object.__setattr__(self, "ref", ref)
        object.__setattr__(self, "test", test)
        object.__setattr__(self, "data_range", DataRange(self.data_range))

    def resolve_range(self, policy: Optional[DataRange] = None) -> float:
        """
        Dynamic range L under a policy (defaults to the pair's own).

        Raises:
            DomainError: Missing declared maximum, or L <= 0
        """
        policy = DataRange(policy or self.data_range)
        if policy == DataRange.UNIT_INTERVAL:
            value = 1.0
        elif policy == DataRange.OBSERVED_REF_RANGE:
            value = float(self.ref.max() - self.ref.min())
        else:
            if self.declared_max is None:
                raise DomainError("data_range=declared needs a declared maximum")
            value = float(self.declared_max)
        if not value > 0:
            raise DomainError(f"data range must be positive, got {value} under {policy.value}")
        return value

    def series(self) -> PairedSeries:
        return PairedSeries(self.ref.ravel(), self.test.ravel())


@dataclass(frozen=True)
class RasterErrors:
    mae: MetricValue
    mse: MetricValue
    rmse: MetricValue
    r_squared: MetricValue


def raster_errors(p: RasterPair,
                  r2_variant: R2Variant = R2Variant.COEFFICIENT_OF_DETERMINATION) -> RasterErrors:
    """Flatten both rasters and score them as a regression with the reference as truth"""
    r2_variant = R2Variant(r2_variant)
    if r2_variant == R2Variant.ADJUSTED:
        raise DomainError("adjusted R² has no meaning for rasters")
    s = p.series()
    errors = basic_errors(s)
    r2 = variance_explained(s, r2_variant).r_squared

    def relabel(metric_id: MetricId, source: MetricValue, family: str = "Standard") -> MetricValue:
        return MetricValue.from_optional(describe(metric_id, family), source.value, "; ".join(source.notes))

    return RasterErrors(
        mae=relabel(MetricId.IMG_MAE, errors.mae),
        mse=relabel(MetricId.IMG_MSE, errors.mse),
        rmse=relabel(MetricId.IMG_RMSE, errors.rmse),
        r_squared=relabel(MetricId.IMG_R_SQUARED, r2, r2_variant.value),
    )


def psnr(p: RasterPair, data_range: Optional[DataRange] = None) -> MetricValue:
    """
    10 * log10(L^2 / MSE).

    Identical rasters give +inf with a note. PSNR is negative exactly when
    MSE exceeds L^2.
    """
    policy = DataRange(data_range or p.data_range)
    descriptor = describe(MetricId.PSNR, "Standard", data_range=policy.value)
    peak = p.resolve_range(policy)
    diff = p.ref - p.test
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return MetricValue.ok(descriptor, math.inf, ["identical rasters: +inf"])
    return MetricValue.ok(descriptor, 10.0 * math.log10(peak * peak / mse))


def _window_kernel(window: SsimWindow, size: int, sigma: float) -> np.ndarray:
    if window == SsimWindow.UNIFORM:
        return np.full(size, 1.0 / size)
    offsets = np.arange(size, dtype=float) - (size - 1) / 2.0
    kernel = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _local_mean(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable windowed mean cropped to valid positions"""
    radius = kernel.size // 2
    out = image
    for axis in range(image.ndim):
        out = correlate1d(out, kernel, axis=axis, mode="reflect")
    crop = tuple(slice(radius, n - radius) for n in image.shape)
    return out[crop]


def ssim(p: RasterPair, window: SsimWindow = SsimWindow.GAUSSIAN, window_size: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03, covariance: Covariance = Covariance.POPULATION,
         data_range: Optional[DataRange] = None) -> MetricValue:
    """
    Mean structural similarity over valid window positions.

    Args:
        p: Raster pair
        window: Gaussian or Uniform weights
        window_size: Odd window width, no larger than any non-degenerate axis
        sigma: Gaussian window SD
        k1: Luminance constant, C1 = (k1 * L)^2
        k2: Contrast constant, C2 = (k2 * L)^2
        covariance: population, or sample (scaled by N / (N - 1))
        data_range: Range policy; defaults to the pair's own

    Returns:
        MetricValue: SSIM in [-1, 1]
    """
    window = SsimWindow(window)
    covariance = Covariance(covariance)
    policy = DataRange(data_range or p.data_range)
    params = {"window": int(window_size), "k1": float(k1), "k2": float(k2),
              "covariance": covariance.value, "data_range": policy.value}
    if window == SsimWindow.GAUSSIAN:
        params["sigma"] = float(sigma)
    descriptor = describe(MetricId.SSIM, window.value, **params)

    if window_size < 1 or window_size % 2 == 0:
        raise DomainError(f"window width must be odd and positive, got {window_size}")
    if not (k1 > 0 and k2 > 0):
        raise DomainError(f"k1 and k2 must be positive, got {k1}, {k2}")
    if window == SsimWindow.GAUSSIAN and not sigma > 0:
        raise DomainError(f"Gaussian window SD must be positive, got {sigma}")

    keep = [n for n in p.ref.shape if n > 1] or [1]
    x = p.ref.reshape(keep)
    y = p.test.reshape(keep)
    if window_size > min(x.shape):
        raise DomainError(f"window of width {window_size} exceeds the image extent {tuple(x.shape)}")
    peak = p.resolve_range(policy)

    kernel = _window_kernel(window, window_size, sigma)
    mu_x = _local_mean(x, kernel)
    mu_y = _local_mean(y, kernel)
    var_x = _local_mean(x * x, kernel) - mu_x * mu_x
    var_y = _local_mean(y * y, kernel) - mu_y * mu_y
    cov_xy = _local_mean(x * y, kernel) - mu_x * mu_y
    if covariance == Covariance.SAMPLE:
        count = window_size ** x.ndim
        if count > 1:
            scale = count / (count - 1.0)
            var_x, var_y, cov_xy = var_x * scale, var_y * scale, cov_xy * scale

    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * cov_xy + c2)
    denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return MetricValue.ok(descriptor, float(np.clip(np.mean(numerator / denominator), -1.0, 1.0)))
