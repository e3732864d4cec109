"""
Correlation and dependence measures.

Linear and rank correlations, three robust estimators (biweight
midcorrelation, percentage bend, Mahalanobis-pruned Spearman), histogram
mutual information, distance correlation and residual partial correlation.
No p-values are reported here.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .core import DomainError, MetricError, MetricId, MetricValue, ShapeError
from .numeric import as_float_array, average_ranks, check_same_length
from .registry import describe

logger = logging.getLogger(__name__)


class RankLinearKind(str, Enum):
    PEARSON = "Pearson"
    SPEARMAN = "Spearman"
    KENDALL_TAU_A = "KendallTauA"
    KENDALL_TAU_B = "KendallTauB"


class RobustKind(str, Enum):
    BIWEIGHT = "BiweightMidcorrelation"
    PERCENTAGE_BEND = "PercentageBend"
    SHEPHERD = "Shepherd"


class BiweightCentering(str, Enum):
    MEDIAN_MAD = "MedianMad"
    MEAN_SD = "MeanSd"


class DependenceKind(str, Enum):
    MUTUAL_INFORMATION = "MutualInformation"
    DISTANCE_CORRELATION = "DistanceCorrelation"


class InformationUnits(str, Enum):
    NATS = "nats"
    BITS = "bits"


@dataclass(frozen=True)
class VariablePair:
    """Paired samples x, y (n >= 3) with optional n x m covariates Z"""
    x: np.ndarray
    y: np.ndarray
    Z: Optional[np.ndarray] = None

    def __post_init__(self):
        x = as_float_array(self.x, "x", min_length=3)
        y = as_float_array(self.y, "y", min_length=3)
        check_same_length(x, y, "x and y")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.Z is not None:
            Z = np.asarray(self.Z, dtype=float)
            if Z.ndim == 1:
                Z = Z.reshape(-1, 1)
            if Z.ndim != 2 or Z.shape[0] != x.size:
                raise ShapeError(f"covariates must be an n x m matrix with n={x.size}, got shape {Z.shape}")
            if not np.all(np.isfinite(Z)):
                raise DomainError("covariates must be finite")
            Z.setflags(write=False)
            object.__setattr__(self, "Z", Z)

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def covariate_count(self) -> int:
        return 0 if self.Z is None else int(self.Z.shape[1])


def _pearson(a: np.ndarray, b: np.ndarray) -> Optional[float]:
    a = a - np.mean(a)
    b = b - np.mean(b)
    denominator = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if denominator == 0.0:
        return None
    return float(np.clip(float(np.dot(a, b)) / denominator, -1.0, 1.0))


def _spearman(a: np.ndarray, b: np.ndarray) -> Optional[float]:
    return _pearson(average_ranks(a), average_ranks(b))


def _kendall(x: np.ndarray, y: np.ndarray, tau_b: bool) -> Optional[float]:
    upper = np.triu_indices(x.size, k=1)
    sx = np.sign(np.subtract.outer(x, x))[upper]
    sy = np.sign(np.subtract.outer(y, y))[upper]
    score = float(np.sum(sx * sy))
    pairs = float(sx.size)
    if not tau_b:
        return score / pairs
    tied_x = float(np.sum(sx == 0))
    tied_y = float(np.sum(sy == 0))
    denominator = math.sqrt((pairs - tied_x) * (pairs - tied_y))
    if denominator == 0.0:
        return None
    return float(np.clip(score / denominator, -1.0, 1.0))


def rank_linear_corr(v: VariablePair, kind: RankLinearKind = RankLinearKind.PEARSON) -> MetricValue:
    """
    Pearson, Spearman or Kendall correlation.

    Args:
        v: Paired samples
        kind: Pearson, Spearman, KendallTauA or KendallTauB

    Returns:
        MetricValue: Undefined for constant input (TauB: no untied pairs)
    """
    kind = RankLinearKind(kind)
    if kind == RankLinearKind.PEARSON:
        descriptor = describe(MetricId.PEARSON, "Standard")
        return MetricValue.from_optional(descriptor, _pearson(v.x, v.y), "constant input")
    if kind == RankLinearKind.SPEARMAN:
        descriptor = describe(MetricId.SPEARMAN, "Standard")
        return MetricValue.from_optional(descriptor, _spearman(v.x, v.y), "constant input")
    tau_b = kind == RankLinearKind.KENDALL_TAU_B
    descriptor = describe(MetricId.KENDALL_TAU, "TauB" if tau_b else "TauA")
    return MetricValue.from_optional(descriptor, _kendall(v.x, v.y, tau_b), "no untied pairs")


# ---------------------------------------------------------------------------
# Robust correlations
# ---------------------------------------------------------------------------

def _biweight_scores(a: np.ndarray, c: float, centering: BiweightCentering) -> Optional[np.ndarray]:
    if centering == BiweightCentering.MEDIAN_MAD:
        center = float(np.median(a))
        scale = float(np.median(np.abs(a - center)))
    else:
        center = float(np.mean(a))
        scale = float(np.std(a, ddof=1))
    if scale == 0.0:
        return None
    u = (a - center) / (c * scale)
    w = np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 2, 0.0)
    scores = (a - center) * w
    norm = math.sqrt(float(np.dot(scores, scores)))
    if norm == 0.0:
        return None
    return scores / norm


def _biweight_midcorrelation(x: np.ndarray, y: np.ndarray, c: float,
                             centering: BiweightCentering) -> Optional[float]:
    sx = _biweight_scores(x, c, centering)
    sy = _biweight_scores(y, c, centering)
    if sx is None or sy is None:
        return None
    return float(np.clip(float(np.dot(sx, sy)), -1.0, 1.0))


def _percentage_bend(x: np.ndarray, y: np.ndarray, beta: float) -> Optional[float]:
    X = np.column_stack((x, y))
    n = X.shape[0]
    deviation = X - np.median(X, axis=0)
    m = int((1.0 - beta) * n)
    if m < 1:
        raise DomainError(f"bend constant {beta} leaves no observations")
    omega = np.sort(np.abs(deviation), axis=0)[m - 1, :]
    if np.any(omega == 0):
        return None
    psi = deviation / omega
    bent = np.zeros_like(X)
    for column in range(2):
        low = psi[:, column] < -1
        high = psi[:, column] > 1
        kept = n - int(low.sum()) - int(high.sum())
        if kept == 0:
            return None
        inner = np.where(low | high, 0.0, X[:, column])
        location = (float(np.sum(inner)) + omega[column] * (int(high.sum()) - int(low.sum()))) / kept
        bent[:, column] = np.clip((X[:, column] - location) / omega[column], -1.0, 1.0)
    a, b = bent[:, 0], bent[:, 1]
    denominator = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if denominator == 0.0:
        return None
    return float(np.clip(float(np.dot(a, b)) / denominator, -1.0, 1.0))


def _shepherd(x: np.ndarray, y: np.ndarray, quantile: float) -> Optional[float]:
    if not 0.0 < quantile < 1.0:
        raise DomainError(f"pruning quantile must lie in (0, 1), got {quantile}")
    X = np.column_stack((x, y))
    centered = X - X.mean(axis=0)
    precision = np.linalg.pinv(np.cov(X, rowvar=False))
    distance2 = np.einsum("ij,jk,ik->i", centered, precision, centered)
    # chi-square(2) quantile in closed form
    threshold = -2.0 * math.log(1.0 - quantile)
    keep = distance2 <= threshold
    if int(keep.sum()) < 3:
        return None
    return _spearman(x[keep], y[keep])


def robust_corr(v: VariablePair, kind: RobustKind = RobustKind.BIWEIGHT, c: float = 9.0,
                centering: BiweightCentering = BiweightCentering.MEDIAN_MAD, beta: float = 0.2,
                quantile: float = 0.975) -> MetricValue:
    """
    Outlier-resistant correlation.

    Biweight scale is the unscaled median absolute deviation. Shepherd
    pruning uses the classical covariance with no bootstrap, so the result
    is deterministic.

    Args:
        v: Paired samples (n >= 5)
        kind: BiweightMidcorrelation, PercentageBend or Shepherd
        c: Biweight tuning constant
        centering: MedianMad or MeanSd for the biweight
        beta: Percentage-bend constant
        quantile: Chi-square(2) quantile above which points are pruned

    Returns:
        MetricValue: Undefined on zero scale
    """
    kind = RobustKind(kind)
    if v.n < 5:
        raise MetricError(f"robust correlation needs n >= 5, got {v.n}")
    if kind == RobustKind.BIWEIGHT:
        centering = BiweightCentering(centering)
        if not c > 0:
            raise DomainError(f"biweight constant must be positive, got {c}")
        descriptor = describe(MetricId.BIWEIGHT_MIDCORRELATION, centering.value, c=float(c))
        return MetricValue.from_optional(descriptor, _biweight_midcorrelation(v.x, v.y, c, centering), "zero scale")
    if kind == RobustKind.PERCENTAGE_BEND:
        if not 0.0 <= beta <= 0.5:
            raise DomainError(f"bend constant must lie in [0, 0.5], got {beta}")
        descriptor = describe(MetricId.PERCENTAGE_BEND, "Wilcox", beta=float(beta))
        return MetricValue.from_optional(descriptor, _percentage_bend(v.x, v.y, beta), "zero bend scale")
    descriptor = describe(MetricId.SHEPHERD, "MahalanobisPruned", quantile=float(quantile))
    return MetricValue.from_optional(descriptor, _shepherd(v.x, v.y, quantile), "fewer than 3 points after pruning")


# ---------------------------------------------------------------------------
# Dependence
# ---------------------------------------------------------------------------

def _mutual_information(x: np.ndarray, y: np.ndarray, bins: int) -> Optional[float]:
    joint, _, _ = np.histogram2d(x, y, bins=bins)
    if int(np.count_nonzero(joint)) < 2:
        return None
    p = joint / joint.sum()
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    occupied = p > 0
    mi = float(np.sum(p[occupied] * np.log(p[occupied] / (px @ py)[occupied])))
    return max(0.0, mi)


def _double_centered(values: np.ndarray) -> np.ndarray:
    d = squareform(pdist(values.reshape(-1, 1)))
    return d - d.mean(axis=0)[None, :] - d.mean(axis=1)[:, None] + d.mean()


def _distance_correlation(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    A = _double_centered(x)
    B = _double_centered(y)
    n2 = float(x.size) ** 2
    dcov2_xy = max(0.0, float(np.vdot(A, B)) / n2)
    dcov2_xx = float(np.vdot(A, A)) / n2
    dcov2_yy = float(np.vdot(B, B)) / n2
    if dcov2_xx <= 0.0 or dcov2_yy <= 0.0:
        return None
    return min(1.0, math.sqrt(dcov2_xy) / math.sqrt(math.sqrt(dcov2_xx) * math.sqrt(dcov2_yy)))


def dependence(v: VariablePair, kind: DependenceKind = DependenceKind.MUTUAL_INFORMATION,
               bins: Optional[int] = None, units: InformationUnits = InformationUnits.NATS) -> MetricValue:
    """
    Histogram mutual information or distance correlation.

    Mutual information uses an equal-width 2-D histogram with ``bins``
    per axis, defaulting to ceil(sqrt(n)).
    """
    kind = DependenceKind(kind)
    if kind == DependenceKind.DISTANCE_CORRELATION:
        descriptor = describe(MetricId.DISTANCE_CORRELATION, "Standard")
        return MetricValue.from_optional(descriptor, _distance_correlation(v.x, v.y), "constant input")

    units = InformationUnits(units)
    descriptor = describe(MetricId.MUTUAL_INFORMATION, "Histogram", bins=bins, units=units.value)
    effective_bins = int(math.ceil(math.sqrt(v.n))) if bins is None else int(bins)
    if effective_bins < 2:
        raise DomainError(f"mutual information needs at least 2 bins, got {effective_bins}")
    mi = _mutual_information(v.x, v.y, effective_bins)
    if mi is None:
        return MetricValue.undefined(descriptor, "single occupied histogram cell")
    if units == InformationUnits.BITS:
        mi /= math.log(2.0)
    return MetricValue.ok(descriptor, mi)


def partial_corr(v: VariablePair) -> MetricValue:
    """
    Pearson correlation of the least-squares residuals of x and y on Z.

    The regression includes an intercept. With no covariates the result
    equals Pearson(x, y).

    Raises:
        DomainError: Rank-deficient covariates or n <= m + 2
    """
    descriptor = describe(MetricId.PARTIAL_CORRELATION, "Residual")
    m = v.covariate_count
    if m == 0:
        return MetricValue.from_optional(descriptor, _pearson(v.x, v.y), "constant input")
    if v.n <= m + 2:
        raise DomainError(f"partial correlation needs n > m + 2 (n={v.n}, m={m})")
    design = np.column_stack((np.ones(v.n), v.Z))
    if np.linalg.matrix_rank(design) < m + 1:
        raise DomainError("covariate matrix is rank deficient")
    coef, _, _, _ = np.linalg.lstsq(design, np.column_stack((v.x, v.y)), rcond=None)
    residuals = np.column_stack((v.x, v.y)) - design @ coef
    return MetricValue.from_optional(descriptor, _pearson(residuals[:, 0], residuals[:, 1]),
                                     "constant residuals")
