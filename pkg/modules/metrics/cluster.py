"""
Internal clustering validity indices.

Clustering is never fitted here: assignments (and optionally centers) are
inputs. Distances are Euclidean throughout.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .core import DomainError, MetricError, MetricId, MetricValue, ShapeError
from .registry import describe

logger = logging.getLogger(__name__)


class WcssVariant(str, Enum):
    RECOMPUTED_MEANS = "RecomputedMeans"
    PROVIDED_CENTERS = "ProvidedCenters"


class SingletonPolicy(str, Enum):
    ZERO = "zero"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class ClusteredData:
    """
    Feature matrix with cluster assignments.

    ``centers`` rows follow ``cluster_ids`` (the sorted distinct labels).
    """
    X: np.ndarray
    labels: np.ndarray
    centers: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ShapeError(f"X must be an n x d matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DomainError("X must be finite")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.size != X.shape[0]:
            raise ShapeError(f"{labels.size} labels for {X.shape[0]} points")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        if self.centers is not None:
            centers = np.asarray(self.centers, dtype=float)
            if centers.ndim == 1:
                centers = centers.reshape(-1, 1)
            if centers.shape != (self.k, X.shape[1]):
                raise ShapeError(f"centers must be {self.k} x {X.shape[1]}, got {centers.shape}")
            centers.setflags(write=False)
            object.__setattr__(self, "centers", centers)

    @property
    def cluster_ids(self) -> np.ndarray:
        return np.unique(self.labels)

    @property
    def k(self) -> int:
        return int(self.cluster_ids.size)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    def membership(self) -> np.ndarray:
        """n x k one-hot assignment matrix"""
        return (self.labels[:, None] == self.cluster_ids[None, :]).astype(float)

    def centroids(self) -> np.ndarray:
        onehot = self.membership()
        return (onehot.T @ self.X) / onehot.sum(axis=0)[:, None]

    def assigned_index(self) -> np.ndarray:
        return np.searchsorted(self.cluster_ids, self.labels)


def _require_partition(c: ClusteredData):
    if c.k < 2:
        raise MetricError(f"index needs at least two clusters, got {c.k}")
    if c.n <= c.k:
        raise MetricError(f"index needs more points than clusters (n={c.n}, k={c.k})")


def silhouette(c: ClusteredData, singleton: SingletonPolicy = SingletonPolicy.ZERO) -> MetricValue:
    """
    Mean silhouette width with Euclidean distances.

    Points of singleton clusters score 0 (``zero``) or are left out of the
    mean (``exclude``).
    """
    singleton = SingletonPolicy(singleton)
    _require_partition(c)
    descriptor = describe(MetricId.SILHOUETTE, "Euclidean", singleton=singleton.value)
    distances = squareform(pdist(c.X))
    onehot = c.membership()
    sizes = onehot.sum(axis=0)
    sums = distances @ onehot
    own = c.assigned_index()
    rows = np.arange(c.n)
    own_size = sizes[own]

    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(own_size > 1, sums[rows, own] / (own_size - 1), 0.0)
        mean_other = sums / sizes[None, :]
    mean_other[rows, own] = np.inf
    b = mean_other.min(axis=1)
    denominator = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denominator > 0, (b - a) / denominator, 0.0)
    is_singleton = own_size == 1
    s[is_singleton] = 0.0
    if singleton == SingletonPolicy.EXCLUDE:
        if np.all(is_singleton):
            return MetricValue.undefined(descriptor, "every cluster is a singleton")
        s = s[~is_singleton]
    return MetricValue.ok(descriptor, float(np.mean(s)))


def davies_bouldin(c: ClusteredData) -> MetricValue:
    """Mean over clusters of the worst (S_i + S_j) / d(c_i, c_j)"""
    _require_partition(c)
    descriptor = describe(MetricId.DAVIES_BOULDIN, "Standard")
    centroids = c.centroids()
    own = c.assigned_index()
    spread_per_point = np.linalg.norm(c.X - centroids[own], axis=1)
    spread = np.bincount(own, weights=spread_per_point, minlength=c.k) / np.bincount(own, minlength=c.k)
    separation = cdist(centroids, centroids)
    off_diagonal = ~np.eye(c.k, dtype=bool)
    if np.any(separation[off_diagonal] == 0):
        return MetricValue.undefined(descriptor, "coincident centroids")
    ratio = (spread[:, None] + spread[None, :]) / np.where(off_diagonal, separation, 1.0)
    ratio[~off_diagonal] = -np.inf
    return MetricValue.ok(descriptor, float(np.mean(ratio.max(axis=1))))


def calinski_harabasz(c: ClusteredData) -> MetricValue:
    """(BGSS / (k - 1)) / (WGSS / (n - k))"""
    _require_partition(c)
    descriptor = describe(MetricId.CALINSKI_HARABASZ, "Standard")
    centroids = c.centroids()
    sizes = c.membership().sum(axis=0)
    grand = c.X.mean(axis=0)
    between = float(np.sum(sizes * np.sum((centroids - grand) ** 2, axis=1)))
    within = float(np.sum((c.X - centroids[c.assigned_index()]) ** 2))
    if within == 0.0:
        return MetricValue.undefined(descriptor, "zero within-cluster dispersion")
    return MetricValue.ok(descriptor, (between / (c.k - 1)) / (within / (c.n - c.k)))


def wcss(c: ClusteredData, variant: WcssVariant = WcssVariant.RECOMPUTED_MEANS) -> MetricValue:
    """Sum of squared distances from each point to its cluster's center"""
    variant = WcssVariant(variant)
    descriptor = describe(MetricId.WCSS, variant.value)
    if variant == WcssVariant.PROVIDED_CENTERS:
        if c.centers is None:
            raise MetricError("ProvidedCenters needs centers in the clustered data")
        centers = c.centers
    else:
        centers = c.centroids()
    residual = c.X - centers[c.assigned_index()]
    return MetricValue.ok(descriptor, float(np.sum(residual * residual)))
