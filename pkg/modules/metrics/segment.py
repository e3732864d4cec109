"""
Binary-mask segmentation metrics for 2D and 3D grids.

Overlap scores from voxel counts, boundary distances (Hausdorff and the
boundary F1 score) in physical units, and partition comparisons from the
pred x ref contingency table. A depth-1 3D mask behaves like its 2D slice;
other length-1 axes are kept, so their out-of-grid neighbours count as
background.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy.ndimage import binary_erosion, generate_binary_structure
from scipy.spatial import cKDTree

from .core import DomainError, MetricId, MetricValue, ReportingKind, ReportingMode, ShapeError
from .numeric import comb2
from .registry import describe

logger = logging.getLogger(__name__)


class OverlapVariant(str, Enum):
    FOREGROUND_ONLY = "ForegroundOnly"
    BACKGROUND_ONLY = "BackgroundOnly"
    CLASS_AVERAGED = "ClassAveraged"
    MICRO = "Micro"

    @property
    def reporting_mode(self) -> ReportingMode:
        return {
            OverlapVariant.FOREGROUND_ONLY: ReportingMode.binary_positive(1),
            OverlapVariant.BACKGROUND_ONLY: ReportingMode.binary_positive(0),
            OverlapVariant.CLASS_AVERAGED: ReportingMode.macro(),
            OverlapVariant.MICRO: ReportingMode.micro(),
        }[self]

    @classmethod
    def from_mode(cls, mode: ReportingMode) -> "OverlapVariant":
        if mode.kind == ReportingKind.BINARY_POSITIVE:
            return cls.FOREGROUND_ONLY if mode.class_index == 1 else cls.BACKGROUND_ONLY
        if mode.kind == ReportingKind.MACRO:
            return cls.CLASS_AVERAGED
        if mode.kind == ReportingKind.MICRO:
            return cls.MICRO
        raise DomainError(f"overlap metrics do not support reporting mode {mode}")


class EmptyPolicy(str, Enum):
    UNDEFINED = "undefined"
    ZERO = "zero"
    ONE = "one"


class HausdorffVariant(str, Enum):
    DIRECTED_AB = "DirectedAB"
    DIRECTED_BA = "DirectedBA"
    SYMMETRIC_MAX = "SymmetricMax"
    PERCENTILE = "Percentile"


class PointSet(str, Enum):
    BOUNDARY = "boundary"
    ALL_FOREGROUND = "all_foreground"


class Connectivity(str, Enum):
    FACE = "face"
    FULL = "full"


class PartitionKind(str, Enum):
    ADAPTED_RAND_ERROR = "AdaptedRandError"
    ADJUSTED_RAND_INDEX = "AdjustedRandIndex"
    VARIATION_OF_INFORMATION = "VariationOfInformation"


@dataclass(frozen=True)
class Mask:
    """Boolean 2D or 3D grid with per-axis physical spacing"""
    grid: np.ndarray
    spacing: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        grid = np.asarray(self.grid).astype(bool)
        if grid.ndim not in (2, 3) or min(grid.shape) < 1:
            raise ShapeError(f"mask must be a non-empty 2D or 3D grid, got shape {grid.shape}")
        spacing = tuple(float(s) for s in self.spacing) if self.spacing is not None else (1.0,) * grid.ndim
        if len(spacing) != grid.ndim:
            raise ShapeError(f"{len(spacing)} spacings for a {grid.ndim}D mask")
        if not all(math.isfinite(s) and s > 0 for s in spacing):
            raise DomainError(f"spacing must be finite and positive, got {spacing}")
        grid = grid.copy()
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "spacing", spacing)

    @property
    def ndim(self) -> int:
        return int(self.grid.ndim)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.grid.shape)

    @property
    def is_empty(self) -> bool:
        return not bool(self.grid.any())

    def without_depth_axis(self) -> Tuple[np.ndarray, np.ndarray]:
        """Grid and spacing, a depth-1 volume reduced to its single slice"""
        if self.ndim == 3 and self.grid.shape[0] == 1:
            return self.grid[0], np.array(self.spacing[1:])
        return self.grid, np.array(self.spacing)


@dataclass(frozen=True)
class BoundaryPointSet:
    """Boundary voxel coordinates in physical units (index x spacing)"""
    coordinates: np.ndarray

    def __len__(self) -> int:
        return int(self.coordinates.shape[0])

    @property
    def is_empty(self) -> bool:
        return len(self) == 0


@dataclass(frozen=True)
class OverlapReport:
    accuracy: MetricValue
    precision: MetricValue
    recall: MetricValue
    f1: MetricValue
    dice: MetricValue
    iou: MetricValue
    mean_iou: MetricValue

    def get(self, metric_id: MetricId) -> MetricValue:
        return {
            MetricId.SEG_ACCURACY: self.accuracy, MetricId.SEG_PRECISION: self.precision,
            MetricId.SEG_RECALL: self.recall, MetricId.SEG_F1: self.f1, MetricId.DICE: self.dice,
            MetricId.IOU: self.iou, MetricId.MEAN_IOU: self.mean_iou,
        }[MetricId(metric_id)]


def _check_shapes(a: Mask, b: Mask):
    if a.shape != b.shape:
        raise ShapeError(f"mask shapes differ: {a.shape} vs {b.shape}")


def _check_grids(a: Mask, b: Mask):
    _check_shapes(a, b)
    if a.spacing != b.spacing:
        raise DomainError(f"mask spacings differ: {a.spacing} vs {b.spacing}")


# ---------------------------------------------------------------------------
# Overlap
# ---------------------------------------------------------------------------

def _ratio(numerator: float, denominator: float, policy: EmptyPolicy) -> Optional[float]:
    if denominator > 0:
        return numerator / denominator
    if policy == EmptyPolicy.ZERO:
        return 0.0
    if policy == EmptyPolicy.ONE:
        return 1.0
    return None


def _class_scores(tp: float, fp: float, fn: float, policy: EmptyPolicy) -> dict:
    return {
        "precision": _ratio(tp, tp + fp, policy),
        "recall": _ratio(tp, tp + fn, policy),
        "dice": _ratio(2 * tp, 2 * tp + fp + fn, policy),
        "iou": _ratio(tp, tp + fp + fn, policy),
    }


def _mean(a: Optional[float], b: Optional[float]) -> Optional[float]:
    if a is None or b is None:
        return None
    return (a + b) / 2.0


def overlap_metrics(pred: Mask, ref: Mask, variant: OverlapVariant = OverlapVariant.FOREGROUND_ONLY,
                    empty_policy: EmptyPolicy = EmptyPolicy.UNDEFINED) -> OverlapReport:
    """
    Voxelwise overlap scores with foreground as the positive class.

    Args:
        pred: Predicted mask
        ref: Reference mask
        variant: ForegroundOnly, BackgroundOnly (background as positive),
            ClassAveraged (mean of both classes) or Micro (pooled)
        empty_policy: Value of a 0/0 ratio, e.g. Dice of two empty masks

    Returns:
        OverlapReport: Accuracy, precision, recall, F1, Dice, IoU, mean IoU
    """
    variant = OverlapVariant(variant)
    empty_policy = EmptyPolicy(empty_policy)
    _check_shapes(pred, ref)
    p, r = pred.grid, ref.grid
    tp = float(np.count_nonzero(p & r))
    fp = float(np.count_nonzero(p & ~r))
    fn = float(np.count_nonzero(~p & r))
    tn = float(p.size) - tp - fp - fn

    foreground = _class_scores(tp, fp, fn, empty_policy)
    background = _class_scores(tn, fn, fp, empty_policy)
    if variant == OverlapVariant.FOREGROUND_ONLY:
        scores = foreground
    elif variant == OverlapVariant.BACKGROUND_ONLY:
        scores = background
    elif variant == OverlapVariant.CLASS_AVERAGED:
        scores = {name: _mean(foreground[name], background[name]) for name in foreground}
    else:
        scores = _class_scores(tp + tn, fp + fn, fn + fp, empty_policy)

    mode = variant.reporting_mode
    params = {"empty_policy": empty_policy.value}

    def value(metric_id: MetricId, number: Optional[float], reporting: ReportingMode = mode) -> MetricValue:
        return MetricValue.from_optional(describe(metric_id, "Overlap", reporting, **params), number,
                                         "empty class under empty_policy=undefined")

    return OverlapReport(
        accuracy=MetricValue.ok(describe(MetricId.SEG_ACCURACY, "Overlap"), (tp + tn) / p.size),
        precision=value(MetricId.SEG_PRECISION, scores["precision"]),
        recall=value(MetricId.SEG_RECALL, scores["recall"]),
        f1=value(MetricId.SEG_F1, scores["dice"]),
        dice=value(MetricId.DICE, scores["dice"]),
        iou=value(MetricId.IOU, scores["iou"]),
        mean_iou=value(MetricId.MEAN_IOU, _mean(foreground["iou"], background["iou"]), ReportingMode.macro()),
    )


# ---------------------------------------------------------------------------
# Boundaries and distances
# ---------------------------------------------------------------------------

def boundary_extract(m: Mask, connectivity: Connectivity = Connectivity.FACE) -> BoundaryPointSet:
    """
    Foreground voxels with at least one background or out-of-grid neighbour.

    Face connectivity checks the 4 (2D) or 6 (3D) axis neighbours; full
    connectivity also checks the diagonal ones.
    """
    connectivity = Connectivity(connectivity)
    grid, spacing = m.without_depth_axis()
    rank = 1 if connectivity == Connectivity.FACE else grid.ndim
    structure = generate_binary_structure(grid.ndim, rank)
    interior = binary_erosion(grid, structure=structure, border_value=0)
    boundary = grid & ~interior
    return BoundaryPointSet(np.argwhere(boundary) * spacing)


def foreground_points(m: Mask) -> BoundaryPointSet:
    grid, spacing = m.without_depth_axis()
    return BoundaryPointSet(np.argwhere(grid) * spacing)


def _points(m: Mask, point_set: PointSet, connectivity: Connectivity) -> BoundaryPointSet:
    if point_set == PointSet.BOUNDARY:
        return boundary_extract(m, connectivity)
    return foreground_points(m)


def nearest_distances(source: BoundaryPointSet, target: BoundaryPointSet) -> np.ndarray:
    """Distance from each source point to its nearest target point"""
    distances, _ = cKDTree(target.coordinates).query(source.coordinates)
    return np.asarray(distances, dtype=float)


def hausdorff(a: Mask, b: Mask, variant: HausdorffVariant = HausdorffVariant.SYMMETRIC_MAX,
              point_set: PointSet = PointSet.BOUNDARY, connectivity: Connectivity = Connectivity.FACE,
              q: float = 95.0) -> MetricValue:
    """
    Hausdorff distance between two masks in physical units.

    Percentile replaces the max by the q-th percentile of the pooled
    directed nearest-point distances of both directions.

    Returns:
        MetricValue: Undefined when either point set is empty
    """
    variant = HausdorffVariant(variant)
    point_set = PointSet(point_set)
    connectivity = Connectivity(connectivity)
    _check_grids(a, b)
    params = {"point_set": point_set.value}
    if point_set == PointSet.BOUNDARY:
        params["connectivity"] = connectivity.value
    if variant == HausdorffVariant.PERCENTILE:
        if not 0.0 <= q <= 100.0:
            raise DomainError(f"percentile must lie in [0, 100], got {q}")
        params["q"] = float(q)
    descriptor = describe(MetricId.HAUSDORFF, variant.value, **params)

    pa = _points(a, point_set, connectivity)
    pb = _points(b, point_set, connectivity)
    if pa.is_empty or pb.is_empty:
        return MetricValue.undefined(descriptor, "empty point set")
    ab = nearest_distances(pa, pb)
    ba = nearest_distances(pb, pa)
    if variant == HausdorffVariant.DIRECTED_AB:
        value = float(ab.max())
    elif variant == HausdorffVariant.DIRECTED_BA:
        value = float(ba.max())
    elif variant == HausdorffVariant.SYMMETRIC_MAX:
        value = max(float(ab.max()), float(ba.max()))
    else:
        value = float(np.percentile(np.concatenate((ab, ba)), q))
    return MetricValue.ok(descriptor, value)


def boundary_f1(pred: Mask, ref: Mask, theta: float = 1.0,
                connectivity: Connectivity = Connectivity.FACE) -> MetricValue:
    """Harmonic mean of boundary precision and recall at tolerance theta (physical units)"""
    connectivity = Connectivity(connectivity)
    _check_grids(pred, ref)
    if not theta >= 0:
        raise DomainError(f"tolerance must be non-negative, got {theta}")
    descriptor = describe(MetricId.BOUNDARY_F1, "Tolerance", theta=float(theta), connectivity=connectivity.value)
    bp = boundary_extract(pred, connectivity)
    br = boundary_extract(ref, connectivity)
    if bp.is_empty or br.is_empty:
        return MetricValue.undefined(descriptor, "empty boundary")
    precision = float(np.mean(nearest_distances(bp, br) <= theta))
    recall = float(np.mean(nearest_distances(br, bp) <= theta))
    if precision + recall == 0.0:
        return MetricValue.ok(descriptor, 0.0)
    return MetricValue.ok(descriptor, 2.0 * precision * recall / (precision + recall))


# ---------------------------------------------------------------------------
# Partition comparison
# ---------------------------------------------------------------------------

def contingency_table(pred: Mask, ref: Mask) -> np.ndarray:
    """Counts n_ij of voxels in pred segment i and ref segment j; empty segments dropped"""
    _check_shapes(pred, ref)
    counts = np.bincount(pred.grid.ravel().astype(np.int64) * 2 + ref.grid.ravel().astype(np.int64),
                         minlength=4).reshape(2, 2).astype(float)
    counts = counts[counts.sum(axis=1) > 0]
    return counts[:, counts.sum(axis=0) > 0]


def _entropy(counts: np.ndarray, n: float) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def partition_metrics(pred: Mask, ref: Mask,
                      kind: PartitionKind = PartitionKind.ADJUSTED_RAND_INDEX) -> MetricValue:
    """
    Compare the {foreground, background} partitions of two masks.

    AdaptedRandError is 1 minus the pair-counting F-measure, with the
    reference as truth and no label ignored. VariationOfInformation is in nats.
    """
    kind = PartitionKind(kind)
    table = contingency_table(pred, ref)
    n = float(table.sum())
    rows = table.sum(axis=1)
    cols = table.sum(axis=0)

    if kind == PartitionKind.ADAPTED_RAND_ERROR:
        descriptor = describe(MetricId.ADAPTED_RAND_ERROR, "Standard")
        together = float(np.sum(table * table)) - n
        pred_pairs = float(np.sum(rows * rows)) - n
        ref_pairs = float(np.sum(cols * cols)) - n
        if pred_pairs == 0.0 or ref_pairs == 0.0:
            return MetricValue.undefined(descriptor, "no voxel pairs share a segment")
        precision = together / pred_pairs
        recall = together / ref_pairs
        if precision + recall == 0.0:
            return MetricValue.ok(descriptor, 1.0)
        return MetricValue.ok(descriptor, 1.0 - 2.0 * precision * recall / (precision + recall))

    if kind == PartitionKind.ADJUSTED_RAND_INDEX:
        descriptor = describe(MetricId.ADJUSTED_RAND_INDEX, "Standard")
        index = float(np.sum(comb2(table)))
        sum_rows = float(np.sum(comb2(rows)))
        sum_cols = float(np.sum(comb2(cols)))
        expected = sum_rows * sum_cols / float(comb2(n))
        maximum = (sum_rows + sum_cols) / 2.0
        if maximum - expected == 0.0:
            identical = table.shape[0] == table.shape[1] and np.count_nonzero(table) == table.shape[0]
            if identical:
                return MetricValue.ok(descriptor, 1.0, ["identical partitions with a degenerate chance term"])
            return MetricValue.undefined(descriptor, "degenerate chance term")
        return MetricValue.ok(descriptor, (index - expected) / (maximum - expected))

    descriptor = describe(MetricId.VARIATION_OF_INFORMATION, "Standard")
    joint = _entropy(table.ravel(), n)
    voi = 2.0 * joint - _entropy(rows, n) - _entropy(cols, n)
    return MetricValue.ok(descriptor, max(0.0, voi))
