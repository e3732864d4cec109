"""
Synthetic datasets and discrepancy phenomenon fixtures.

``random_dataset`` builds a seeded dataset for every task family. The
phenomenon fixtures each reproduce one mechanism by which two reasonable
conventions disagree, together with the taxonomy label the harness must
assign to it.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Set

import numpy as np

from modules.metrics.cluster import ClusteredData
from modules.metrics.core import ConventionDescriptor, MetricId, Quantity, TaskFamily, UnknownMetricError
from modules.metrics.correlate import VariablePair
from modules.metrics.imgqual import RasterPair
from modules.metrics.registry import describe, get_registry
from modules.metrics.regress import PairedSeries
from modules.metrics.segment import Mask
from modules.metrics.stattest import SampleGroups

from .datasets import ClassificationData, MaskPair, TaskData
from .discrepancy import classify_discrepancies
from .models import Classification, DiscrepancyRecord, RunConfig
from .runner import run_variants

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42


# ---------------------------------------------------------------------------
# Random datasets
# ---------------------------------------------------------------------------

def _random_classification(rng: np.random.Generator) -> ClassificationData:
    n, k = 200, 3
    y_true = rng.integers(0, k, n)
    noisy = rng.random(n) < 0.3
    y_pred = np.where(noisy, rng.integers(0, k, n), y_true)
    logits = rng.normal(0.0, 1.0, (n, k))
    logits[np.arange(n), y_pred] += 2.0
    probs = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
    return ClassificationData.of(y_true.tolist(), y_pred.tolist(), range(k), probs)


def _random_regression(rng: np.random.Generator) -> PairedSeries:
    y = rng.uniform(1.0, 20.0, 100)
    return PairedSeries(y, np.clip(0.8 * y + 2.0 + rng.normal(0.0, 1.5, y.size), 0.1, None))


def _random_clustering(rng: np.random.Generator) -> ClusteredData:
    means = np.array([[0.0, 0.0], [5.0, 5.0], [0.0, 6.0]])
    labels = np.repeat(np.arange(3), 30)
    X = means[labels] + rng.normal(0.0, 1.0, (labels.size, 2))
    return ClusteredData(X, labels, means + rng.normal(0.0, 0.25, means.shape))


def _random_correlation(rng: np.random.Generator) -> VariablePair:
    n = 60
    z = rng.normal(0.0, 1.0, n)
    x = 0.5 * z + rng.normal(0.0, 1.0, n)
    y = 0.6 * x + 0.4 * z + rng.normal(0.0, 1.0, n)
    return VariablePair(x, y, z.reshape(-1, 1))


def _random_stattest(rng: np.random.Generator) -> SampleGroups:
    return SampleGroups.of(rng.normal(10.0, 2.0, 10), rng.normal(11.0, 3.0, 10))


def _ball(shape, center, radius) -> np.ndarray:
    grid = np.indices(shape).astype(float)
    offsets = [(grid[i] - center[i]) ** 2 for i in range(len(shape))]
    return np.sum(offsets, axis=0) <= radius * radius


def _random_masks(rng: np.random.Generator, shape) -> MaskPair:
    size = np.array(shape, dtype=float)
    ref_center = size / 2.0 + rng.uniform(-1.0, 1.0, size.size)
    pred_center = ref_center + rng.uniform(-2.0, 2.0, size.size)
    radius = min(shape) / 4.0
    return MaskPair(Mask(_ball(shape, pred_center, radius * rng.uniform(0.8, 1.2))),
                    Mask(_ball(shape, ref_center, radius)))


def _random_rasters(rng: np.random.Generator, shape) -> RasterPair:
    axes = np.indices(shape).astype(float)
    pattern = 127.5 + 100.0 * np.sin(axes.sum(axis=0) / 4.0)
    ref = np.clip(pattern + rng.normal(0.0, 5.0, shape), 0.0, 255.0)
    test = np.clip(ref + rng.normal(0.0, 12.0, shape), 0.0, 255.0)
    return RasterPair(ref, test, declared_max=255.0)


def random_dataset(task, seed: int = DEFAULT_SEED) -> TaskData:
    """
    Seeded synthetic dataset of one task family

    Args:
        task: Task family
        seed: Generator seed

    Returns:
        TaskData: Container accepted by the harness for that task
    """
    task = TaskFamily(task)
    rng = np.random.default_rng(seed)
    builders: Dict[TaskFamily, Callable[[], TaskData]] = {
        TaskFamily.CLASSIFICATION: lambda: _random_classification(rng),
        TaskFamily.REGRESSION: lambda: _random_regression(rng),
        TaskFamily.CLUSTERING: lambda: _random_clustering(rng),
        TaskFamily.CORRELATION: lambda: _random_correlation(rng),
        TaskFamily.STATTEST: lambda: _random_stattest(rng),
        TaskFamily.SEGMENTATION2D: lambda: _random_masks(rng, (32, 32)),
        TaskFamily.SEGMENTATION3D: lambda: _random_masks(rng, (16, 16, 16)),
        TaskFamily.IMAGE2D: lambda: _random_rasters(rng, (32, 32)),
        TaskFamily.IMAGE3D: lambda: _random_rasters(rng, (16, 16, 16)),
    }
    return builders[task]()


# ---------------------------------------------------------------------------
# Phenomenon fixtures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Phenomenon:
    """A dataset plus the variants whose disagreement it demonstrates"""
    name: str
    description: str
    task: TaskFamily
    metric_id: MetricId
    expected: Classification
    build: Callable[[], TaskData]
    variants: Optional[Callable[[], List[ConventionDescriptor]]] = None
    # restrict the comparison to one quantity of a hypothesis test
    quantity: Optional[Quantity] = None

    def descriptors(self) -> List[ConventionDescriptor]:
        if self.variants is not None:
            return self.variants()
        return get_registry().register_variants(self.metric_id)


@dataclass(frozen=True)
class PhenomenonOutcome:
    name: str
    expected: Classification
    observed: Set[Classification]
    records: List[DiscrepancyRecord]

    @property
    def passed(self) -> bool:
        return self.observed == {self.expected}


def _imbalanced_confusion() -> ClassificationData:
    # confusion matrix [[90, 0], [9, 1]]
    y_true = [0] * 90 + [1] * 10
    y_pred = [0] * 90 + [0] * 9 + [1]
    return ClassificationData.of(y_true, y_pred, (0, 1))


def _skewed_groups() -> SampleGroups:
    return SampleGroups.of([1, 1, 2, 2, 3, 3, 4, 5, 9, 20], [2, 3, 3, 4, 4, 5, 5, 6, 6, 7])


def _constant_reference() -> RasterPair:
    rng = np.random.default_rng(DEFAULT_SEED)
    return RasterPair(np.full((32, 32), 0.5), rng.uniform(0.0, 1.0, (32, 32)), declared_max=1.0)


def _eight_bit_rasters() -> RasterPair:
    rng = np.random.default_rng(DEFAULT_SEED)
    ref = rng.integers(20, 201, (32, 32)).astype(float)
    test = np.clip(ref + rng.normal(0.0, 10.0, ref.shape), 0.0, 255.0)
    return RasterPair(ref, test, declared_max=255.0)


def _shifted_squares() -> MaskPair:
    ref = np.zeros((8, 8), dtype=bool)
    ref[2:6, 2:6] = True
    pred = np.zeros((8, 8), dtype=bool)
    pred[3:7, 2:7] = True
    return MaskPair(Mask(pred), Mask(ref))


PHENOMENA: Dict[str, Phenomenon] = {p.name: p for p in (
    Phenomenon("imbalanced_precision", "Precision of one imbalanced confusion matrix under every averaging",
               TaskFamily.CLASSIFICATION, MetricId.PRECISION, Classification.RD, _imbalanced_confusion),
    Phenomenon("affine_r_squared", "Coefficient of determination against squared correlation on y_hat = 2y",
               TaskFamily.REGRESSION, MetricId.R_SQUARED, Classification.ID,
               lambda: PairedSeries(np.array([1.0, 2.0, 3.0]), np.array([2.0, 4.0, 6.0])),
               lambda: [describe(MetricId.R_SQUARED, "CoefficientOfDetermination"),
                        describe(MetricId.R_SQUARED, "SquaredPearson")]),
    Phenomenon("skewed_levene", "Levene test centred on means against medians for a skewed group",
               TaskFamily.STATTEST, MetricId.LEVENE, Classification.ID, _skewed_groups,
               lambda: [describe(MetricId.LEVENE, "MeanCentered"), describe(MetricId.LEVENE, "MedianCentered")]),
    Phenomenon("u_statistic_convention", "Mann-Whitney statistic as U1, U2 or rank sum W under every p-value method",
               TaskFamily.STATTEST, MetricId.MANN_WHITNEY, Classification.RD,
               lambda: SampleGroups.of([1.1, 2.3, 3.8, 4.0, 5.6], [2.0, 6.1, 7.3, 8.4, 9.9, 10.2]),
               quantity=Quantity.STATISTIC),
    Phenomenon("ssim_constant_reference", "SSIM windows on a constant reference image",
               TaskFamily.IMAGE2D, MetricId.SSIM, Classification.ID, _constant_reference),
    Phenomenon("psnr_range_policy", "PSNR under declared, observed and unit dynamic ranges",
               TaskFamily.IMAGE2D, MetricId.PSNR, Classification.RD, _eight_bit_rasters),
    Phenomenon("iou_class_averaging", "IoU of foreground, background, their mean and pooled counts",
               TaskFamily.SEGMENTATION2D, MetricId.IOU, Classification.RD, _shifted_squares),
)}


def get_phenomenon(name: str) -> Phenomenon:
    try:
        return PHENOMENA[name]
    except KeyError:
        raise UnknownMetricError(f"unknown phenomenon '{name}' (known: {', '.join(sorted(PHENOMENA))})")


def run_phenomenon(name: str, config: Optional[RunConfig] = None) -> PhenomenonOutcome:
    """
    Sweep a phenomenon fixture and classify its pairs

    Args:
        name: Fixture name
        config: Run configuration; defaults for the fixture's task otherwise

    Returns:
        PhenomenonOutcome: Records and the set of non-NONE classifications observed
    """
    phenomenon = get_phenomenon(name)
    config = config or RunConfig(task=phenomenon.task)
    values = run_variants(phenomenon.build(), phenomenon.metric_id, config, phenomenon.descriptors())
    records = classify_discrepancies(values, config.tolerance, config.stochastic_tolerance)
    if phenomenon.quantity is not None:
        records = [r for r in records if r.quantity == phenomenon.quantity]
    observed = {r.classification for r in records if r.classification != Classification.NONE}
    outcome = PhenomenonOutcome(name, phenomenon.expected, observed, records)
    marker = "✅" if outcome.passed else "❌"
    logger.info(f"{marker} {name}: expected {phenomenon.expected.value}, "
                f"observed {sorted(c.value for c in observed) or ['NONE']}")
    return outcome
