"""
Descriptor dispatch: compute one convention variant of one metric.

Each handler translates a ConventionDescriptor into a call of the
metric's registered implementation (loaded lazily through the registry)
and the result is relabelled with the requested descriptor.
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Union

from modules.metrics.cluster import ClusteredData, SingletonPolicy, WcssVariant
from modules.metrics.core import (
    ConventionDescriptor, FillPolicy, MetricError, MetricId, MetricValue, Quantity, ReportingKind, TestResult,
)
from modules.metrics.correlate import (
    BiweightCentering, DependenceKind, InformationUnits, RankLinearKind, RobustKind, VariablePair,
)
from modules.metrics.classify import BalancedAccuracyVariant, MccVariant
from modules.metrics.imgqual import Covariance, DataRange, RasterPair, SsimWindow
from modules.metrics.registry import get_registry
from modules.metrics.regress import MapeUnits, PairedSeries, R2Variant, ZeroPolicy
from modules.metrics.segment import (
    Connectivity, EmptyPolicy, HausdorffVariant, OverlapVariant, PartitionKind, PointSet,
)
from modules.metrics.stattest import (
    DistributionTestKind, KsMethod, LeveneCenter, PermutationMethod, PermutationStatistic, PMethod, RankTestKind,
    SampleGroups, Tail, TTestKind, VarianceTestKind,
)

from .datasets import ClassificationData, MaskPair
from .models import RunConfig

logger = logging.getLogger(__name__)

Result = Union[MetricValue, TestResult]
Handler = Callable[[Callable, ConventionDescriptor, Any, RunConfig], Result]

_HANDLERS: Dict[MetricId, Handler] = {}


def _handles(*metric_ids: MetricId):
    def register(handler: Handler) -> Handler:
        for metric_id in metric_ids:
            _HANDLERS[metric_id] = handler
        return handler
    return register


def _expect(data: Any, kind: type, metric_id: MetricId):
    if not isinstance(data, kind):
        raise MetricError(f"{metric_id.value} needs {kind.__name__} input, got {type(data).__name__}")
    return data


def _tail(d: ConventionDescriptor) -> Tail:
    return Tail(d.param("tail", Tail.TWO_SIDED.value))


# === Classification ===

@_handles(MetricId.ACCURACY, MetricId.COHEN_KAPPA)
def _cm_only(fn, d, data, config):
    return fn(_expect(data, ClassificationData, d.metric_id).cm)


@_handles(MetricId.BALANCED_ACCURACY)
def _balanced_accuracy(fn, d, data, config):
    data = _expect(data, ClassificationData, d.metric_id)
    if d.formula_family == "ChanceCorrected":
        variant = BalancedAccuracyVariant.CHANCE_CORRECTED
    elif d.reporting_mode.kind == ReportingKind.WEIGHTED:
        variant = BalancedAccuracyVariant.WEIGHTED_RECALL
    else:
        variant = BalancedAccuracyVariant.MACRO_RECALL
    return fn(data.cm, variant, FillPolicy(config.fill_policy))


@_handles(MetricId.PRECISION, MetricId.RECALL, MetricId.F1, MetricId.F_BETA, MetricId.JACCARD)
def _prf(fn, d, data, config):
    data = _expect(data, ClassificationData, d.metric_id)
    return fn(data.cm, d.metric_id, d.reporting_mode, beta=d.param("beta", 2.0),
              fill_policy=FillPolicy(config.fill_policy))


@_handles(MetricId.MCC)
def _mcc(fn, d, data, config):
    data = _expect(data, ClassificationData, d.metric_id)
    mode = d.reporting_mode
    if d.formula_family == "Generalized":
        return fn(data.cm, MccVariant.GENERALIZED)
    if mode.kind == ReportingKind.MACRO:
        return fn(data.cm, MccVariant.PER_CLASS_ONE_VS_REST_MACRO)
    variant = MccVariant.BINARY_POSITIVE if mode.kind == ReportingKind.BINARY_POSITIVE else MccVariant.PER_CLASS
    return fn(data.cm, variant, positive=mode.class_index)


def _scores(data: ClassificationData, metric_id: MetricId):
    if data.scores is None:
        raise MetricError(f"{metric_id.value} needs score columns (p_<label>)")
    return data.scores


@_handles(MetricId.LOG_LOSS)
def _log_loss(fn, d, data, config):
    data = _expect(data, ClassificationData, d.metric_id)
    return fn(data.y_true, _scores(data, d.metric_id), data.labels, eps=d.param("eps", 1e-15))


@_handles(MetricId.ROC_AUC)
def _roc_auc(fn, d, data, config):
    data = _expect(data, ClassificationData, d.metric_id)
    return fn(data.y_true, _scores(data, d.metric_id), data.labels, d.reporting_mode)


@_handles(MetricId.G_MEAN)
def _g_mean(fn, d, data, config):
    return fn(_expect(data, ClassificationData, d.metric_id).cm, FillPolicy(config.fill_policy))


# === Regression ===

@_handles(MetricId.MAE, MetricId.MSE, MetricId.RMSE, MetricId.MEDAE)
def _basic_errors(fn, d, data, config):
    return getattr(fn(_expect(data, PairedSeries, d.metric_id)), d.metric_id.value)


@_handles(MetricId.MAPE)
def _mape(fn, d, data, config):
    return fn(_expect(data, PairedSeries, d.metric_id), ZeroPolicy(d.param("zero_policy", "error")),
              MapeUnits(d.param("units", "fraction")), epsilon=d.param("epsilon", 2.220446049250313e-16))


@_handles(MetricId.MSLE)
def _msle(fn, d, data, config):
    return fn(_expect(data, PairedSeries, d.metric_id))


@_handles(MetricId.R_SQUARED, MetricId.EXPLAINED_VARIANCE)
def _variance_explained(fn, d, data, config):
    s = _expect(data, PairedSeries, d.metric_id)
    if d.metric_id == MetricId.EXPLAINED_VARIANCE:
        return fn(s).explained_variance
    return fn(s, R2Variant(d.formula_family), predictors=d.param("predictors", 1)).r_squared


@_handles(MetricId.TWEEDIE_DEVIANCE, MetricId.HUBER)
def _robust_losses(fn, d, data, config):
    s = _expect(data, PairedSeries, d.metric_id)
    if d.metric_id == MetricId.HUBER:
        return fn(s, huber_delta=d.param("delta", 1.0)).huber
    return fn(s, tweedie_power=d.param("power", 0.0)).tweedie_deviance


# === Clustering ===

@_handles(MetricId.SILHOUETTE)
def _silhouette(fn, d, data, config):
    return fn(_expect(data, ClusteredData, d.metric_id), SingletonPolicy(d.param("singleton", "zero")))


@_handles(MetricId.DAVIES_BOULDIN, MetricId.CALINSKI_HARABASZ)
def _cluster_index(fn, d, data, config):
    return fn(_expect(data, ClusteredData, d.metric_id))


@_handles(MetricId.WCSS)
def _wcss(fn, d, data, config):
    return fn(_expect(data, ClusteredData, d.metric_id), WcssVariant(d.formula_family))


# === Correlation ===

@_handles(MetricId.PEARSON, MetricId.SPEARMAN, MetricId.KENDALL_TAU)
def _rank_linear(fn, d, data, config):
    v = _expect(data, VariablePair, d.metric_id)
    kind = {
        MetricId.PEARSON: RankLinearKind.PEARSON,
        MetricId.SPEARMAN: RankLinearKind.SPEARMAN,
    }.get(d.metric_id)
    if kind is None:
        kind = RankLinearKind.KENDALL_TAU_B if d.formula_family == "TauB" else RankLinearKind.KENDALL_TAU_A
    return fn(v, kind)


@_handles(MetricId.MUTUAL_INFORMATION, MetricId.DISTANCE_CORRELATION)
def _dependence(fn, d, data, config):
    v = _expect(data, VariablePair, d.metric_id)
    if d.metric_id == MetricId.DISTANCE_CORRELATION:
        return fn(v, DependenceKind.DISTANCE_CORRELATION)
    return fn(v, DependenceKind.MUTUAL_INFORMATION, bins=d.param("bins"),
              units=InformationUnits(d.param("units", "nats")))


@_handles(MetricId.BIWEIGHT_MIDCORRELATION, MetricId.PERCENTAGE_BEND, MetricId.SHEPHERD)
def _robust(fn, d, data, config):
    v = _expect(data, VariablePair, d.metric_id)
    if d.metric_id == MetricId.BIWEIGHT_MIDCORRELATION:
        return fn(v, RobustKind.BIWEIGHT, c=d.param("c", 9.0), centering=BiweightCentering(d.formula_family))
    if d.metric_id == MetricId.PERCENTAGE_BEND:
        return fn(v, RobustKind.PERCENTAGE_BEND, beta=d.param("beta", 0.2))
    return fn(v, RobustKind.SHEPHERD, quantile=d.param("quantile", 0.975))


@_handles(MetricId.PARTIAL_CORRELATION)
def _partial(fn, d, data, config):
    return fn(_expect(data, VariablePair, d.metric_id))


# === Statistical tests ===

@_handles(MetricId.T_TEST, MetricId.PAIRED_T_TEST, MetricId.Z_TEST)
def _t_tests(fn, d, data, config):
    s = _expect(data, SampleGroups, d.metric_id)
    kind = {
        "Pooled": TTestKind.INDEPENDENT_POOLED, "Welch": TTestKind.WELCH, "Paired": TTestKind.PAIRED,
        "KnownSigma": TTestKind.Z_KNOWN_SIGMA, "SampleSigma": TTestKind.Z_SAMPLE_SIGMA,
    }[d.formula_family]
    return fn(s, kind, _tail(d), sigma=d.param("sigma", 1.0))


@_handles(MetricId.KS_2SAMP)
def _ks(fn, d, data, config):
    return fn(_expect(data, SampleGroups, d.metric_id), KsMethod(d.formula_family))


@_handles(MetricId.MANN_WHITNEY, MetricId.KRUSKAL_WALLIS, MetricId.WILCOXON_SIGNED_RANK)
def _rank_tests(fn, d, data, config):
    s = _expect(data, SampleGroups, d.metric_id)
    if d.metric_id == MetricId.KRUSKAL_WALLIS:
        return fn(s, RankTestKind.KRUSKAL_WALLIS)
    if d.metric_id == MetricId.MANN_WHITNEY:
        return fn(s, RankTestKind.MANN_WHITNEY, statistic=d.param("statistic", "U1"),
                  continuity=d.param("continuity", True), p_method=PMethod(d.formula_family), tail=_tail(d))
    return fn(s, RankTestKind.WILCOXON_SIGNED_RANK, statistic=d.param("statistic", "WPlus"),
              continuity=d.param("continuity", False), p_method=PMethod(d.formula_family),
              zero_policy=d.param("zero_policy", "wilcoxon"), tail=_tail(d))


@_handles(MetricId.F_TEST, MetricId.BARTLETT, MetricId.LEVENE)
def _variance_tests(fn, d, data, config):
    s = _expect(data, SampleGroups, d.metric_id)
    if d.metric_id == MetricId.F_TEST:
        return fn(s, VarianceTestKind.F_TEST, _tail(d))
    if d.metric_id == MetricId.BARTLETT:
        return fn(s, VarianceTestKind.BARTLETT)
    return fn(s, VarianceTestKind.LEVENE, center=LeveneCenter(d.formula_family),
              proportion=d.param("proportion", 0.1))


@_handles(MetricId.SHAPIRO_WILK, MetricId.CHI_SQUARE_GOF, MetricId.CHI_SQUARE_INDEPENDENCE, MetricId.ANOVA)
def _distribution_tests(fn, d, data, config):
    s = _expect(data, SampleGroups, d.metric_id)
    kind = {
        MetricId.SHAPIRO_WILK: DistributionTestKind.SHAPIRO_WILK,
        MetricId.CHI_SQUARE_GOF: DistributionTestKind.CHI_SQUARE_GOF,
        MetricId.CHI_SQUARE_INDEPENDENCE: DistributionTestKind.CHI_SQUARE_INDEPENDENCE,
        MetricId.ANOVA: DistributionTestKind.ANOVA,
    }[d.metric_id]
    return fn(s, kind, ddof=d.param("ddof", 0), yates=d.param("yates", False))


@_handles(MetricId.PERMUTATION_TEST)
def _permutation(fn, d, data, config):
    return fn(_expect(data, SampleGroups, d.metric_id),
              statistic=PermutationStatistic(d.param("statistic", "mean_diff")),
              n_resamples=d.param("n_resamples", config.mc_resamples), seed=d.param("seed", config.seed),
              tail=_tail(d), method=PermutationMethod(d.formula_family), workers=config.workers)


# === Segmentation ===

@_handles(MetricId.SEG_ACCURACY, MetricId.SEG_PRECISION, MetricId.SEG_RECALL, MetricId.SEG_F1, MetricId.DICE,
          MetricId.IOU, MetricId.MEAN_IOU)
def _overlap(fn, d, data, config):
    masks = _expect(data, MaskPair, d.metric_id)
    variant = OverlapVariant.from_mode(d.reporting_mode)
    report = fn(masks.pred, masks.ref, variant, EmptyPolicy(d.param("empty_policy", "undefined")))
    return report.get(d.metric_id)


@_handles(MetricId.HAUSDORFF)
def _hausdorff(fn, d, data, config):
    masks = _expect(data, MaskPair, d.metric_id)
    return fn(masks.pred, masks.ref, HausdorffVariant(d.formula_family), PointSet(d.param("point_set", "boundary")),
              Connectivity(d.param("connectivity", "face")), q=d.param("q", 95.0))


@_handles(MetricId.BOUNDARY_F1)
def _boundary_f1(fn, d, data, config):
    masks = _expect(data, MaskPair, d.metric_id)
    return fn(masks.pred, masks.ref, theta=d.param("theta", 1.0), connectivity=Connectivity(d.param("connectivity",
                                                                                                    "face")))


@_handles(MetricId.ADAPTED_RAND_ERROR, MetricId.ADJUSTED_RAND_INDEX, MetricId.VARIATION_OF_INFORMATION)
def _partition(fn, d, data, config):
    masks = _expect(data, MaskPair, d.metric_id)
    kind = {
        MetricId.ADAPTED_RAND_ERROR: PartitionKind.ADAPTED_RAND_ERROR,
        MetricId.ADJUSTED_RAND_INDEX: PartitionKind.ADJUSTED_RAND_INDEX,
        MetricId.VARIATION_OF_INFORMATION: PartitionKind.VARIATION_OF_INFORMATION,
    }[d.metric_id]
    return fn(masks.pred, masks.ref, kind)


# === Image quality ===

@_handles(MetricId.IMG_MAE, MetricId.IMG_MSE, MetricId.IMG_RMSE, MetricId.IMG_R_SQUARED)
def _raster_errors(fn, d, data, config):
    p = _expect(data, RasterPair, d.metric_id)
    if d.metric_id == MetricId.IMG_R_SQUARED:
        return fn(p, R2Variant(d.formula_family)).r_squared
    return getattr(fn(p), d.metric_id.value[len("img_"):])


@_handles(MetricId.PSNR)
def _psnr(fn, d, data, config):
    return fn(_expect(data, RasterPair, d.metric_id), DataRange(d.param("data_range", "declared")))


@_handles(MetricId.SSIM)
def _ssim(fn, d, data, config):
    return fn(_expect(data, RasterPair, d.metric_id), SsimWindow(d.formula_family), window_size=d.param("window", 11),
              sigma=d.param("sigma", 1.5), k1=d.param("k1", 0.01), k2=d.param("k2", 0.03),
              covariance=Covariance(d.param("covariance", "population")),
              data_range=DataRange(d.param("data_range", "declared")))


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _undefined(descriptor: ConventionDescriptor, note: str) -> List[MetricValue]:
    quantities = get_registry().get(descriptor.metric_id).quantities
    return [MetricValue.undefined(descriptor, note, quantity=q) for q in quantities]


def compute_metric(descriptor: ConventionDescriptor, data: Any, config: Optional[RunConfig] = None) -> List[MetricValue]:
    """
    Compute one convention variant

    Args:
        descriptor: Convention to evaluate
        data: Task container matching the metric's task family
        config: Run configuration (fill policy, Monte Carlo settings)

    Returns:
        List[MetricValue]: One value, or statistic and p_value for hypothesis tests;
        precondition failures become Undefined entries carrying the message
    """
    registry = get_registry()
    spec = registry.get(descriptor.metric_id)
    config = config or RunConfig(task=spec.tasks[0])
    handler = _HANDLERS.get(spec.metric_id)
    fn = registry.load_implementation(spec.metric_id)
    if handler is None or fn is None:
        logger.error(f"❌ No implementation available for {spec.metric_id.value}")
        return _undefined(descriptor, "no implementation available")

    try:
        result = handler(fn, descriptor, data, config)
    except MetricError as e:
        logger.warning(f"⚠️ {descriptor.key}: {e}")
        return _undefined(descriptor, str(e))

    logger.debug(f"Computed {descriptor.key}")
    if isinstance(result, TestResult):
        result = result.model_copy(update={"descriptor": descriptor})
        return [MetricValue.from_test_result(result, Quantity.STATISTIC),
                MetricValue.from_test_result(result, Quantity.P_VALUE)]
    return [result.model_copy(update={"descriptor": descriptor})]
