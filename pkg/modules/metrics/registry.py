#!/usr/bin/env python3
"""
Metric catalog and convention-variant registry.

Each metric is registered once with its formula families, its parameter
schema (every parameter tagged as a formula or a reporting parameter) and
the default variant sweep the harness runs. Implementations are named by
module path and function, the same way tool definitions are kept apart
from their implementation modules.
"""

import importlib
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .core import (
    ConventionDescriptor, MetricId, ParamValue, Quantity, ReportingMode, TaskFamily, UnknownMetricError,
)

logger = logging.getLogger(__name__)


class ParamKind(str, Enum):
    FORMULA = "formula"
    REPORTING = "reporting"


@dataclass(frozen=True)
class ParamSpec:
    """Declared parameter of a metric"""
    name: str
    kind: ParamKind
    description: str
    default: ParamValue = None
    choices: Optional[Tuple[ParamValue, ...]] = None
    # changes only how the p-value is computed, never the statistic
    p_value_only: bool = False


VariantRow = Tuple[str, ReportingMode, Dict[str, ParamValue]]


@dataclass
class MetricSpec:
    """Catalog entry without implementation"""
    metric_id: MetricId
    tasks: Tuple[TaskFamily, ...]
    description: str
    families: Tuple[str, ...]
    variants: Callable[[int], List[VariantRow]]
    params: Dict[str, ParamSpec] = field(default_factory=dict)
    module_path: str = ""
    function_name: str = ""
    quantities: Tuple[Quantity, ...] = (Quantity.VALUE,)
    stochastic: bool = False
    # families share the statistic and differ only in the null distribution
    p_value_families: bool = False


class VariantRegistry:
    """Registry of metric specs and their convention variants"""

    def __init__(self):
        self.metrics: Dict[MetricId, MetricSpec] = {}
        self.task_groups: Dict[TaskFamily, List[MetricId]] = {}
        self.loaded_modules: Dict[str, Any] = {}

    def register_metric(self, spec: MetricSpec):
        """Register a metric definition"""
        self.metrics[spec.metric_id] = spec
        for task in spec.tasks:
            self.task_groups.setdefault(task, []).append(spec.metric_id)

    def get(self, metric_id) -> MetricSpec:
        try:
            return self.metrics[MetricId(metric_id)]
        except (ValueError, KeyError):
            raise UnknownMetricError(f"unknown metric id '{metric_id}'")

    def metrics_for_task(self, task) -> List[MetricId]:
        return list(self.task_groups.get(TaskFamily(task), []))

    def param_kind(self, metric_id, name: str) -> ParamKind:
        spec = self.get(metric_id)
        if name not in spec.params:
            raise UnknownMetricError(f"{spec.metric_id.value} has no parameter '{name}'")
        return spec.params[name].kind

    def describe(self, metric_id, formula_family: str, reporting_mode: Optional[ReportingMode] = None,
                 **params: ParamValue) -> ConventionDescriptor:
        """Build a validated descriptor; unknown families, keys or choices are rejected"""
        spec = self.get(metric_id)
        if formula_family not in spec.families:
            raise UnknownMetricError(
                f"{spec.metric_id.value} has no formula family '{formula_family}' (known: {', '.join(spec.families)})"
            )
        for name, value in params.items():
            if name not in spec.params:
                raise UnknownMetricError(f"{spec.metric_id.value} rejects unknown parameter '{name}'")
            choices = spec.params[name].choices
            if choices is not None and value not in choices:
                raise UnknownMetricError(f"{spec.metric_id.value}.{name} must be one of {choices}, got {value!r}")
        return ConventionDescriptor(
            metric_id=spec.metric_id,
            formula_family=formula_family,
            reporting_mode=reporting_mode or ReportingMode.micro(),
            params=params,
        )

    def register_variants(self, metric_id, n_classes: int = 2) -> List[ConventionDescriptor]:
        """
        Enumerate the default variant sweep of a metric.

        Args:
            metric_id: Catalog id
            n_classes: Size of the declared label set (classification only)

        Returns:
            List[ConventionDescriptor]: Deterministic order, no duplicates
        """
        spec = self.get(metric_id)
        descriptors: List[ConventionDescriptor] = []
        seen = set()
        for family, mode, params in spec.variants(n_classes):
            descriptor = self.describe(spec.metric_id, family, mode, **params)
            if descriptor not in seen:
                seen.add(descriptor)
                descriptors.append(descriptor)
        return descriptors

    def load_implementation(self, metric_id) -> Optional[Callable]:
        """Import the module implementing a metric and return its entry function"""
        spec = self.get(metric_id)
        if spec.module_path not in self.loaded_modules:
            try:
                self.loaded_modules[spec.module_path] = importlib.import_module(spec.module_path)
                logger.debug(f"Loaded module: {spec.module_path}")
            except ImportError as e:
                logger.error(f"Failed to load module {spec.module_path}: {e}")
                return None
        return getattr(self.loaded_modules[spec.module_path], spec.function_name, None)

    def get_manifest(self, task=None) -> Dict[str, Any]:
        """Lightweight description of the catalog"""
        ids = self.metrics_for_task(task) if task else list(self.metrics)
        return {
            "metrics": {
                metric_id.value: {
                    "description": self.metrics[metric_id].description,
                    "tasks": [t.value for t in self.metrics[metric_id].tasks],
                    "families": list(self.metrics[metric_id].families),
                    "params": {
                        name: {"kind": p.kind.value, "default": p.default, "description": p.description}
                        for name, p in self.metrics[metric_id].params.items()
                    },
                    "quantities": [q.value for q in self.metrics[metric_id].quantities],
                    "stochastic": self.metrics[metric_id].stochastic,
                    "implementation": f"{self.metrics[metric_id].module_path}.{self.metrics[metric_id].function_name}",
                }
                for metric_id in ids
            },
            "tasks": {task.value: [m.value for m in ids_] for task, ids_ in self.task_groups.items()},
            "stats": {"total_metrics": len(self.metrics)},
        }


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

MICRO = ReportingMode.micro()
MACRO = ReportingMode.macro()
WEIGHTED = ReportingMode.weighted()

CLASSIFY = "modules.metrics.classify"
REGRESS = "modules.metrics.regress"
CLUSTER = "modules.metrics.cluster"
CORRELATE = "modules.metrics.correlate"
STATTEST = "modules.metrics.stattest"
SEGMENT = "modules.metrics.segment"
IMGQUAL = "modules.metrics.imgqual"

SEGMENTATION = (TaskFamily.SEGMENTATION2D, TaskFamily.SEGMENTATION3D)
IMAGE = (TaskFamily.IMAGE2D, TaskFamily.IMAGE3D)
TEST_QUANTITIES = (Quantity.STATISTIC, Quantity.P_VALUE)
TAILS = ("two-sided", "greater", "less")


def _single(family: str = "Standard", mode: ReportingMode = MICRO, **params) -> Callable[[int], List[VariantRow]]:
    return lambda k: [(family, mode, dict(params))]


def _families(*rows: Tuple[str, Dict[str, ParamValue]]) -> Callable[[int], List[VariantRow]]:
    return lambda k: [(family, MICRO, dict(params)) for family, params in rows]


def _prf_modes(k: int) -> List[ReportingMode]:
    modes = [MICRO, MACRO, WEIGHTED] + [ReportingMode.per_class(i) for i in range(k)]
    if k == 2:
        modes.append(ReportingMode.binary_positive(1))
    return modes


def _prf_variants(**params) -> Callable[[int], List[VariantRow]]:
    return lambda k: [("PRF", mode, dict(params)) for mode in _prf_modes(k)]


def _mcc_variants(k: int) -> List[VariantRow]:
    rows: List[VariantRow] = []
    if k == 2:
        rows.append(("OneVsRest", ReportingMode.binary_positive(1), {}))
    rows.extend(("OneVsRest", ReportingMode.per_class(i), {}) for i in range(k))
    rows.append(("OneVsRest", MACRO, {}))
    rows.append(("Generalized", MICRO, {}))
    return rows


def _auc_variants(k: int) -> List[VariantRow]:
    if k == 2:
        return [("RankHalfCredit", ReportingMode.binary_positive(1), {}),
                ("RankHalfCredit", ReportingMode.binary_positive(0), {})]
    rows: List[VariantRow] = [("RankHalfCredit", ReportingMode.per_class(i), {}) for i in range(k)]
    rows.extend([("RankHalfCredit", MACRO, {}), ("RankHalfCredit", WEIGHTED, {})])
    return rows


def _overlap_variants(k: int) -> List[VariantRow]:
    modes = [ReportingMode.binary_positive(1), MACRO, MICRO, ReportingMode.binary_positive(0)]
    return [("Overlap", mode, {"empty_policy": "undefined"}) for mode in modes]


def _hausdorff_variants(k: int) -> List[VariantRow]:
    rows: List[VariantRow] = []
    for family in ("DirectedAB", "DirectedBA", "SymmetricMax"):
        rows.append((family, MICRO, {"point_set": "boundary", "connectivity": "face"}))
    rows.append(("Percentile", MICRO, {"point_set": "boundary", "connectivity": "face", "q": 95.0}))
    rows.append(("SymmetricMax", MICRO, {"point_set": "all_foreground"}))
    rows.append(("SymmetricMax", MICRO, {"point_set": "boundary", "connectivity": "full"}))
    return rows


_TAIL = ParamSpec("tail", ParamKind.REPORTING, "Alternative hypothesis", "two-sided", TAILS)
_EMPTY = ParamSpec("empty_policy", ParamKind.FORMULA, "Value when both masks are empty for a class",
                   "undefined", ("undefined", "zero", "one"))
_CONNECTIVITY = ParamSpec("connectivity", ParamKind.FORMULA, "Boundary neighbourhood", "face", ("face", "full"))
_DATA_RANGE = ParamSpec("data_range", ParamKind.REPORTING, "Dynamic range policy", "declared",
                        ("declared", "observed_ref_range", "unit_interval"))


def define_metric_catalog(registry: "VariantRegistry") -> None:
    """Register every metric of the catalog"""
    reg = registry.register_metric
    C = (TaskFamily.CLASSIFICATION,)

    # === Classification ===
    reg(MetricSpec(MetricId.ACCURACY, C, "Fraction of correct predictions", ("Standard",),
                   _single(), module_path=CLASSIFY, function_name="accuracy"))
    reg(MetricSpec(MetricId.BALANCED_ACCURACY, C, "Mean per-class recall and its chance-corrected form",
                   ("RecallMean", "ChanceCorrected"),
                   lambda k: [("RecallMean", MACRO, {}), ("RecallMean", WEIGHTED, {}), ("ChanceCorrected", MACRO, {})],
                   module_path=CLASSIFY, function_name="balanced_accuracy"))
    for metric_id, description in ((MetricId.PRECISION, "TP / (TP + FP)"), (MetricId.RECALL, "TP / (TP + FN)"),
                                   (MetricId.F1, "Harmonic mean of precision and recall"),
                                   (MetricId.JACCARD, "TP / (TP + FP + FN)")):
        reg(MetricSpec(metric_id, C, description, ("PRF",), _prf_variants(),
                       module_path=CLASSIFY, function_name="prf_metric"))
    reg(MetricSpec(MetricId.F_BETA, C, "Weighted harmonic mean of precision and recall", ("PRF",),
                   _prf_variants(beta=2.0),
                   {"beta": ParamSpec("beta", ParamKind.FORMULA, "Recall weight", 2.0)},
                   module_path=CLASSIFY, function_name="prf_metric"))
    reg(MetricSpec(MetricId.COHEN_KAPPA, C, "Chance-corrected agreement", ("Standard",), _single(),
                   module_path=CLASSIFY, function_name="cohen_kappa"))
    reg(MetricSpec(MetricId.MCC, C, "Matthews correlation coefficient", ("OneVsRest", "Generalized"),
                   _mcc_variants, module_path=CLASSIFY, function_name="mcc"))
    reg(MetricSpec(MetricId.LOG_LOSS, C, "Cross-entropy of clipped, renormalised probabilities",
                   ("ClippedRenormalized",),
                   _families(("ClippedRenormalized", {"eps": 1e-15}), ("ClippedRenormalized", {"eps": 1e-7})),
                   {"eps": ParamSpec("eps", ParamKind.FORMULA, "Probability clip bound", 1e-15)},
                   module_path=CLASSIFY, function_name="log_loss"))
    reg(MetricSpec(MetricId.ROC_AUC, C, "Rank-based area under the ROC curve", ("RankHalfCredit",),
                   _auc_variants, module_path=CLASSIFY, function_name="roc_auc"))
    reg(MetricSpec(MetricId.G_MEAN, C, "Geometric mean of per-class recalls", ("RecallGeometricMean",),
                   _single("RecallGeometricMean", MACRO), module_path=CLASSIFY, function_name="g_mean"))

    # === Regression ===
    R = (TaskFamily.REGRESSION,)
    for metric_id, description in ((MetricId.MAE, "Mean absolute error"), (MetricId.MSE, "Mean squared error"),
                                   (MetricId.RMSE, "Root mean squared error"),
                                   (MetricId.MEDAE, "Median absolute error")):
        reg(MetricSpec(metric_id, R, description, ("Standard",), _single(),
                       module_path=REGRESS, function_name="basic_errors"))
    reg(MetricSpec(MetricId.MAPE, R, "Mean absolute percentage error", ("Standard",),
                   _families(("Standard", {"units": "fraction", "zero_policy": "error"}),
                             ("Standard", {"units": "percent", "zero_policy": "error"}),
                             ("Standard", {"units": "fraction", "zero_policy": "epsilon",
                                           "epsilon": 2.220446049250313e-16})),
                   {"units": ParamSpec("units", ParamKind.REPORTING, "Fraction or percent", "fraction",
                                       ("fraction", "percent")),
                    "zero_policy": ParamSpec("zero_policy", ParamKind.FORMULA, "Handling of zero truths", "error",
                                             ("error", "epsilon", "drop")),
                    "epsilon": ParamSpec("epsilon", ParamKind.FORMULA, "Denominator floor", 2.220446049250313e-16)},
                   module_path=REGRESS, function_name="mape"))
    reg(MetricSpec(MetricId.MSLE, R, "Mean squared logarithmic error", ("Standard",), _single(),
                   module_path=REGRESS, function_name="msle"))
    reg(MetricSpec(MetricId.R_SQUARED, R, "Goodness of fit", ("CoefficientOfDetermination", "SquaredPearson", "Adjusted"),
                   _families(("CoefficientOfDetermination", {}), ("SquaredPearson", {}), ("Adjusted", {"predictors": 1})),
                   {"predictors": ParamSpec("predictors", ParamKind.FORMULA, "Predictor count for adjusted R²", 1)},
                   module_path=REGRESS, function_name="variance_explained"))
    reg(MetricSpec(MetricId.EXPLAINED_VARIANCE, R, "1 - Var(e)/Var(y)", ("Standard",), _single(),
                   module_path=REGRESS, function_name="variance_explained"))
    reg(MetricSpec(MetricId.TWEEDIE_DEVIANCE, R, "Mean Tweedie deviance", ("Tweedie",),
                   _families(*(("Tweedie", {"power": p}) for p in (0.0, 1.0, 1.5, 2.0))),
                   {"power": ParamSpec("power", ParamKind.FORMULA, "Tweedie power", 0.0)},
                   module_path=REGRESS, function_name="robust_losses"))
    reg(MetricSpec(MetricId.HUBER, R, "Mean Huber loss", ("Huber",),
                   _families(("Huber", {"delta": 1.0}), ("Huber", {"delta": 1.35})),
                   {"delta": ParamSpec("delta", ParamKind.FORMULA, "Quadratic/linear switch point", 1.0)},
                   module_path=REGRESS, function_name="robust_losses"))

    # === Clustering ===
    K = (TaskFamily.CLUSTERING,)
    reg(MetricSpec(MetricId.SILHOUETTE, K, "Mean silhouette width", ("Euclidean",),
                   _families(("Euclidean", {"singleton": "zero"}), ("Euclidean", {"singleton": "exclude"})),
                   {"singleton": ParamSpec("singleton", ParamKind.FORMULA, "Singleton-cluster points", "zero",
                                           ("zero", "exclude"))},
                   module_path=CLUSTER, function_name="silhouette"))
    reg(MetricSpec(MetricId.DAVIES_BOULDIN, K, "Davies-Bouldin index", ("Standard",), _single(),
                   module_path=CLUSTER, function_name="davies_bouldin"))
    reg(MetricSpec(MetricId.CALINSKI_HARABASZ, K, "Calinski-Harabasz index", ("Standard",), _single(),
                   module_path=CLUSTER, function_name="calinski_harabasz"))
    reg(MetricSpec(MetricId.WCSS, K, "Within-cluster sum of squares", ("RecomputedMeans", "ProvidedCenters"),
                   _families(("RecomputedMeans", {}), ("ProvidedCenters", {})),
                   module_path=CLUSTER, function_name="wcss"))

    # === Correlation ===
    V = (TaskFamily.CORRELATION,)
    reg(MetricSpec(MetricId.PEARSON, V, "Sample correlation", ("Standard",), _single(),
                   module_path=CORRELATE, function_name="rank_linear_corr"))
    reg(MetricSpec(MetricId.SPEARMAN, V, "Pearson on average ranks", ("Standard",), _single(),
                   module_path=CORRELATE, function_name="rank_linear_corr"))
    reg(MetricSpec(MetricId.KENDALL_TAU, V, "Kendall rank correlation", ("TauA", "TauB"),
                   _families(("TauA", {}), ("TauB", {})), module_path=CORRELATE, function_name="rank_linear_corr"))
    reg(MetricSpec(MetricId.MUTUAL_INFORMATION, V, "Histogram mutual information", ("Histogram",),
                   _families(("Histogram", {"bins": None, "units": "nats"}),
                             ("Histogram", {"bins": None, "units": "bits"}),
                             ("Histogram", {"bins": 10, "units": "nats"})),
                   {"bins": ParamSpec("bins", ParamKind.FORMULA, "Bins per axis (None: ceil(sqrt(n)))", None),
                    "units": ParamSpec("units", ParamKind.REPORTING, "Logarithm base", "nats", ("nats", "bits"))},
                   module_path=CORRELATE, function_name="dependence"))
    reg(MetricSpec(MetricId.DISTANCE_CORRELATION, V, "Distance correlation", ("Standard",), _single(),
                   module_path=CORRELATE, function_name="dependence"))
    reg(MetricSpec(MetricId.BIWEIGHT_MIDCORRELATION, V, "Biweight midcorrelation", ("MedianMad", "MeanSd"),
                   _families(("MedianMad", {"c": 9.0}), ("MeanSd", {"c": 9.0})),
                   {"c": ParamSpec("c", ParamKind.FORMULA, "Tuning constant", 9.0)},
                   module_path=CORRELATE, function_name="robust_corr"))
    reg(MetricSpec(MetricId.PERCENTAGE_BEND, V, "Percentage bend correlation", ("Wilcox",),
                   _families(("Wilcox", {"beta": 0.2})),
                   {"beta": ParamSpec("beta", ParamKind.FORMULA, "Bend constant", 0.2)},
                   module_path=CORRELATE, function_name="robust_corr"))
    reg(MetricSpec(MetricId.SHEPHERD, V, "Spearman after Mahalanobis pruning", ("MahalanobisPruned",),
                   _families(("MahalanobisPruned", {"quantile": 0.975})),
                   {"quantile": ParamSpec("quantile", ParamKind.FORMULA, "Chi-square(2) pruning quantile", 0.975)},
                   module_path=CORRELATE, function_name="robust_corr"))
    reg(MetricSpec(MetricId.PARTIAL_CORRELATION, V, "Correlation of covariate residuals", ("Residual",),
                   _single("Residual"), module_path=CORRELATE, function_name="partial_corr"))

    # === Statistical tests ===
    S = (TaskFamily.STATTEST,)

    def test_spec(metric_id, description, families, variants, params=None, function_name="", stochastic=False,
                  p_value_families=False):
        reg(MetricSpec(metric_id, S, description, families, variants, params or {},
                       module_path=STATTEST, function_name=function_name,
                       quantities=TEST_QUANTITIES, stochastic=stochastic, p_value_families=p_value_families))

    test_spec(MetricId.T_TEST, "Independent two-sample t-test", ("Pooled", "Welch"),
              _families(("Pooled", {"tail": "two-sided"}), ("Welch", {"tail": "two-sided"})),
              {"tail": _TAIL}, "t_tests")
    test_spec(MetricId.PAIRED_T_TEST, "Paired t-test", ("Paired",),
              _families(("Paired", {"tail": "two-sided"})), {"tail": _TAIL}, "t_tests")
    test_spec(MetricId.Z_TEST, "Two-sample z-test", ("KnownSigma", "SampleSigma"),
              _families(("SampleSigma", {"tail": "two-sided"}), ("KnownSigma", {"tail": "two-sided", "sigma": 1.0})),
              {"tail": _TAIL, "sigma": ParamSpec("sigma", ParamKind.FORMULA, "Known population SD", 1.0)}, "t_tests")
    test_spec(MetricId.KS_2SAMP, "Two-sample Kolmogorov-Smirnov test", ("Asymptotic", "AsymptoticStephens", "Exact"),
              _families(("Exact", {}), ("Asymptotic", {}), ("AsymptoticStephens", {})), {}, "ks_2samp",
              p_value_families=True)
    test_spec(MetricId.MANN_WHITNEY, "Mann-Whitney rank test", ("Normal", "Exact"),
              _families(("Normal", {"statistic": "U1", "continuity": True, "tail": "two-sided"}),
                        ("Normal", {"statistic": "U2", "continuity": True, "tail": "two-sided"}),
                        ("Normal", {"statistic": "W", "continuity": True, "tail": "two-sided"}),
                        ("Normal", {"statistic": "U1", "continuity": False, "tail": "two-sided"}),
                        ("Exact", {"statistic": "U1", "tail": "two-sided"})),
              {"statistic": ParamSpec("statistic", ParamKind.REPORTING, "Reported statistic", "U1", ("U1", "U2", "W")),
               "continuity": ParamSpec("continuity", ParamKind.FORMULA, "Continuity correction", True,
                                       p_value_only=True),
               "tail": _TAIL}, "rank_tests", p_value_families=True)
    test_spec(MetricId.KRUSKAL_WALLIS, "Kruskal-Wallis H test", ("TieCorrected",),
              _single("TieCorrected"), {}, "rank_tests")
    test_spec(MetricId.WILCOXON_SIGNED_RANK, "Wilcoxon signed-rank test", ("Exact", "Normal"),
              _families(("Exact", {"statistic": "WPlus", "zero_policy": "wilcoxon", "tail": "two-sided"}),
                        ("Exact", {"statistic": "WMin", "zero_policy": "wilcoxon", "tail": "two-sided"}),
                        ("Exact", {"statistic": "WPlus", "zero_policy": "pratt", "tail": "two-sided"}),
                        ("Normal", {"statistic": "WPlus", "zero_policy": "wilcoxon", "continuity": False,
                                    "tail": "two-sided"})),
              {"statistic": ParamSpec("statistic", ParamKind.REPORTING, "Reported statistic", "WPlus",
                                      ("WPlus", "WMin")),
               "zero_policy": ParamSpec("zero_policy", ParamKind.FORMULA, "Zero-difference handling", "wilcoxon",
                                        ("wilcoxon", "pratt")),
               "continuity": ParamSpec("continuity", ParamKind.FORMULA, "Continuity correction", False,
                                       p_value_only=True),
               "tail": _TAIL}, "rank_tests", p_value_families=True)
    test_spec(MetricId.F_TEST, "Variance-ratio F test", ("VarianceRatio",),
              _families(*(("VarianceRatio", {"tail": t}) for t in TAILS)), {"tail": _TAIL}, "variance_tests")
    test_spec(MetricId.BARTLETT, "Bartlett test for equal variances", ("Standard",), _single(), {},
              "variance_tests")
    test_spec(MetricId.LEVENE, "Levene test for equal variances",
              ("MeanCentered", "MedianCentered", "TrimmedCentered"),
              _families(("MeanCentered", {}), ("MedianCentered", {})),
              {"proportion": ParamSpec("proportion", ParamKind.FORMULA, "Trim proportion per tail", 0.1)},
              "variance_tests")
    test_spec(MetricId.SHAPIRO_WILK, "Shapiro-Wilk normality test", ("Royston",), _single("Royston"), {},
              "distribution_tests")
    test_spec(MetricId.CHI_SQUARE_GOF, "Pearson chi-square goodness of fit", ("Pearson",),
              _families(("Pearson", {"ddof": 0})),
              {"ddof": ParamSpec("ddof", ParamKind.FORMULA, "Degrees-of-freedom adjustment", 0)},
              "distribution_tests")
    test_spec(MetricId.CHI_SQUARE_INDEPENDENCE, "Pearson chi-square test of independence", ("Pearson",),
              _families(("Pearson", {"yates": False}), ("Pearson", {"yates": True})),
              {"yates": ParamSpec("yates", ParamKind.FORMULA, "Yates continuity correction on 2x2 tables", False)},
              "distribution_tests")
    test_spec(MetricId.ANOVA, "One-way ANOVA", ("OneWay",), _single("OneWay"), {}, "distribution_tests")
    test_spec(MetricId.PERMUTATION_TEST, "Two-sample permutation test", ("ExactEnumeration", "MonteCarlo"),
              _families(("ExactEnumeration", {"statistic": "mean_diff", "tail": "two-sided"}),
                        ("MonteCarlo", {"statistic": "mean_diff", "tail": "two-sided",
                                        "n_resamples": 9999, "seed": 42})),
              {"statistic": ParamSpec("statistic", ParamKind.FORMULA, "Test statistic", "mean_diff",
                                      ("mean_diff", "median_diff")),
               "n_resamples": ParamSpec("n_resamples", ParamKind.FORMULA, "Monte Carlo resamples", 9999,
                                        p_value_only=True),
               "seed": ParamSpec("seed", ParamKind.FORMULA, "Monte Carlo seed", 42, p_value_only=True),
               "tail": _TAIL}, "permutation_test", stochastic=True, p_value_families=True)

    # === Segmentation ===
    overlap_params = {"empty_policy": _EMPTY}
    reg(MetricSpec(MetricId.SEG_ACCURACY, SEGMENTATION, "Voxel accuracy", ("Overlap",),
                   _single("Overlap"), module_path=SEGMENT, function_name="overlap_metrics"))
    for metric_id, description in ((MetricId.SEG_PRECISION, "Voxel precision"), (MetricId.SEG_RECALL, "Voxel recall"),
                                   (MetricId.SEG_F1, "Voxel F1"), (MetricId.DICE, "Dice coefficient"),
                                   (MetricId.IOU, "Intersection over union")):
        reg(MetricSpec(metric_id, SEGMENTATION, description, ("Overlap",), _overlap_variants, overlap_params,
                       module_path=SEGMENT, function_name="overlap_metrics"))
    reg(MetricSpec(MetricId.MEAN_IOU, SEGMENTATION, "Mean of foreground and background IoU", ("Overlap",),
                   lambda k: [("Overlap", MACRO, {"empty_policy": "undefined"})], overlap_params,
                   module_path=SEGMENT, function_name="overlap_metrics"))
    reg(MetricSpec(MetricId.HAUSDORFF, SEGMENTATION, "Hausdorff distance",
                   ("DirectedAB", "DirectedBA", "SymmetricMax", "Percentile"), _hausdorff_variants,
                   {"point_set": ParamSpec("point_set", ParamKind.FORMULA, "Points compared", "boundary",
                                           ("boundary", "all_foreground")),
                    "connectivity": _CONNECTIVITY,
                    "q": ParamSpec("q", ParamKind.FORMULA, "Percentile of pooled directed distances", 95.0)},
                   module_path=SEGMENT, function_name="hausdorff"))
    reg(MetricSpec(MetricId.BOUNDARY_F1, SEGMENTATION, "Boundary F1 within a distance tolerance", ("Tolerance",),
                   _families(("Tolerance", {"theta": 1.0, "connectivity": "face"}),
                             ("Tolerance", {"theta": 2.0, "connectivity": "face"})),
                   {"theta": ParamSpec("theta", ParamKind.FORMULA, "Tolerance in physical units", 1.0),
                    "connectivity": _CONNECTIVITY},
                   module_path=SEGMENT, function_name="boundary_f1"))
    for metric_id, description in ((MetricId.ADAPTED_RAND_ERROR, "1 - pair-counting F-measure"),
                                   (MetricId.ADJUSTED_RAND_INDEX, "Chance-adjusted Rand index"),
                                   (MetricId.VARIATION_OF_INFORMATION, "H(P|R) + H(R|P) in nats")):
        reg(MetricSpec(metric_id, SEGMENTATION, description, ("Standard",), _single(),
                       module_path=SEGMENT, function_name="partition_metrics"))

    # === Image quality ===
    for metric_id, description in ((MetricId.IMG_MAE, "Voxel mean absolute error"),
                                   (MetricId.IMG_MSE, "Voxel mean squared error"),
                                   (MetricId.IMG_RMSE, "Voxel root mean squared error")):
        reg(MetricSpec(metric_id, IMAGE, description, ("Standard",), _single(),
                       module_path=IMGQUAL, function_name="raster_errors"))
    reg(MetricSpec(MetricId.IMG_R_SQUARED, IMAGE, "Voxel goodness of fit",
                   ("CoefficientOfDetermination", "SquaredPearson"),
                   _families(("CoefficientOfDetermination", {}), ("SquaredPearson", {})),
                   module_path=IMGQUAL, function_name="raster_errors"))
    reg(MetricSpec(MetricId.PSNR, IMAGE, "Peak signal-to-noise ratio", ("Standard",),
                   _families(*(("Standard", {"data_range": policy}) for policy in _DATA_RANGE.choices)),
                   {"data_range": _DATA_RANGE}, module_path=IMGQUAL, function_name="psnr"))
    reg(MetricSpec(MetricId.SSIM, IMAGE, "Structural similarity", ("Gaussian", "Uniform"),
                   _families(("Gaussian", {"window": 11, "sigma": 1.5, "k1": 0.01, "k2": 0.03,
                                           "covariance": "population", "data_range": "declared"}),
                             ("Uniform", {"window": 7, "k1": 0.01, "k2": 0.03,
                                          "covariance": "sample", "data_range": "declared"})),
                   {"window": ParamSpec("window", ParamKind.FORMULA, "Odd window width", 11),
                    "sigma": ParamSpec("sigma", ParamKind.FORMULA, "Gaussian window SD", 1.5),
                    "k1": ParamSpec("k1", ParamKind.FORMULA, "Luminance constant", 0.01),
                    "k2": ParamSpec("k2", ParamKind.FORMULA, "Contrast constant", 0.03),
                    "covariance": ParamSpec("covariance", ParamKind.FORMULA, "Local covariance normalisation",
                                            "population", ("population", "sample")),
                    "data_range": _DATA_RANGE},
                   module_path=IMGQUAL, function_name="ssim"))


# Global registry instance
_registry: Optional[VariantRegistry] = None


def get_registry() -> VariantRegistry:
    """Return the populated global registry"""
    global _registry
    if _registry is None:
        registry = VariantRegistry()
        define_metric_catalog(registry)
        _registry = registry
        logger.debug(f"Metric catalog ready with {len(registry.metrics)} metrics")
    return _registry


def register_variants(metric_id, n_classes: int = 2) -> List[ConventionDescriptor]:
    """Default variant sweep of one metric"""
    return get_registry().register_variants(metric_id, n_classes)


def describe(metric_id, formula_family: str, reporting_mode: Optional[ReportingMode] = None,
             **params: ParamValue) -> ConventionDescriptor:
    """Validated descriptor for one convention"""
    return get_registry().describe(metric_id, formula_family, reporting_mode, **params)


def metrics_for_task(task) -> List[MetricId]:
    return get_registry().metrics_for_task(task)
