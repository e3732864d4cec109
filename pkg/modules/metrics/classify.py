"""
Classification metrics with explicit averaging and formula families.

Per-class values are always available through ``prf_report``; scalar
entry points require the caller to name the reporting mode.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    ConfusionMatrix, DomainError, FillPolicy, LabelError, LabelVector, MetricId, MetricValue, ReportingKind,
    ReportingMode, ScoreVector, ShapeError, UnknownMetricError,
)
from .numeric import aggregate, average_ranks, fill, safe_ratio
from .registry import describe

logger = logging.getLogger(__name__)

PRF_METRICS = (MetricId.PRECISION, MetricId.RECALL, MetricId.F1, MetricId.F_BETA, MetricId.JACCARD)
ZERO_DENOMINATOR_NOTE = "zero denominator: 0 by convention"


class BalancedAccuracyVariant(str, Enum):
    MACRO_RECALL = "MacroRecall"
    WEIGHTED_RECALL = "WeightedRecall"
    CHANCE_CORRECTED = "ChanceCorrected"


class MccVariant(str, Enum):
    BINARY_POSITIVE = "BinaryPositive"
    PER_CLASS = "PerClass"
    GENERALIZED = "Generalized"
    PER_CLASS_ONE_VS_REST_MACRO = "PerClassOneVsRestMacro"


@dataclass(frozen=True)
class ClassScores:
    """Precision, recall, F-beta and Jaccard of one class (None when undefined)"""
    label: int
    support: int
    precision: Optional[float]
    recall: Optional[float]
    f_beta: Optional[float]
    jaccard: Optional[float]

    def get(self, name: str) -> Optional[float]:
        return getattr(self, name)


@dataclass(frozen=True)
class AggregateScores:
    precision: Optional[float]
    recall: Optional[float]
    f_beta: Optional[float]
    jaccard: Optional[float]

    def get(self, name: str) -> Optional[float]:
        return getattr(self, name)


@dataclass(frozen=True)
class PRFReport:
    """Full precision/recall/F-beta/Jaccard report: per class plus every aggregate"""
    per_class: Tuple[ClassScores, ...]
    micro: AggregateScores
    macro: AggregateScores
    weighted: AggregateScores
    beta: float
    fill_policy: FillPolicy

    def value(self, name: str, mode: ReportingMode) -> Optional[float]:
        """Look up one number; name is precision, recall, f_beta or jaccard"""
        if mode.kind == ReportingKind.MICRO:
            return self.micro.get(name)
        if mode.kind == ReportingKind.MACRO:
            return self.macro.get(name)
        if mode.kind == ReportingKind.WEIGHTED:
            return self.weighted.get(name)
        if mode.class_index >= len(self.per_class):
            raise LabelError(f"class index {mode.class_index} is outside a {len(self.per_class)}-class report")
        if mode.kind == ReportingKind.BINARY_POSITIVE and len(self.per_class) != 2:
            logger.debug("BinaryPositive on a multi-class matrix collapses one-vs-rest")
        return self.per_class[mode.class_index].get(name)


def _f_beta_from_counts(tp: float, fp: float, fn: float, beta: float) -> Optional[float]:
    b2 = beta * beta
    return safe_ratio((1.0 + b2) * tp, (1.0 + b2) * tp + b2 * fn + fp)


def prf_report(cm: ConfusionMatrix, beta: float = 1.0, fill_policy: FillPolicy = FillPolicy.UNDEFINED) -> PRFReport:
    """
    Per-class and aggregated precision, recall, F-beta and Jaccard.

    Args:
        cm: Confusion matrix
        beta: Recall weight of F-beta (> 0)
        fill_policy: Treatment of 0/0 ratios

    Returns:
        PRFReport: per-class values plus micro, macro and weighted aggregates
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    tp, fp, fn = cm.tp.astype(float), cm.fp.astype(float), cm.fn.astype(float)
    support = cm.support
    raw = []
    for k in range(cm.n_classes):
        raw.append((
            safe_ratio(tp[k], tp[k] + fp[k]),
            safe_ratio(tp[k], tp[k] + fn[k]),
            _f_beta_from_counts(tp[k], fp[k], fn[k], beta),
            safe_ratio(tp[k], tp[k] + fp[k] + fn[k]),
        ))
    per_class = tuple(
        ClassScores(label, int(support[k]), *(fill(v, fill_policy) for v in raw[k]))
        for k, label in enumerate(cm.labels)
    )

    pooled_tp = float(tp.sum())
    pooled_fp = float(fp.sum())
    pooled_fn = float(fn.sum())
    micro = AggregateScores(
        safe_ratio(pooled_tp, pooled_tp + pooled_fp),
        safe_ratio(pooled_tp, pooled_tp + pooled_fn),
        _f_beta_from_counts(pooled_tp, pooled_fp, pooled_fn, beta),
        safe_ratio(pooled_tp, pooled_tp + pooled_fp + pooled_fn),
    )
    columns = list(zip(*raw))
    macro = AggregateScores(*(aggregate(col, fill_policy) for col in columns))
    weighted = AggregateScores(*(aggregate(col, fill_policy, weights=support.tolist()) for col in columns))
    return PRFReport(per_class, micro, macro, weighted, float(beta), fill_policy)


def prf_metric(cm: ConfusionMatrix, metric_id: Union[MetricId, str], mode: ReportingMode, beta: float = 2.0,
               fill_policy: FillPolicy = FillPolicy.UNDEFINED) -> MetricValue:
    """One precision/recall/F/Jaccard number under one reporting mode"""
    metric_id = MetricId(metric_id)
    if metric_id not in PRF_METRICS:
        raise UnknownMetricError(f"{metric_id.value} is not a precision/recall family metric")
    if metric_id == MetricId.F_BETA:
        descriptor = describe(metric_id, "PRF", mode, beta=float(beta))
        effective_beta = beta
    else:
        descriptor = describe(metric_id, "PRF", mode)
        effective_beta = 1.0
    name = {MetricId.PRECISION: "precision", MetricId.RECALL: "recall", MetricId.F1: "f_beta",
            MetricId.F_BETA: "f_beta", MetricId.JACCARD: "jaccard"}[metric_id]
    report = prf_report(cm, effective_beta, fill_policy)
    return MetricValue.from_optional(descriptor, report.value(name, mode), "zero denominator")


def accuracy(cm: ConfusionMatrix) -> MetricValue:
    """trace / total"""
    descriptor = describe(MetricId.ACCURACY, "Standard")
    return MetricValue.from_optional(descriptor, safe_ratio(np.trace(cm.counts), cm.total), "empty matrix")


def _recalls(cm: ConfusionMatrix):
    tp = cm.tp
    return [safe_ratio(tp[k], s) for k, s in enumerate(cm.support)]


def balanced_accuracy(cm: ConfusionMatrix,
                      variant: BalancedAccuracyVariant = BalancedAccuracyVariant.MACRO_RECALL,
                      fill_policy: FillPolicy = FillPolicy.UNDEFINED) -> MetricValue:
    """
    Mean per-class recall in three conventions.

    MacroRecall averages recalls, WeightedRecall weights them by support
    (and so equals accuracy), ChanceCorrected rescales MacroRecall so that
    chance level maps to 0.
    """
    variant = BalancedAccuracyVariant(variant)
    recalls = _recalls(cm)
    if variant == BalancedAccuracyVariant.WEIGHTED_RECALL:
        descriptor = describe(MetricId.BALANCED_ACCURACY, "RecallMean", ReportingMode.weighted())
        value = aggregate(recalls, fill_policy, weights=cm.support.tolist())
        return MetricValue.from_optional(descriptor, value, "undefined recall")

    macro = aggregate(recalls, fill_policy)
    if variant == BalancedAccuracyVariant.MACRO_RECALL:
        descriptor = describe(MetricId.BALANCED_ACCURACY, "RecallMean", ReportingMode.macro())
        return MetricValue.from_optional(descriptor, macro, "undefined recall")

    descriptor = describe(MetricId.BALANCED_ACCURACY, "ChanceCorrected", ReportingMode.macro())
    if macro is None:
        return MetricValue.undefined(descriptor, "undefined recall")
    chance = 1.0 / cm.n_classes
    return MetricValue.ok(descriptor, (macro - chance) / (1.0 - chance))


def cohen_kappa(cm: ConfusionMatrix) -> MetricValue:
    """(p_o - p_e) / (1 - p_e)"""
    descriptor = describe(MetricId.COHEN_KAPPA, "Standard")
    n = float(cm.total)
    if n == 0:
        return MetricValue.undefined(descriptor, "empty matrix")
    p_o = np.trace(cm.counts) / n
    p_e = float(np.dot(cm.support.astype(float), cm.predicted.astype(float))) / (n * n)
    if p_e == 1.0:
        return MetricValue.undefined(descriptor, "chance agreement is 1")
    return MetricValue.ok(descriptor, (p_o - p_e) / (1.0 - p_e))


def _binary_mcc(tp: float, fp: float, fn: float, tn: float) -> Tuple[float, bool]:
    denominator = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denominator == 0:
        return 0.0, True
    return (tp * tn - fp * fn) / math.sqrt(denominator), False


def _one_vs_rest_mcc(cm: ConfusionMatrix, k: int) -> Tuple[float, bool]:
    return _binary_mcc(float(cm.tp[k]), float(cm.fp[k]), float(cm.fn[k]), float(cm.tn[k]))


def mcc(cm: ConfusionMatrix, variant: MccVariant = MccVariant.BINARY_POSITIVE, positive: int = 1) -> MetricValue:
    """
    Matthews correlation coefficient.

    Args:
        cm: Confusion matrix
        variant: BinaryPositive / PerClass (one class against the rest),
            Generalized (multi-class covariance form) or
            PerClassOneVsRestMacro (mean of the per-class values)
        positive: Class index for BinaryPositive and PerClass

    Returns:
        MetricValue: degenerate denominators yield 0.0 with a note
    """
    variant = MccVariant(variant)
    if variant in (MccVariant.BINARY_POSITIVE, MccVariant.PER_CLASS):
        if not 0 <= positive < cm.n_classes:
            raise LabelError(f"class index {positive} is outside a {cm.n_classes}-class matrix")
        mode = (ReportingMode.binary_positive(positive) if variant == MccVariant.BINARY_POSITIVE
                else ReportingMode.per_class(positive))
        descriptor = describe(MetricId.MCC, "OneVsRest", mode)
        value, degenerate = _one_vs_rest_mcc(cm, positive)
        return MetricValue.ok(descriptor, value, (ZERO_DENOMINATOR_NOTE,) if degenerate else ())

    if variant == MccVariant.PER_CLASS_ONE_VS_REST_MACRO:
        descriptor = describe(MetricId.MCC, "OneVsRest", ReportingMode.macro())
        results = [_one_vs_rest_mcc(cm, k) for k in range(cm.n_classes)]
        notes = (ZERO_DENOMINATOR_NOTE,) if any(d for _, d in results) else ()
        return MetricValue.ok(descriptor, float(np.mean([v for v, _ in results])), notes)

    descriptor = describe(MetricId.MCC, "Generalized", ReportingMode.micro())
    s = float(cm.total)
    c = float(np.trace(cm.counts))
    t = cm.support.astype(float)
    p = cm.predicted.astype(float)
    numerator = c * s - float(np.dot(t, p))
    denominator = (s * s - float(np.dot(p, p))) * (s * s - float(np.dot(t, t)))
    if denominator == 0:
        return MetricValue.ok(descriptor, 0.0, (ZERO_DENOMINATOR_NOTE,))
    return MetricValue.ok(descriptor, numerator / math.sqrt(denominator))


def _probability_matrix(probs, n_samples: int, n_classes: int) -> np.ndarray:
    matrix = np.asarray(probs.values if isinstance(probs, ScoreVector) else probs, dtype=float)
    if matrix.ndim == 1:
        if n_classes != 2:
            raise ShapeError("a single probability column is only meaningful for two classes")
        matrix = np.column_stack([1.0 - matrix, matrix])
    if matrix.ndim != 2 or matrix.shape[0] != n_samples:
        raise ShapeError(f"probabilities must be an {n_samples} x {n_classes} matrix, got {matrix.shape}")
    if matrix.shape[1] != n_classes:
        raise LabelError(f"probabilities have {matrix.shape[1]} class columns for {n_classes} declared labels")
    if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
        raise DomainError("probabilities must be finite and non-negative")
    return matrix


def log_loss(y_true: Union[LabelVector, Sequence[int]], probs, labels: Sequence[int] = (0, 1),
             eps: float = 1e-15) -> MetricValue:
    """
    Mean negative log-likelihood of the true class.

    Probabilities are clipped to [eps, 1 - eps] first and each row is then
    renormalised to sum to one.

    Args:
        y_true: True class ids
        probs: n x K matrix ordered like labels, or for two classes the
            probability of labels[1]
        labels: Declared label set
        eps: Clip bound in (0, 0.5)
    """
    if not 0.0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 0.5), got {eps}")
    truth = y_true if isinstance(y_true, LabelVector) else LabelVector(np.asarray(y_true), tuple(labels))
    labels = truth.labels
    matrix = _probability_matrix(probs, len(truth), len(labels))
    clipped = np.clip(matrix, eps, 1.0 - eps)
    clipped = clipped / clipped.sum(axis=1, keepdims=True)
    position = {label: i for i, label in enumerate(labels)}
    rows = np.arange(len(truth))
    cols = np.array([position[v] for v in truth.values.tolist()])
    value = float(np.mean(-np.log(clipped[rows, cols])))
    return MetricValue.ok(describe(MetricId.LOG_LOSS, "ClippedRenormalized", eps=float(eps)), value)


def rank_auc(is_positive: np.ndarray, scores: np.ndarray) -> Optional[float]:
    """(#{pos > neg} + 0.5 #{pos = neg}) / (n_pos n_neg) through average ranks"""
    is_positive = np.asarray(is_positive, dtype=bool)
    n_pos = int(is_positive.sum())
    n_neg = int(is_positive.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = average_ranks(scores)
    u = float(ranks[is_positive].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def roc_auc(y_true: Union[LabelVector, Sequence[int]], scores, labels: Sequence[int] = (0, 1),
            mode: Optional[ReportingMode] = None) -> MetricValue:
    """
    Rank-based ROC AUC; tied scores earn half credit.

    Binary input takes one score per sample for labels[1];
    BinaryPositive(0) keeps the same scores and counts labels[0] as
    positive, so the two binary variants sum to one. Multi-class input
    takes an n x K score matrix and supports PerClass(k) one-vs-rest,
    Macro and Weighted.
    """
    truth = y_true if isinstance(y_true, LabelVector) else LabelVector(np.asarray(y_true), tuple(labels))
    labels = truth.labels
    values = np.asarray(scores.values if isinstance(scores, ScoreVector) else scores, dtype=float)
    if values.shape[0] != len(truth):
        raise ShapeError(f"{values.shape[0]} scores for {len(truth)} labels")
    if not np.all(np.isfinite(values)):
        raise DomainError("scores must be finite")
    k = len(labels)
    mode = mode or (ReportingMode.binary_positive(1) if k == 2 else ReportingMode.macro())
    descriptor = describe(MetricId.ROC_AUC, "RankHalfCredit", mode)

    if k == 2 and values.ndim == 1:
        if mode.kind != ReportingKind.BINARY_POSITIVE or mode.class_index not in (0, 1):
            raise UnknownMetricError(f"binary AUC supports BinaryPositive(0|1), got {mode}")
        positive_label = labels[mode.class_index]
        value = rank_auc(truth.values == positive_label, values)
        return MetricValue.from_optional(descriptor, value, "single-class input")

    if values.ndim != 2 or values.shape[1] != k:
        raise LabelError(f"multi-class AUC needs an n x {k} score matrix, got {values.shape}")
    per_class = [rank_auc(truth.values == label, values[:, i]) for i, label in enumerate(labels)]
    if mode.kind in (ReportingKind.PER_CLASS, ReportingKind.BINARY_POSITIVE):
        return MetricValue.from_optional(descriptor, per_class[mode.class_index], "single-class input")
    if mode.kind == ReportingKind.MACRO:
        return MetricValue.from_optional(descriptor, aggregate(per_class, FillPolicy.UNDEFINED), "absent class")
    if mode.kind == ReportingKind.WEIGHTED:
        support = [int(np.sum(truth.values == label)) for label in labels]
        return MetricValue.from_optional(descriptor, aggregate(per_class, FillPolicy.UNDEFINED, support),
                                         "absent class")
    raise UnknownMetricError(f"AUC has no {mode} reporting")


def g_mean(cm: ConfusionMatrix, fill_policy: FillPolicy = FillPolicy.UNDEFINED) -> MetricValue:
    """Geometric mean of per-class recalls"""
    descriptor = describe(MetricId.G_MEAN, "RecallGeometricMean", ReportingMode.macro())
    recalls = []
    for value in _recalls(cm):
        value = fill(value, fill_policy)
        if value is None:
            if fill_policy == FillPolicy.DROP:
                continue
            return MetricValue.undefined(descriptor, "undefined recall")
        recalls.append(value)
    if not recalls:
        return MetricValue.undefined(descriptor, "no defined recall")
    if min(recalls) == 0.0:
        return MetricValue.ok(descriptor, 0.0)
    return MetricValue.ok(descriptor, float(np.prod(recalls) ** (1.0 / len(recalls))))
