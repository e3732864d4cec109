"""
Core domain types shared by every metric module.

Enumerations, the error hierarchy, convention descriptors, metric values
and the confusion matrix all live here. Everything is immutable after
construction.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, ClassVar, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, StrictBool, StrictFloat, StrictInt, StrictStr, field_validator, model_validator

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------

class TaskFamily(str, Enum):
    """Dataset families the harness understands"""
    CLASSIFICATION = "classification"
    REGRESSION = "regression"
    CLUSTERING = "clustering"
    CORRELATION = "correlation"
    STATTEST = "stattest"
    SEGMENTATION2D = "segmentation2d"
    SEGMENTATION3D = "segmentation3d"
    IMAGE2D = "image2d"
    IMAGE3D = "image3d"

    @property
    def ndim(self) -> Optional[int]:
        if self in (TaskFamily.SEGMENTATION2D, TaskFamily.IMAGE2D):
            return 2
        if self in (TaskFamily.SEGMENTATION3D, TaskFamily.IMAGE3D):
            return 3
        return None


class MetricId(str, Enum):
    """Every metric in the catalog"""
    # classification
    ACCURACY = "accuracy"
    BALANCED_ACCURACY = "balanced_accuracy"
    PRECISION = "precision"
    RECALL = "recall"
    F1 = "f1"
    F_BETA = "f_beta"
    JACCARD = "jaccard"
    COHEN_KAPPA = "cohen_kappa"
    MCC = "mcc"
    LOG_LOSS = "log_loss"
    ROC_AUC = "roc_auc"
    G_MEAN = "g_mean"
    # regression
    MAE = "mae"
    MSE = "mse"
    RMSE = "rmse"
    MEDAE = "medae"
    MAPE = "mape"
    MSLE = "msle"
    R_SQUARED = "r_squared"
    EXPLAINED_VARIANCE = "explained_variance"
    TWEEDIE_DEVIANCE = "tweedie_deviance"
    HUBER = "huber"
    # clustering
    SILHOUETTE = "silhouette"
    DAVIES_BOULDIN = "davies_bouldin"
    CALINSKI_HARABASZ = "calinski_harabasz"
    WCSS = "wcss"
    # correlation
    PEARSON = "pearson"
    SPEARMAN = "spearman"
    KENDALL_TAU = "kendall_tau"
    MUTUAL_INFORMATION = "mutual_information"
    DISTANCE_CORRELATION = "distance_correlation"
    BIWEIGHT_MIDCORRELATION = "biweight_midcorrelation"
    PERCENTAGE_BEND = "percentage_bend"
    SHEPHERD = "shepherd"
    PARTIAL_CORRELATION = "partial_correlation"
    # statistical tests
    T_TEST = "t_test"
    PAIRED_T_TEST = "paired_t_test"
    Z_TEST = "z_test"
    KS_2SAMP = "ks_2samp"
    MANN_WHITNEY = "mann_whitney"
    KRUSKAL_WALLIS = "kruskal_wallis"
    WILCOXON_SIGNED_RANK = "wilcoxon_signed_rank"
    F_TEST = "f_test"
    BARTLETT = "bartlett"
    LEVENE = "levene"
    SHAPIRO_WILK = "shapiro_wilk"
    CHI_SQUARE_GOF = "chi_square_gof"
    CHI_SQUARE_INDEPENDENCE = "chi_square_independence"
    ANOVA = "anova"
    PERMUTATION_TEST = "permutation_test"
    # segmentation
    SEG_ACCURACY = "seg_accuracy"
    SEG_PRECISION = "seg_precision"
    SEG_RECALL = "seg_recall"
    SEG_F1 = "seg_f1"
    DICE = "dice"
    IOU = "iou"
    MEAN_IOU = "mean_iou"
    HAUSDORFF = "hausdorff"
    BOUNDARY_F1 = "boundary_f1"
    ADAPTED_RAND_ERROR = "adapted_rand_error"
    ADJUSTED_RAND_INDEX = "adjusted_rand_index"
    VARIATION_OF_INFORMATION = "variation_of_information"
    # image quality
    IMG_MAE = "img_mae"
    IMG_MSE = "img_mse"
    IMG_RMSE = "img_rmse"
    IMG_R_SQUARED = "img_r_squared"
    PSNR = "psnr"
    SSIM = "ssim"


class ReportingKind(str, Enum):
    PER_CLASS = "PerClass"
    MICRO = "Micro"
    MACRO = "Macro"
    WEIGHTED = "Weighted"
    BINARY_POSITIVE = "BinaryPositive"


class Validity(str, Enum):
    OK = "Ok"
    OUT_OF_DOMAIN = "OutOfDomain"
    UNDEFINED = "Undefined"


class FillPolicy(str, Enum):
    """What a 0/0 ratio becomes"""
    UNDEFINED = "undefined"
    ZERO = "zero"
    ONE = "one"
    DROP = "drop"


class Quantity(str, Enum):
    """Which number of a result a MetricValue carries"""
    VALUE = "value"
    STATISTIC = "statistic"
    P_VALUE = "p_value"


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class MetricError(ValueError):
    """Base class for metric precondition failures"""


class DomainError(MetricError):
    """Input lies outside the metric's mathematical domain"""


class ShapeError(MetricError):
    """Length or shape mismatch between inputs"""


class LabelError(MetricError):
    """A label is missing from the declared label set"""


class UnknownMetricError(MetricError):
    """Unknown metric id, formula family, preset or parameter key"""


class BudgetExceededError(MetricError):
    """An exact enumeration would exceed its guard"""


# ---------------------------------------------------------------------------
# Convention descriptors
# ---------------------------------------------------------------------------

ParamValue = Union[StrictBool, StrictInt, StrictFloat, StrictStr, None]


class ReportingMode(BaseModel):
    """How a metric's per-class values are presented"""
    model_config = ConfigDict(frozen=True)

    kind: ReportingKind
    class_index: Optional[int] = None

    @model_validator(mode="after")
    def _check_index(self) -> "ReportingMode":
        indexed = self.kind in (ReportingKind.PER_CLASS, ReportingKind.BINARY_POSITIVE)
        if indexed and (self.class_index is None or self.class_index < 0):
            raise ValueError(f"{self.kind.value} requires a non-negative class index")
        if not indexed and self.class_index is not None:
            raise ValueError(f"{self.kind.value} does not take a class index")
        return self

    @classmethod
    def per_class(cls, k: int) -> "ReportingMode":
        return cls(kind=ReportingKind.PER_CLASS, class_index=k)

    @classmethod
    def micro(cls) -> "ReportingMode":
        return cls(kind=ReportingKind.MICRO)

    @classmethod
    def macro(cls) -> "ReportingMode":
        return cls(kind=ReportingKind.MACRO)

    @classmethod
    def weighted(cls) -> "ReportingMode":
        return cls(kind=ReportingKind.WEIGHTED)

    @classmethod
    def binary_positive(cls, k: int) -> "ReportingMode":
        return cls(kind=ReportingKind.BINARY_POSITIVE, class_index=k)

    @classmethod
    def parse(cls, text: str) -> "ReportingMode":
        """Parse 'Micro', 'PerClass(1)' or 'BinaryPositive(0)'"""
        text = text.strip()
        if "(" in text and text.endswith(")"):
            name, index = text[:-1].split("(", 1)
            return cls(kind=ReportingKind(name), class_index=int(index))
        return cls(kind=ReportingKind(text))

    def __str__(self) -> str:
        if self.class_index is None:
            return self.kind.value
        return f"{self.kind.value}({self.class_index})"


class ConventionDescriptor(BaseModel):
    """(metric id, formula family, reporting mode, parameter bag): one way to compute a metric"""
    model_config = ConfigDict(frozen=True)

    metric_id: MetricId
    formula_family: str
    reporting_mode: ReportingMode
    params: Tuple[Tuple[str, ParamValue], ...] = ()

    @field_validator("params", mode="before")
    @classmethod
    def _normalize_params(cls, value: Any) -> Any:
        if isinstance(value, dict):
            value = tuple(value.items())
        items = tuple(tuple(item) for item in value)
        keys = [k for k, _ in items]
        if len(set(keys)) != len(keys):
            raise ValueError(f"duplicate parameter keys: {keys}")
        return tuple(sorted(items, key=lambda kv: kv[0]))

    @model_validator(mode="after")
    def _check_schema(self) -> "ConventionDescriptor":
        from .registry import get_registry

        spec = get_registry().get(self.metric_id)
        if self.formula_family not in spec.families:
            raise ValueError(f"{self.metric_id.value} has no formula family '{self.formula_family}'")
        unknown = [k for k, _ in self.params if k not in spec.params]
        if unknown:
            raise ValueError(f"{self.metric_id.value} rejects unknown parameter keys {unknown}")
        return self

    @property
    def params_dict(self) -> Dict[str, ParamValue]:
        return dict(self.params)

    def param(self, name: str, default: ParamValue = None) -> ParamValue:
        for key, value in self.params:
            if key == name:
                return value
        return default

    @property
    def variant(self) -> str:
        """Variant label without the metric id"""
        label = f"{self.formula_family}/{self.reporting_mode}"
        if self.params:
            label += "[" + ",".join(f"{k}={v}" for k, v in self.params) + "]"
        return label

    @property
    def key(self) -> str:
        return f"{self.metric_id.value}:{self.variant}"

    def with_params(self, **updates: ParamValue) -> "ConventionDescriptor":
        merged = self.params_dict
        merged.update(updates)
        return ConventionDescriptor(
            metric_id=self.metric_id,
            formula_family=self.formula_family,
            reporting_mode=self.reporting_mode,
            params=merged,
        )

    def __str__(self) -> str:
        return self.key


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

def _is_p_value_out_of_domain(value: Optional[float]) -> bool:
    return value is not None and not math.isnan(value) and not (0.0 <= value <= 1.0)


class MetricValue(BaseModel):
    """A scalar (or per-class vector) result plus the descriptor that produced it"""
    model_config = ConfigDict(frozen=True)

    descriptor: ConventionDescriptor
    value: Optional[float] = None
    per_class: Optional[Tuple[Optional[float], ...]] = None
    validity: Validity = Validity.OK
    quantity: Quantity = Quantity.VALUE
    notes: Tuple[str, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _enforce_validity(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        value = data.get("value")
        validity = Validity(data.get("validity", Validity.OK))
        if value is not None and math.isnan(float(value)):
            value = None
            if validity == Validity.OK:
                validity = Validity.UNDEFINED
        if value is None and data.get("per_class") is None and validity == Validity.OK:
            validity = Validity.UNDEFINED
        if Quantity(data.get("quantity", Quantity.VALUE)) == Quantity.P_VALUE and _is_p_value_out_of_domain(value):
            validity = Validity.OUT_OF_DOMAIN
        if validity == Validity.UNDEFINED:
            value = None
        data["value"] = value
        data["validity"] = validity
        return data

    @classmethod
    def ok(cls, descriptor: ConventionDescriptor, value: float, notes: Iterable[str] = (),
           quantity: Quantity = Quantity.VALUE) -> "MetricValue":
        return cls(descriptor=descriptor, value=float(value), quantity=quantity, notes=tuple(notes))

    @classmethod
    def undefined(cls, descriptor: ConventionDescriptor, note: str = "",
                  quantity: Quantity = Quantity.VALUE) -> "MetricValue":
        return cls(descriptor=descriptor, validity=Validity.UNDEFINED, quantity=quantity,
                   notes=(note,) if note else ())

    @classmethod
    def from_optional(cls, descriptor: ConventionDescriptor, value: Optional[float], note: str = "") -> "MetricValue":
        if value is None:
            return cls.undefined(descriptor, note)
        return cls.ok(descriptor, value)

    @classmethod
    def from_test_result(cls, result: "TestResult", quantity: Quantity) -> "MetricValue":
        """Project one quantity of a hypothesis-test result"""
        if quantity == Quantity.VALUE:
            raise ValueError("test results carry a statistic or a p_value, not a bare value")
        value = result.statistic if quantity == Quantity.STATISTIC else result.p_value
        validity = result.validity
        if quantity == Quantity.STATISTIC and validity == Validity.OUT_OF_DOMAIN and result.statistic is not None:
            validity = Validity.OK
        return cls(descriptor=result.descriptor, value=value, validity=validity,
                   quantity=quantity, notes=result.notes)

    @property
    def is_defined(self) -> bool:
        return self.validity != Validity.UNDEFINED


class TestResult(BaseModel):
    """Statistic, p-value and degrees of freedom of one hypothesis test"""
    __test__: ClassVar[bool] = False
    model_config = ConfigDict(frozen=True)

    descriptor: ConventionDescriptor
    statistic: Optional[float] = None
    p_value: Optional[float] = None
    df: Optional[Tuple[float, ...]] = None
    validity: Validity = Validity.OK
    notes: Tuple[str, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _enforce_validity(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        validity = Validity(data.get("validity", Validity.OK))
        if _is_p_value_out_of_domain(data.get("p_value")):
            validity = Validity.OUT_OF_DOMAIN
        if validity == Validity.UNDEFINED:
            data["statistic"] = None
            data["p_value"] = None
        data["validity"] = validity
        return data

    @classmethod
    def undefined(cls, descriptor: ConventionDescriptor, note: str) -> "TestResult":
        return cls(descriptor=descriptor, validity=Validity.UNDEFINED, notes=(note,))


# ---------------------------------------------------------------------------
# Label and score vectors
# ---------------------------------------------------------------------------

def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class LabelVector:
    """Class identifiers drawn from an explicitly declared label set"""
    values: np.ndarray
    labels: Tuple[int, ...]

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size < 1:
            raise ShapeError("label vector must be one-dimensional and non-empty")
        labels = tuple(int(v) for v in self.labels)
        if len(labels) < 2 or len(set(labels)) != len(labels):
            raise LabelError(f"label set must hold at least two distinct labels, got {labels}")
        if not np.all(np.isin(values, labels)):
            stray = sorted(set(values.tolist()) - set(labels))
            raise LabelError(f"values {stray} are outside the declared label set {labels}")
        object.__setattr__(self, "values", _readonly(values.astype(np.int64)))
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.values.size)

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class ScoreVector:
    """Real-valued scores; probability semantics restricts values to [0, 1]"""
    values: np.ndarray
    probability: bool = True

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim not in (1, 2) or values.shape[0] < 1:
            raise ShapeError("scores must be a non-empty vector or an n x K matrix")
        if not np.all(np.isfinite(values)):
            raise DomainError("scores must be finite")
        if self.probability and (np.any(values < 0) or np.any(values > 1)):
            raise DomainError("probability scores must lie in [0, 1]")
        object.__setattr__(self, "values", _readonly(values))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self.values, dtype=dtype)


# ---------------------------------------------------------------------------
# Confusion matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K counts; rows are true classes, columns predicted classes"""
    counts: np.ndarray
    labels: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] < 2:
            raise ShapeError(f"confusion matrix must be K x K with K >= 2, got shape {counts.shape}")
        if not np.all(np.equal(np.mod(counts, 1), 0)) or np.any(counts < 0):
            raise DomainError("confusion matrix counts must be non-negative integers")
        labels = tuple(self.labels) if self.labels else tuple(range(counts.shape[0]))
        if len(labels) != counts.shape[0]:
            raise LabelError(f"{len(labels)} labels declared for a {counts.shape[0]}-class matrix")
        object.__setattr__(self, "counts", _readonly(counts.astype(np.int64)))
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_counts(cls, counts: Sequence[Sequence[int]], labels: Optional[Sequence[int]] = None) -> "ConfusionMatrix":
        return cls(np.asarray(counts), tuple(labels) if labels is not None else ())

    @property
    def n_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def support(self) -> np.ndarray:
        """True-class counts (row sums)"""
        return self.counts.sum(axis=1)

    @property
    def predicted(self) -> np.ndarray:
        """Predicted-class counts (column sums)"""
        return self.counts.sum(axis=0)

    @property
    def tp(self) -> np.ndarray:
        return np.diag(self.counts).copy()

    @property
    def fp(self) -> np.ndarray:
        return self.predicted - self.tp

    @property
    def fn(self) -> np.ndarray:
        return self.support - self.tp

    @property
    def tn(self) -> np.ndarray:
        return self.total - self.tp - self.fp - self.fn

    def index_of(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"label {label} is not in {self.labels}")

    def relabel(self, order: Sequence[int]) -> "ConfusionMatrix":
        """Reorder classes; order[i] is the old index placed at position i"""
        order = list(order)
        if sorted(order) != list(range(self.n_classes)):
            raise LabelError(f"{order} is not a permutation of the class indices")
        counts = self.counts[np.ix_(order, order)]
        return ConfusionMatrix(counts, tuple(self.labels[i] for i in order))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.counts, other.counts)

    def __hash__(self) -> int:
        return hash((self.labels, self.counts.tobytes()))


def confusion_matrix(y_true: Union[LabelVector, Sequence[int]], y_pred: Union[LabelVector, Sequence[int]],
                     labels: Sequence[int]) -> ConfusionMatrix:
    """
    Tally true/predicted label pairs.

    Args:
        y_true: True class ids
        y_pred: Predicted class ids
        labels: Declared label set; its order fixes row/column order

    Returns:
        ConfusionMatrix: counts[i][j] = #{t : y_true[t]=labels[i] and y_pred[t]=labels[j]}
    """
    labels = tuple(int(v) for v in labels)
    truth = LabelVector(np.asarray(y_true), labels)
    pred = LabelVector(np.asarray(y_pred), labels)
    if len(truth) != len(pred):
        raise ShapeError(f"y_true has {len(truth)} entries but y_pred has {len(pred)}")
    position = {label: i for i, label in enumerate(labels)}
    rows = np.array([position[v] for v in truth.values.tolist()], dtype=np.int64)
    cols = np.array([position[v] for v in pred.values.tolist()], dtype=np.int64)
    k = len(labels)
    counts = np.bincount(rows * k + cols, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(counts, labels)
