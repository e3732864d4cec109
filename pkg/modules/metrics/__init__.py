"""
Metric library with explicit conventions

Every metric result carries the convention descriptor that produced it:
formula family, reporting mode and parameters.
"""

from .core import (
    BudgetExceededError, ConfusionMatrix, ConventionDescriptor, DomainError, FillPolicy, LabelError,
    LabelVector, MetricError, MetricId, MetricValue, Quantity, ReportingKind, ReportingMode, ScoreVector,
    ShapeError, TaskFamily, TestResult, UnknownMetricError, Validity, confusion_matrix,
)
from .registry import (
    MetricSpec, ParamKind, ParamSpec, VariantRegistry, describe, get_registry, metrics_for_task, register_variants,
)

__all__ = [
    "BudgetExceededError",
    "ConfusionMatrix",
    "ConventionDescriptor",
    "DomainError",
    "FillPolicy",
    "LabelError",
    "LabelVector",
    "MetricError",
    "MetricId",
    "MetricValue",
    "Quantity",
    "ReportingKind",
    "ReportingMode",
    "ScoreVector",
    "ShapeError",
    "TaskFamily",
    "TestResult",
    "UnknownMetricError",
    "Validity",
    "confusion_matrix",
    "MetricSpec",
    "ParamKind",
    "ParamSpec",
    "VariantRegistry",
    "describe",
    "get_registry",
    "metrics_for_task",
    "register_variants",
]
