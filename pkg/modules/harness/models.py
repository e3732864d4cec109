"""
Harness records: discrepancy classification and run configuration.
"""

import math
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from modules.config import HarnessSettings
from modules.metrics.core import ConventionDescriptor, MetricId, Quantity, TaskFamily, Validity
from modules.metrics.numeric import round_half_even


class Classification(str, Enum):
    """Discrepancy taxonomy; members are listed from most to least severe"""
    BUG = "BUG"
    ID = "ID"
    RD = "RD"
    NONE = "NONE"

    @property
    def severity(self) -> int:
        return {Classification.BUG: 3, Classification.ID: 2, Classification.RD: 1, Classification.NONE: 0}[self]


class ReportFormat(str, Enum):
    JSON = "json"
    MARKDOWN = "md"


def json_number(value: Optional[float]) -> Any:
    """JSON-safe float: infinities are spelled out, None stays null"""
    if value is None:
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


class DiscrepancyRecord(BaseModel):
    """One compared pair of values of the same metric and quantity"""
    model_config = ConfigDict(frozen=True)

    metric_id: MetricId
    quantity: Quantity = Quantity.VALUE
    descriptor_a: ConventionDescriptor
    descriptor_b: ConventionDescriptor
    value_a: Optional[float] = None
    value_b: Optional[float] = None
    validity_a: Validity = Validity.OK
    validity_b: Validity = Validity.OK
    abs_delta: Optional[float] = None
    classification: Classification

    @property
    def metric_label(self) -> str:
        if self.quantity == Quantity.VALUE:
            return self.metric_id.value
        return f"{self.metric_id.value}.{self.quantity.value}"

    @property
    def sort_key(self) -> Tuple:
        delta = math.inf if self.abs_delta is None else self.abs_delta
        return (self.metric_id.value, self.quantity.value, -delta, self.descriptor_a.key, self.descriptor_b.key)

    def to_row(self, decimals: int = 2) -> Dict[str, Any]:
        """Report row with full precision and rounded display fields"""
        return {
            "metric": self.metric_label,
            "variant_a": self.descriptor_a.variant,
            "variant_b": self.descriptor_b.variant,
            "value_a": json_number(self.value_a),
            "value_b": json_number(self.value_b),
            "delta": json_number(self.abs_delta),
            "display_a": round_half_even(self.value_a, decimals) if self.value_a is not None else self.validity_a.value,
            "display_b": round_half_even(self.value_b, decimals) if self.value_b is not None else self.validity_b.value,
            "class": self.classification.value,
        }


class RunConfig(BaseModel):
    """Everything one harness run needs"""
    model_config = ConfigDict(frozen=True)

    task: TaskFamily
    metrics: Tuple[MetricId, ...] = ()
    variants: str = "all"
    tolerance: float = Field(default=1e-9, ge=0.0)
    stochastic_tolerance: float = Field(default=1e-6, ge=0.0)
    seed: int = Field(default=42, ge=0, lt=2**64)
    workers: int = Field(default=1, ge=1)
    mc_resamples: int = Field(default=9999, ge=1)
    fill_policy: str = "undefined"
    display_decimals: int = Field(default=2, ge=0)
    flag_average_ambiguity: bool = True
    report_format: ReportFormat = ReportFormat.JSON
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    truth_col: Optional[str] = None

    @field_validator("metrics", mode="before")
    @classmethod
    def _coerce_metrics(cls, value: Any) -> Any:
        if value is None:
            return ()
        return tuple(MetricId(v) for v in value)

    @classmethod
    def from_settings(cls, settings: HarnessSettings, task, **overrides: Any) -> "RunConfig":
        """
        Build a run config from harness settings

        Args:
            settings: Effective harness settings
            task: Task family of the dataset
            **overrides: Fields that take precedence over the settings (None values are ignored)

        Returns:
            RunConfig: Validated configuration
        """
        fields = {
            "task": TaskFamily(task),
            "tolerance": settings.tolerance,
            "stochastic_tolerance": settings.stochastic_tolerance,
            "seed": settings.seed,
            "workers": settings.workers,
            "mc_resamples": settings.mc_resamples,
            "fill_policy": settings.fill_policy,
            "display_decimals": settings.display_decimals,
            "flag_average_ambiguity": settings.flag_average_ambiguity,
        }
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**fields)

    def admits(self, metric_id: MetricId) -> bool:
        return not self.metrics or MetricId(metric_id) in self.metrics
