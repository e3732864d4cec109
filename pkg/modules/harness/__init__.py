"""
Metric consistency harness

Loads datasets, sweeps every registered convention variant of each metric,
classifies pairwise differences as reporting (RD) or implementational (ID)
differences or validity bugs, and emits deterministic reports.
"""

from .datasets import ClassificationData, DatasetParseError, MaskPair, load_dataset, load_mask, load_raster, write_dataset
from .discrepancy import classify_discrepancies, exit_code
from .dispatch import compute_metric
from .fixtures import PHENOMENA, random_dataset, run_phenomenon
from .models import Classification, DiscrepancyRecord, ReportFormat, RunConfig
from .presets import PRESETS, select_variants
from .report import build_document, emit_report, emit_values, values_document
from .runner import run_task, run_variants

__all__ = [
    "ClassificationData",
    "DatasetParseError",
    "MaskPair",
    "load_dataset",
    "load_mask",
    "load_raster",
    "write_dataset",
    "classify_discrepancies",
    "exit_code",
    "compute_metric",
    "PHENOMENA",
    "random_dataset",
    "run_phenomenon",
    "Classification",
    "DiscrepancyRecord",
    "ReportFormat",
    "RunConfig",
    "PRESETS",
    "select_variants",
    "build_document",
    "emit_report",
    "emit_values",
    "values_document",
    "run_task",
    "run_variants",
]
