"""
Named convention selections that emulate how a given component reports.

A preset picks at most one descriptor per metric: the first registered
descriptor that satisfies its predicate, provided the predicate actually
discriminates among that metric's variants. Otherwise the metric's
default (first registered) descriptor is used. Some presets also rewrite
the chosen descriptor, e.g. to switch the dynamic-range policy.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from modules.metrics.core import ConventionDescriptor, MetricId, ReportingKind, UnknownMetricError
from modules.metrics.registry import get_registry

logger = logging.getLogger(__name__)

ALL_VARIANTS = "all"

Predicate = Callable[[ConventionDescriptor], bool]
Rewrite = Callable[[ConventionDescriptor], ConventionDescriptor]


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    predicate: Predicate
    rewrite: Optional[Rewrite] = None

    def select(self, descriptors: Sequence[ConventionDescriptor]) -> List[ConventionDescriptor]:
        """One descriptor for the metric whose registered sweep is given"""
        if not descriptors:
            return []
        matches = [d for d in descriptors if self.predicate(d)]
        chosen = matches[0] if matches and len(matches) < len(descriptors) else descriptors[0]
        if self.rewrite is not None:
            chosen = self.rewrite(chosen)
        return [chosen]


def _class_index(k: int) -> Predicate:
    def check(d: ConventionDescriptor) -> bool:
        mode = d.reporting_mode
        return mode.kind in (ReportingKind.BINARY_POSITIVE, ReportingKind.PER_CLASS) and mode.class_index == k
    return check


def _kind(kind: ReportingKind) -> Predicate:
    return lambda d: d.reporting_mode.kind == kind


def _observed_range(d: ConventionDescriptor) -> ConventionDescriptor:
    if "data_range" in get_registry().get(d.metric_id).params:
        return d.with_params(data_range="observed_ref_range")
    return d


PRESETS: Dict[str, Preset] = {p.name: p for p in (
    Preset("positive_class_1", "Binary reporting with class 1 as positive", _class_index(1)),
    Preset("positive_class_0", "Binary reporting with class 0 as positive", _class_index(0)),
    Preset("per_class_macro", "Unweighted mean over classes", _kind(ReportingKind.MACRO)),
    Preset("per_class_weighted", "Support-weighted mean over classes", _kind(ReportingKind.WEIGHTED)),
    Preset("micro_pooled", "Counts pooled over classes", _kind(ReportingKind.MICRO)),
    Preset("rank_sum_reporting", "Mann-Whitney reported as the rank sum W",
           lambda d: d.param("statistic") == "W"),
    Preset("median_centered_levene", "Levene test centred on group medians",
           lambda d: d.metric_id == MetricId.LEVENE and d.formula_family == "MedianCentered"),
    Preset("uniform_window_ssim", "SSIM with a uniform window and sample covariance",
           lambda d: d.metric_id == MetricId.SSIM and d.formula_family == "Uniform"),
    Preset("observed_range", "Dynamic range taken from the reference image",
           lambda d: d.param("data_range") == "observed_ref_range", _observed_range),
)}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownMetricError(f"unknown variant preset '{name}' (known: {', '.join(sorted(PRESETS))})")


def parse_selection(text: Optional[str]) -> List[str]:
    """Split a --variants value into preset names; 'all' stands alone"""
    names = [part.strip() for part in (text or ALL_VARIANTS).split(",") if part.strip()]
    if not names or ALL_VARIANTS in names:
        return [ALL_VARIANTS]
    for name in names:
        get_preset(name)
    return names


def select_variants(metric_id, n_classes: int = 2, selection: Optional[str] = ALL_VARIANTS) -> List[ConventionDescriptor]:
    """
    Descriptors of one metric under a variant selection

    Args:
        metric_id: Catalog id
        n_classes: Label-set size for the classification sweep
        selection: "all", one preset name, or comma-separated preset names

    Returns:
        List[ConventionDescriptor]: Registered sweep order, duplicates removed
    """
    registered = get_registry().register_variants(metric_id, n_classes)
    names = parse_selection(selection)
    if names == [ALL_VARIANTS]:
        return registered
    chosen: List[ConventionDescriptor] = []
    for name in names:
        for descriptor in get_preset(name).select(registered):
            if descriptor not in chosen:
                chosen.append(descriptor)
    return chosen
