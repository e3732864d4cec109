"""
Pairwise discrepancy classification.

Values of the same metric and quantity are compared pairwise. A pair is
NONE within tolerance, BUG when either side is out of its domain, ID when
the formula differs (family or any formula-kind parameter) and RD when
only the reporting differs (reporting mode or reporting-kind parameters).
"""

import itertools
import logging
import math
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

from modules.metrics.core import ConventionDescriptor, MetricValue, Quantity, Validity
from modules.metrics.registry import ParamKind, get_registry

from .models import Classification, DiscrepancyRecord

logger = logging.getLogger(__name__)


def formula_signature(descriptor: ConventionDescriptor, quantity: Optional[Quantity] = None) -> Tuple:
    """
    Family plus every formula parameter, registry defaults filled in.

    For the statistic of a hypothesis test, families and parameters that
    only change the null distribution are left out.
    """
    spec = get_registry().get(descriptor.metric_id)
    statistic_only = quantity == Quantity.STATISTIC
    values = descriptor.params_dict
    formula = tuple(
        (name, values.get(name, param.default))
        for name, param in sorted(spec.params.items())
        if param.kind == ParamKind.FORMULA and not (statistic_only and param.p_value_only)
    )
    family = None if statistic_only and spec.p_value_families else descriptor.formula_family
    return family, formula


def convention_kind(a: ConventionDescriptor, b: ConventionDescriptor,
                    quantity: Optional[Quantity] = None) -> Classification:
    """ID when the formulas behind the quantity differ, RD when only the reporting does"""
    return Classification.ID if formula_signature(a, quantity) != formula_signature(b, quantity) else Classification.RD


def abs_delta(a: MetricValue, b: MetricValue) -> Optional[float]:
    """|a - b|; 0 for two undefined values or equal infinities, None when exactly one side is undefined"""
    if a.value is None and b.value is None:
        return 0.0
    if a.value is None or b.value is None:
        return None
    if math.isinf(a.value) or math.isinf(b.value):
        return 0.0 if a.value == b.value else math.inf
    return abs(a.value - b.value)


def classify_pair(a: MetricValue, b: MetricValue, tolerance: float) -> DiscrepancyRecord:
    """Compare two values of one metric and quantity; the record is oriented by descriptor key"""
    if b.descriptor.key < a.descriptor.key:
        a, b = b, a
    delta = abs_delta(a, b)
    if Validity.OUT_OF_DOMAIN in (a.validity, b.validity):
        label = Classification.BUG
    elif delta is not None and delta <= tolerance:
        label = Classification.NONE
    else:
        label = convention_kind(a.descriptor, b.descriptor, a.quantity)
    return DiscrepancyRecord(
        metric_id=a.descriptor.metric_id,
        quantity=a.quantity,
        descriptor_a=a.descriptor,
        descriptor_b=b.descriptor,
        value_a=a.value,
        value_b=b.value,
        validity_a=a.validity,
        validity_b=b.validity,
        abs_delta=delta,
        classification=label,
    )


def classify_discrepancies(values: Sequence[MetricValue], tolerance: float = 1e-9,
                           stochastic_tolerance: Optional[float] = None) -> List[DiscrepancyRecord]:
    """
    Classify every unordered pair of values sharing a metric and quantity

    Args:
        values: Computed values, any order
        tolerance: Largest |delta| still counted as agreement
        stochastic_tolerance: Tolerance for Monte Carlo metrics (defaults to tolerance;
            the larger of the two applies)

    Returns:
        List[DiscrepancyRecord]: Sorted by (metric, quantity, |delta| descending)
    """
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    registry = get_registry()
    groups: Dict[Tuple, List[MetricValue]] = defaultdict(list)
    for value in values:
        groups[(value.descriptor.metric_id, value.quantity)].append(value)

    records: List[DiscrepancyRecord] = []
    for (metric_id, quantity), members in groups.items():
        limit = tolerance
        if registry.get(metric_id).stochastic and stochastic_tolerance is not None:
            limit = max(tolerance, stochastic_tolerance)
        members = sorted(members, key=lambda v: v.descriptor.key)
        for a, b in itertools.combinations(members, 2):
            if a.descriptor == b.descriptor:
                continue
            records.append(classify_pair(a, b, limit))
    records.sort(key=lambda r: r.sort_key)
    flagged = sum(1 for r in records if r.classification != Classification.NONE)
    logger.debug(f"Classified {len(records)} pairs, {flagged} discrepant")
    return records


def worst(records: Sequence[DiscrepancyRecord]) -> Classification:
    """Most severe classification present (NONE when empty)"""
    return max((r.classification for r in records), key=lambda c: c.severity, default=Classification.NONE)


def exit_code(records: Sequence[DiscrepancyRecord]) -> int:
    """0 without ID/BUG records, 2 when an ID is present, 3 when a BUG is present"""
    label = worst(records)
    if label == Classification.BUG:
        return 3
    if label == Classification.ID:
        return 2
    return 0
