"""
Variant sweeps: every selected convention of every selected metric.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, List, Optional, Sequence

from modules.metrics.core import ConventionDescriptor, MetricId, MetricValue
from modules.metrics.registry import get_registry

from .datasets import n_classes_of
from .dispatch import compute_metric
from .models import RunConfig
from .presets import select_variants

logger = logging.getLogger(__name__)


def _seeded(descriptor: ConventionDescriptor, config: RunConfig) -> ConventionDescriptor:
    """Stochastic variants take the run's seed and resample count"""
    if not get_registry().get(descriptor.metric_id).stochastic or descriptor.param("seed") is None:
        return descriptor
    return descriptor.with_params(seed=config.seed, n_resamples=config.mc_resamples)


def sweep_descriptors(metric_id, data: Any, config: RunConfig) -> List[ConventionDescriptor]:
    """Descriptors a run evaluates for one metric"""
    selected = select_variants(metric_id, n_classes_of(data), config.variants)
    return [_seeded(d, config) for d in selected]


def run_variants(data: Any, metric_id, config: RunConfig,
                 descriptors: Optional[Sequence[ConventionDescriptor]] = None) -> List[MetricValue]:
    """
    Compute every selected variant of one metric

    Args:
        data: Task container
        metric_id: Catalog id
        config: Run configuration
        descriptors: Explicit variants; defaults to the configured selection

    Returns:
        List[MetricValue]: Descriptor order, each variant computed independently;
        failures are Undefined entries
    """
    metric_id = MetricId(metric_id)
    descriptors = list(descriptors) if descriptors is not None else sweep_descriptors(metric_id, data, config)
    logger.debug(f"Sweeping {len(descriptors)} variants of {metric_id.value}")
    if config.workers > 1 and len(descriptors) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            batches = list(pool.map(lambda d: compute_metric(d, data, config), descriptors))
    else:
        batches = [compute_metric(d, data, config) for d in descriptors]
    return [value for batch in batches for value in batch]


def run_task(data: Any, config: RunConfig) -> List[MetricValue]:
    """
    Sweep every admitted metric of the configured task family

    Args:
        data: Task container
        config: Run configuration

    Returns:
        List[MetricValue]: Catalog order, then variant order
    """
    values: List[MetricValue] = []
    metric_ids = [m for m in get_registry().metrics_for_task(config.task) if config.admits(m)]
    for metric_id in metric_ids:
        values.extend(run_variants(data, metric_id, config))
    undefined = sum(1 for v in values if not v.is_defined)
    logger.info(f"✅ Computed {len(values)} values over {len(metric_ids)} metrics ({undefined} undefined)")
    return values
