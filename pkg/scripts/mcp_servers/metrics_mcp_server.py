#!/usr/bin/env python3
"""
Metric Consistency MCP Server
Exposes the metric catalog, variant sweeps and discrepancy reports as MCP tools over stdio.
"""

import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent.parent))

from mcp.server.fastmcp import FastMCP
import json
import logging
from typing import Any, Dict, Optional

from modules.config import HarnessSettings, load_harness_settings
from modules.harness import (
    PHENOMENA,
    RunConfig,
    build_document,
    classify_discrepancies,
    load_dataset,
    run_phenomenon,
    run_task,
    values_document,
)
from modules.metrics.core import MetricError
from modules.metrics.registry import get_registry

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger('Metrics_MCP')

mcp = FastMCP("Metric_Consistency_MCP")

# Settings are read on first tool use
_settings: Optional[HarnessSettings] = None


def _get_settings() -> HarnessSettings:
    global _settings
    if _settings is None:
        _settings = load_harness_settings()
        logger.info("✅ Harness settings loaded")
    return _settings


def _metric_list(metrics: str):
    parts = [m.strip() for m in metrics.split(",") if m.strip()]
    return parts or None


def _sweep(task: str, input_path: str, variants: str, metrics: str, **overrides):
    config = RunConfig.from_settings(
        _get_settings(), task,
        metrics=_metric_list(metrics),
        variants=variants or "all",
        input_path=input_path,
        **overrides,
    )
    values = run_task(load_dataset(config.input_path, config.task, config.truth_col), config)
    return config, values


@mcp.resource("metrics://catalog")
async def metric_catalog() -> Dict[str, Any]:
    """Manifest of every registered metric, its formula families and parameters"""
    return get_registry().get_manifest()


@mcp.tool()
async def list_metrics(task: str = "") -> str:
    """List registered metrics, optionally for one task family"""
    try:
        registry = get_registry()
        manifest = registry.get_manifest(task or None)
        return json.dumps({
            "task": task or "all",
            "total_metrics": len(manifest["metrics"]),
            "metrics": {
                metric_id: {
                    "description": entry["description"],
                    "families": entry["families"],
                    "variants": len(registry.register_variants(metric_id)),
                }
                for metric_id, entry in manifest["metrics"].items()
            },
        }, indent=2, sort_keys=True)
    except ValueError as e:
        return json.dumps({"error": f"Failed to list metrics: {str(e)}"})


@mcp.tool()
async def compute_metrics(task: str, input_path: str, variants: str = "all", metrics: str = "") -> str:
    """Compute every selected convention variant of the task's metrics on a dataset file"""
    try:
        config, values = _sweep(task, input_path, variants, metrics)
        document = values_document(values, config.display_decimals)
        document["task"] = config.task.value
        return json.dumps(document, indent=2, sort_keys=True)
    except (MetricError, ValueError, OSError) as e:
        logger.error(f"❌ compute_metrics failed: {e}")
        return json.dumps({"error": f"Computation failed: {str(e)}", "input_path": input_path})


@mcp.tool()
async def diff_metrics(task: str, input_path: str, variants: str = "all", metrics: str = "",
                       tolerance: float = -1.0) -> str:
    """Sweep variants and classify every pair as NONE, RD, ID or BUG"""
    try:
        config, values = _sweep(task, input_path, variants, metrics,
                                tolerance=tolerance if tolerance >= 0 else None)
        records = classify_discrepancies(values, config.tolerance, config.stochastic_tolerance)
        document = build_document(records, config.display_decimals, config.flag_average_ambiguity)
        return json.dumps(document, indent=2, sort_keys=True)
    except (MetricError, ValueError, OSError) as e:
        logger.error(f"❌ diff_metrics failed: {e}")
        return json.dumps({"error": f"Discrepancy analysis failed: {str(e)}", "input_path": input_path})


@mcp.tool()
async def run_phenomena(name: str = "") -> str:
    """Run the shipped discrepancy phenomenon fixtures and report expected against observed labels"""
    try:
        names = [name] if name else sorted(PHENOMENA)
        outcomes = [run_phenomenon(n) for n in names]
        return json.dumps({
            "passed": all(o.passed for o in outcomes),
            "phenomena": {
                o.name: {
                    "expected": o.expected.value,
                    "observed": sorted(c.value for c in o.observed),
                    "passed": o.passed,
                }
                for o in outcomes
            },
        }, indent=2, sort_keys=True)
    except MetricError as e:
        return json.dumps({"error": f"Phenomenon run failed: {str(e)}", "name": name})


if __name__ == "__main__":
    logger.info("🚀 Starting Metric Consistency MCP Server")
    mcp.run()
