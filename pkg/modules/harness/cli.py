"""
Command-line interface of the metric harness.

    compute       sweep convention variants of every metric and write the values
    diff          sweep, classify every pair as NONE/RD/ID/BUG and write a report
    list-metrics  show the metric catalog
    make-fixture  write a seeded synthetic dataset in the input grammar
    phenomena     run the shipped discrepancy phenomenon fixtures
"""

import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence

from modules.config import HarnessSettings, get_harness_config
from modules.metrics.core import MetricError, TaskFamily
from modules.metrics.registry import get_registry

from .datasets import DatasetParseError, load_dataset, write_dataset
from .discrepancy import classify_discrepancies, exit_code
from .fixtures import PHENOMENA, random_dataset, run_phenomenon
from .models import ReportFormat, RunConfig
from .presets import ALL_VARIANTS, PRESETS, parse_selection
from .report import emit_report, emit_values
from .runner import run_task

logger = logging.getLogger(__name__)

TASKS = [t.value for t in TaskFamily]


def _metric_list(text: Optional[str]) -> Optional[List[str]]:
    if not text:
        return None
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metric-harness",
        description="Compute evaluation metrics under every convention variant and classify the differences",
    )
    parser.add_argument("--seed", type=int, default=None, help="Monte Carlo and fixture seed (unsigned 64-bit)")
    parser.add_argument("--config", default=None, help="JSON settings file")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--workers", type=int, default=None, help="Parallel variant workers")
    sub = parser.add_subparsers(dest="command", required=True)

    def dataset_args(p: argparse.ArgumentParser):
        p.add_argument("--task", required=True, choices=TASKS)
        p.add_argument("--input", required=True, help="Dataset file (or 'a.png,b.png' for 2D grids)")
        p.add_argument("--truth-col", default=None, help="Truth column of tabular input")
        p.add_argument("--variants", default=ALL_VARIANTS,
                       help=f"'all' or comma-separated presets: {', '.join(sorted(PRESETS))}")
        p.add_argument("--metrics", default=None, help="Comma-separated metric ids (default: every metric of the task)")

    compute = sub.add_parser("compute", help="Compute every selected variant")
    dataset_args(compute)
    compute.add_argument("--out", required=True, help="Output file")
    compute.add_argument("--format", default="json", choices=[f.value for f in ReportFormat])

    diff = sub.add_parser("diff", help="Classify discrepancies between variants")
    dataset_args(diff)
    diff.add_argument("--tol", type=float, default=None, help="Agreement tolerance")
    diff.add_argument("--format", default="json", choices=[f.value for f in ReportFormat])
    diff.add_argument("--out", default=None, help="Report file (default: stdout)")

    listing = sub.add_parser("list-metrics", help="Show the metric catalog")
    listing.add_argument("--task", default=None, choices=TASKS)
    listing.add_argument("--json", action="store_true", help="Print the full catalog manifest")

    fixture = sub.add_parser("make-fixture", help="Write a seeded synthetic dataset")
    fixture.add_argument("--task", required=True, choices=TASKS)
    fixture.add_argument("--out", required=True)

    phenomena = sub.add_parser("phenomena", help="Run the discrepancy phenomenon fixtures")
    phenomena.add_argument("--name", default=None, choices=sorted(PHENOMENA))
    return parser


def _settings(args: argparse.Namespace) -> HarnessSettings:
    settings = get_harness_config(args.config).settings
    logging.basicConfig(
        level=getattr(logging, (args.log_level or settings.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    return settings


def _run_config(args: argparse.Namespace, settings: HarnessSettings, **extra) -> RunConfig:
    parse_selection(args.variants)
    return RunConfig.from_settings(
        settings, args.task,
        metrics=_metric_list(args.metrics),
        variants=args.variants,
        seed=args.seed,
        workers=args.workers,
        input_path=args.input,
        truth_col=args.truth_col,
        **extra,
    )


def _compute(args, settings) -> int:
    config = _run_config(args, settings, output_path=args.out, report_format=args.format)
    values = run_task(load_dataset(config.input_path, config.task, config.truth_col), config)
    emit_values(values, config.report_format, config.output_path, config.display_decimals)
    return 0


def _diff(args, settings) -> int:
    config = _run_config(args, settings, tolerance=args.tol, output_path=args.out, report_format=args.format)
    values = run_task(load_dataset(config.input_path, config.task, config.truth_col), config)
    records = classify_discrepancies(values, config.tolerance, config.stochastic_tolerance)
    text = emit_report(records, config.report_format, config.output_path, config.display_decimals,
                       config.flag_average_ambiguity)
    if config.output_path is None:
        sys.stdout.write(text)
    return exit_code(records)


def _list_metrics(args, settings) -> int:
    registry = get_registry()
    if args.json:
        sys.stdout.write(json.dumps(registry.get_manifest(args.task), indent=2, sort_keys=True) + "\n")
        return 0
    ids = registry.metrics_for_task(args.task) if args.task else list(registry.metrics)
    for metric_id in ids:
        spec = registry.get(metric_id)
        sweep = len(registry.register_variants(metric_id))
        sys.stdout.write(f"{metric_id.value:<28} {','.join(t.value for t in spec.tasks):<30} "
                         f"{sweep:>2} variants  {spec.description}\n")
    return 0


def _make_fixture(args, settings) -> int:
    seed = args.seed if args.seed is not None else settings.seed
    write_dataset(random_dataset(args.task, seed), args.out)
    return 0


def _phenomena(args, settings) -> int:
    names = [args.name] if args.name else sorted(PHENOMENA)
    outcomes = [run_phenomenon(name) for name in names]
    for outcome in outcomes:
        observed = ",".join(sorted(c.value for c in outcome.observed)) or "NONE"
        status = "ok" if outcome.passed else "MISMATCH"
        sys.stdout.write(f"{outcome.name:<26} expected={outcome.expected.value:<3} observed={observed:<8} {status}\n")
    return 0 if all(o.passed for o in outcomes) else 1


COMMANDS = {
    "compute": _compute,
    "diff": _diff,
    "list-metrics": _list_metrics,
    "make-fixture": _make_fixture,
    "phenomena": _phenomena,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI

    Args:
        argv: Arguments without the program name; defaults to sys.argv

    Returns:
        int: 0 success (diff: no ID/BUG), 2 ID present, 3 BUG present, 1 failure
    """
    args = build_parser().parse_args(argv)
    try:
        settings = _settings(args)
        return COMMANDS[args.command](args, settings)
    except DatasetParseError as e:
        logger.error(f"❌ Dataset error: {e}")
    except (MetricError, ValueError) as e:
        logger.error(f"❌ {e}")
    except OSError as e:
        logger.error(f"❌ I/O error: {e}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
