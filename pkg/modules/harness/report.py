"""
Discrepancy report emission (JSON document or markdown table).

Reports carry no timestamps so repeated runs with the same configuration
and seed are byte-identical.
"""

import json
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from modules.metrics.core import MetricValue, ReportingKind
from modules.metrics.numeric import round_half_even

from .discrepancy import exit_code, worst
from .models import Classification, DiscrepancyRecord, ReportFormat, json_number

logger = logging.getLogger(__name__)

GROUP_ORDER = (Classification.BUG, Classification.ID, Classification.RD)
ALL_CONSISTENT = "all consistent"
SUMMARY_LABELS = {
    Classification.NONE: "consistent",
    Classification.RD: "RD",
    Classification.ID: "ID",
    Classification.BUG: "BUG",
}


def ordered_records(records: Sequence[DiscrepancyRecord]) -> List[DiscrepancyRecord]:
    """Discrepant records grouped BUG, ID, RD; each group by (metric, |delta| descending)"""
    return [r for label in GROUP_ORDER for r in sorted(records, key=lambda r: r.sort_key) if r.classification == label]


def metric_summary(records: Sequence[DiscrepancyRecord]) -> "OrderedDict[str, str]":
    """Worst classification per metric label"""
    by_metric: Dict[str, List[DiscrepancyRecord]] = {}
    for record in records:
        by_metric.setdefault(record.metric_label, []).append(record)
    return OrderedDict((metric, SUMMARY_LABELS[worst(group)]) for metric, group in sorted(by_metric.items()))


def average_ambiguities(records: Sequence[DiscrepancyRecord]) -> List[str]:
    """Metrics whose macro and support-weighted averages disagree"""
    flagged = set()
    for record in records:
        kinds = {record.descriptor_a.reporting_mode.kind, record.descriptor_b.reporting_mode.kind}
        if kinds == {ReportingKind.MACRO, ReportingKind.WEIGHTED} and record.classification != Classification.NONE:
            flagged.add(record.metric_label)
    return sorted(flagged)


def summary_line(records: Sequence[DiscrepancyRecord]) -> str:
    counts = {label: sum(1 for r in records if r.classification == label) for label in GROUP_ORDER}
    if not any(counts.values()):
        return f"{ALL_CONSISTENT}: {len(records)} pairs within tolerance"
    return ", ".join(f"{counts[label]} {label.value}" for label in GROUP_ORDER) + f" out of {len(records)} pairs"


def build_document(records: Sequence[DiscrepancyRecord], decimals: int = 2,
                   flag_average_ambiguity: bool = True) -> Dict[str, Any]:
    """Structured report"""
    rows = [r.to_row(decimals) for r in ordered_records(records)]
    document: Dict[str, Any] = {
        "summary": summary_line(records),
        "exit_code": exit_code(records),
        "counts": {label.value: sum(1 for r in records if r.classification == label)
                   for label in GROUP_ORDER + (Classification.NONE,)},
        "metrics": metric_summary(records),
        "records": rows,
    }
    if flag_average_ambiguity:
        document["average_ambiguity"] = average_ambiguities(records)
    return document


def _markdown_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> List[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    line = lambda cells: "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
    return [line(header), "| " + " | ".join("-" * w for w in widths) + " |"] + [line(r) for r in rows]


def render_markdown(document: Dict[str, Any]) -> str:
    lines = ["# Metric Consistency Report", "", f"Summary: {document['summary']}", ""]

    lines.extend(["## Metrics", ""])
    if document["metrics"]:
        lines.extend(_markdown_table(["metric", "status"], [[m, s] for m, s in document["metrics"].items()]))
    else:
        lines.append("- None")

    lines.extend(["", "## Discrepancies", ""])
    rows = document["records"]
    if rows:
        header = ["class", "metric", "variant_a", "variant_b", "value_a", "value_b", "delta"]
        table = [[r["class"], r["metric"], r["variant_a"], r["variant_b"], r["display_a"], r["display_b"],
                  "n/a" if r["delta"] is None else str(r["delta"])]
                 for r in rows]
        lines.extend(_markdown_table(header, table))
    else:
        lines.append("- None")

    ambiguous = document.get("average_ambiguity")
    if ambiguous:
        lines.extend(["", "## Average Ambiguity", ""])
        lines.extend(f"- `{m}`: macro and support-weighted averages differ; an unlabelled average is ambiguous"
                     for m in ambiguous)
    return "\n".join(lines) + "\n"


def render(document: Dict[str, Any], fmt: Union[ReportFormat, str]) -> str:
    if ReportFormat(fmt) == ReportFormat.MARKDOWN:
        return render_markdown(document)
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def emit_report(records: Sequence[DiscrepancyRecord], fmt: Union[ReportFormat, str] = ReportFormat.JSON,
                out: Optional[Union[str, Path]] = None, decimals: int = 2,
                flag_average_ambiguity: bool = True) -> str:
    """
    Render a discrepancy report and optionally write it

    Args:
        records: Classified pairs
        fmt: json or md
        out: Output path; nothing is written when omitted
        decimals: Display rounding (full precision is always kept)
        flag_average_ambiguity: List metrics whose macro and weighted averages differ

    Returns:
        str: Report text

    Raises:
        OSError: Unwritable output path
    """
    text = render(build_document(records, decimals, flag_average_ambiguity), fmt)
    if out is not None:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"✅ Wrote report to {path}")
    return text


def values_document(values: Sequence[MetricValue], decimals: int = 2) -> Dict[str, Any]:
    """Structured listing of computed values in sweep order"""
    return {
        "values": [
            {
                "metric": v.descriptor.metric_id.value,
                "quantity": v.quantity.value,
                "variant": v.descriptor.variant,
                "value": json_number(v.value),
                "display": round_half_even(v.value, decimals) if v.value is not None else v.validity.value,
                "validity": v.validity.value,
                "notes": list(v.notes),
            }
            for v in values
        ],
    }


def emit_values(values: Sequence[MetricValue], fmt: Union[ReportFormat, str] = ReportFormat.JSON,
                out: Optional[Union[str, Path]] = None, decimals: int = 2) -> str:
    """Render computed values as JSON or a markdown table and optionally write them"""
    document = values_document(values, decimals)
    if ReportFormat(fmt) == ReportFormat.MARKDOWN:
        rows = [[r["metric"], r["quantity"], r["variant"], r["display"], "; ".join(r["notes"])]
                for r in document["values"]]
        text = "\n".join(["# Metric Values", ""] +
                         _markdown_table(["metric", "quantity", "variant", "value", "notes"], rows)) + "\n"
    else:
        text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if out is not None:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"✅ Wrote {len(values)} values to {path}")
    return text
