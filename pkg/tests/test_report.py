import json
import math

from modules.harness.discrepancy import classify_discrepancies
from modules.harness.report import (
    ALL_CONSISTENT, average_ambiguities, build_document, emit_report, emit_values, values_document,
)
from modules.metrics.core import MetricId, MetricValue, Quantity, ReportingMode
from modules.metrics.registry import describe

MICRO = describe(MetricId.PRECISION, "PRF", ReportingMode.micro())
MACRO = describe(MetricId.PRECISION, "PRF", ReportingMode.macro())
WEIGHTED = describe(MetricId.PRECISION, "PRF", ReportingMode.weighted())
R2 = describe(MetricId.R_SQUARED, "CoefficientOfDetermination")
PEARSON_R2 = describe(MetricId.R_SQUARED, "SquaredPearson")
POOLED = describe(MetricId.T_TEST, "Pooled", tail="two-sided")
WELCH = describe(MetricId.T_TEST, "Welch", tail="two-sided")


def mixed_records():
    return classify_discrepancies([
        MetricValue.ok(MICRO, 0.9), MetricValue.ok(MACRO, 0.475), MetricValue.ok(WEIGHTED, 0.8155),
        MetricValue.ok(R2, 0.2), MetricValue.ok(PEARSON_R2, 1.0),
        MetricValue(descriptor=POOLED, value=1.51, quantity=Quantity.P_VALUE),
        MetricValue.ok(WELCH, 0.3, quantity=Quantity.P_VALUE),
    ])


def test_document_groups_bug_then_id_then_rd():
    document = build_document(mixed_records())
    classes = [row["class"] for row in document["records"]]
    assert classes == ["BUG", "ID", "RD", "RD", "RD"]
    assert document["exit_code"] == 3
    assert document["counts"] == {"BUG": 1, "ID": 1, "RD": 3, "NONE": 0}
    assert document["metrics"] == {"precision": "RD", "r_squared": "ID", "t_test.p_value": "BUG"}
    assert document["summary"] == "1 BUG, 1 ID, 3 RD out of 5 pairs"


def test_rows_keep_full_precision_and_round_for_display():
    document = build_document(mixed_records(), decimals=2)
    rd = [row for row in document["records"] if row["class"] == "RD"]
    largest = rd[0]
    assert largest["delta"] == abs(0.9 - 0.475)
    assert {largest["display_a"], largest["display_b"]} == {"0.90", "0.48"}
    assert {largest["variant_a"], largest["variant_b"]} == {"PRF/Micro", "PRF/Macro"}


def test_all_consistent_summary():
    records = classify_discrepancies([MetricValue.ok(MICRO, 0.5), MetricValue.ok(MACRO, 0.5)])
    document = build_document(records)
    assert document["summary"].startswith(ALL_CONSISTENT)
    assert document["records"] == []
    assert document["exit_code"] == 0
    assert document["metrics"] == {"precision": "consistent"}


def test_average_ambiguity_flag():
    records = mixed_records()
    assert average_ambiguities(records) == ["precision"]
    assert build_document(records)["average_ambiguity"] == ["precision"]
    assert "average_ambiguity" not in build_document(records, flag_average_ambiguity=False)


def test_json_report_is_deterministic(tmp_path):
    out = tmp_path / "nested" / "report.json"
    first = emit_report(mixed_records(), "json", out)
    second = emit_report(mixed_records(), "json")
    assert first == second
    assert out.read_text() == first
    assert json.loads(first)["exit_code"] == 3


def test_markdown_report():
    text = emit_report(mixed_records(), "md")
    assert text.startswith("# Metric Consistency Report\n")
    assert "## Discrepancies" in text
    assert "| BUG " in text
    assert "## Average Ambiguity" in text
    assert "- `precision`" in text

    clean = emit_report([], "md")
    assert "- None" in clean
    assert "Average Ambiguity" not in clean


def test_values_document():
    values = [MetricValue.ok(MICRO, 2.0 / 3.0), MetricValue.undefined(MACRO, "empty class"),
              MetricValue.ok(R2, math.inf)]
    rows = values_document(values, decimals=3)["values"]
    assert rows[0]["value"] == 2.0 / 3.0
    assert rows[0]["display"] == "0.667"
    assert rows[1]["value"] is None
    assert rows[1]["display"] == "Undefined"
    assert rows[1]["notes"] == ["empty class"]
    assert rows[2]["value"] == "inf"


def test_values_markdown(tmp_path):
    out = tmp_path / "values.md"
    text = emit_values([MetricValue.ok(MICRO, 0.25)], "md", out)
    assert text.startswith("# Metric Values\n")
    assert "PRF/Micro" in text
    assert out.read_text() == text
