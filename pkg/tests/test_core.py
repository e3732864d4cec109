import math

import numpy as np
import pytest
from hypothesis import given, settings
from pydantic import ValidationError

from modules.metrics.core import (
    ConfusionMatrix, ConventionDescriptor, DomainError, LabelError, LabelVector, MetricId, MetricValue, Quantity,
    ReportingKind, ReportingMode, ScoreVector, ShapeError, TestResult, UnknownMetricError, Validity,
    confusion_matrix,
)
from modules.metrics.numeric import aggregate, round_half_even, safe_ratio
from modules.metrics.core import FillPolicy
from modules.metrics.registry import describe, get_registry

from conftest import label_pairs


def test_confusion_matrix_identity():
    cm = confusion_matrix([0, 1], [0, 1], (0, 1))
    assert cm.counts.tolist() == [[1, 0], [0, 1]]


def test_confusion_matrix_half_right():
    cm = confusion_matrix([0, 0, 1, 1], [0, 1, 1, 0], (0, 1))
    assert cm.counts.tolist() == [[1, 1], [1, 1]]


def test_confusion_matrix_three_classes():
    cm = confusion_matrix([0, 1, 2, 2, 1], [0, 2, 2, 1, 1], (0, 1, 2))
    assert cm.counts.tolist() == [[1, 0, 0], [0, 1, 1], [0, 1, 1]]
    assert cm.total == 5


def test_confusion_matrix_length_mismatch():
    with pytest.raises(ShapeError):
        confusion_matrix([0, 1, 1], [0, 1], (0, 1))


def test_confusion_matrix_label_outside_set():
    with pytest.raises(LabelError):
        confusion_matrix([0, 1, 2], [0, 1, 1], (0, 1))


def test_confusion_matrix_rejects_negative_counts():
    with pytest.raises(DomainError):
        ConfusionMatrix.from_counts([[1, -1], [0, 2]])
    with pytest.raises(ShapeError):
        ConfusionMatrix.from_counts([[1]])


@pytest.mark.property_based
@given(label_pairs())
@settings(max_examples=200)
def test_confusion_matrix_margins_match_vectors(data):
    y_true, y_pred, labels = data
    cm = confusion_matrix(y_true, y_pred, labels)
    assert cm.total == len(y_true)
    for i, label in enumerate(labels):
        assert cm.support[i] == sum(1 for v in y_true if v == label)
        assert cm.predicted[i] == sum(1 for v in y_pred if v == label)


def test_label_vector_needs_two_labels():
    with pytest.raises(LabelError):
        LabelVector(np.array([0, 0]), (0,))


def test_score_vector_probability_range():
    with pytest.raises(DomainError):
        ScoreVector(np.array([0.2, 1.2]))
    assert len(ScoreVector(np.array([3.0, -1.0]), probability=False)) == 2


def test_reporting_mode_parse_and_str():
    assert ReportingMode.parse("PerClass(1)") == ReportingMode.per_class(1)
    assert ReportingMode.parse("Micro").kind == ReportingKind.MICRO
    assert str(ReportingMode.binary_positive(0)) == "BinaryPositive(0)"
    with pytest.raises(ValidationError):
        ReportingMode(kind=ReportingKind.PER_CLASS)
    with pytest.raises(ValidationError):
        ReportingMode(kind=ReportingKind.MACRO, class_index=1)


def test_descriptor_rejects_unknown_keys():
    with pytest.raises(ValidationError):
        ConventionDescriptor(metric_id=MetricId.PRECISION, formula_family="PRF",
                             reporting_mode=ReportingMode.micro(), params={"window": 7})
    with pytest.raises(UnknownMetricError):
        describe(MetricId.PRECISION, "PRF", ReportingMode.micro(), window=7)
    with pytest.raises(UnknownMetricError):
        describe(MetricId.LEVENE, "ModeCentered")


def test_descriptor_params_are_order_independent():
    a = describe(MetricId.SSIM, "Gaussian", window=11, sigma=1.5)
    b = describe(MetricId.SSIM, "Gaussian", sigma=1.5, window=11)
    assert a == b
    assert a.key == b.key
    assert a.param("sigma") == 1.5
    assert a.with_params(sigma=2.0).param("sigma") == 2.0


def test_p_value_outside_unit_interval_is_out_of_domain():
    descriptor = describe(MetricId.T_TEST, "Pooled")
    value = MetricValue(descriptor=descriptor, value=1.51, quantity=Quantity.P_VALUE)
    assert value.validity == Validity.OUT_OF_DOMAIN
    assert value.value == 1.51
    statistic = MetricValue(descriptor=descriptor, value=1.51, quantity=Quantity.STATISTIC)
    assert statistic.validity == Validity.OK


def test_test_result_validity_and_projection():
    descriptor = describe(MetricId.T_TEST, "Pooled")
    result = TestResult(descriptor=descriptor, statistic=2.0, p_value=-0.2)
    assert result.validity == Validity.OUT_OF_DOMAIN
    p = MetricValue.from_test_result(result, Quantity.P_VALUE)
    t = MetricValue.from_test_result(result, Quantity.STATISTIC)
    assert p.validity == Validity.OUT_OF_DOMAIN
    assert t.validity == Validity.OK and t.value == 2.0


def test_undefined_carries_no_value():
    descriptor = describe(MetricId.ACCURACY, "Standard")
    assert MetricValue.undefined(descriptor, "empty").value is None
    nan = MetricValue(descriptor=descriptor, value=math.nan)
    assert nan.validity == Validity.UNDEFINED and nan.value is None


def test_register_variants_examples():
    registry = get_registry()
    modes = [str(d.reporting_mode) for d in registry.register_variants(MetricId.PRECISION)]
    assert sorted(modes) == sorted(["Micro", "Macro", "Weighted", "PerClass(0)", "PerClass(1)", "BinaryPositive(1)"])
    families = [d.formula_family for d in registry.register_variants(MetricId.R_SQUARED)]
    assert families == ["CoefficientOfDetermination", "SquaredPearson", "Adjusted"]
    families = [d.formula_family for d in registry.register_variants(MetricId.LEVENE)]
    assert families == ["MeanCentered", "MedianCentered"]


def test_register_variants_is_stable_without_duplicates():
    registry = get_registry()
    for metric_id in MetricId:
        first = registry.register_variants(metric_id, 3)
        second = registry.register_variants(metric_id, 3)
        assert first == second
        assert len(set(first)) == len(first)
        assert first, metric_id


def test_unknown_metric_id():
    with pytest.raises(UnknownMetricError):
        get_registry().register_variants("nonexistent_metric")


def test_every_metric_has_an_implementation():
    registry = get_registry()
    for metric_id in MetricId:
        assert callable(registry.load_implementation(metric_id)), metric_id


def test_safe_ratio_and_aggregate():
    assert safe_ratio(1, 0) is None
    assert aggregate([1.0, None], FillPolicy.UNDEFINED) is None
    assert aggregate([1.0, None], FillPolicy.DROP) == 1.0
    assert aggregate([1.0, None], FillPolicy.ZERO) == 0.5
    assert aggregate([1.0, 0.0], FillPolicy.UNDEFINED, weights=[3, 1]) == 0.75
    assert aggregate([None, 0.5], FillPolicy.UNDEFINED, weights=[0, 2]) == 0.5


def test_round_half_even_display():
    assert round_half_even(0.125) == "0.12"
    assert round_half_even(0.135) == "0.14"
    assert round_half_even(2.5, 0) == "2"
    assert round_half_even(-0.001) == "0.00"
    assert round_half_even(math.inf) == "inf"
    assert round_half_even(None) is None
