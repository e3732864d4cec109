import numpy as np
import pytest

from modules.harness.datasets import ClassificationData
from modules.harness.discrepancy import classify_discrepancies, exit_code
from modules.harness.dispatch import compute_metric
from modules.harness.fixtures import PHENOMENA, get_phenomenon, random_dataset, run_phenomenon
from modules.harness.models import Classification, RunConfig
from modules.harness.runner import run_task, run_variants, sweep_descriptors
from modules.metrics.core import MetricId, Quantity, TaskFamily, UnknownMetricError, Validity
from modules.metrics.registry import describe, get_registry
from modules.metrics.regress import PairedSeries
from modules.metrics.stattest import SampleGroups


def test_compute_metric_relabels_with_requested_descriptor():
    descriptor = describe(MetricId.R_SQUARED, "SquaredPearson")
    data = PairedSeries(np.array([1.0, 2.0, 3.0]), np.array([2.0, 4.0, 6.0]))
    (value,) = compute_metric(descriptor, data)
    assert value.descriptor == descriptor
    assert value.value == pytest.approx(1.0)


def test_hypothesis_tests_yield_statistic_and_p_value():
    descriptor = describe(MetricId.T_TEST, "Pooled", tail="two-sided")
    data = SampleGroups.of([1.0, 2.0, 3.0, 4.0, 5.0], [2.0, 3.0, 4.0, 5.0, 6.0])
    statistic, p_value = compute_metric(descriptor, data)
    assert (statistic.quantity, p_value.quantity) == (Quantity.STATISTIC, Quantity.P_VALUE)
    assert statistic.value == pytest.approx(-1.0)
    assert p_value.descriptor == descriptor


def test_precondition_failures_become_undefined():
    descriptor = describe(MetricId.T_TEST, "Pooled", tail="two-sided")
    data = PairedSeries(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    values = compute_metric(descriptor, data)
    assert [v.validity for v in values] == [Validity.UNDEFINED, Validity.UNDEFINED]
    assert "SampleGroups" in values[0].notes[0]


def test_stochastic_variants_take_the_run_seed():
    data = random_dataset("stattest")
    config = RunConfig(task="stattest", seed=7, mc_resamples=499)
    sampled = [d for d in sweep_descriptors(MetricId.PERMUTATION_TEST, data, config)
               if d.formula_family == "MonteCarlo"]
    assert [(d.param("seed"), d.param("n_resamples")) for d in sampled] == [(7, 499)]
    exact = sweep_descriptors(MetricId.T_TEST, data, config)
    assert exact == get_registry().register_variants(MetricId.T_TEST)


def test_workers_do_not_change_results():
    data = random_dataset("classification")
    serial = run_variants(data, MetricId.F1, RunConfig(task="classification"))
    parallel = run_variants(data, MetricId.F1, RunConfig(task="classification", workers=4))
    assert serial == parallel
    assert len(serial) == len(get_registry().register_variants(MetricId.F1, 3))


def test_run_task_honours_metric_filter():
    config = RunConfig(task="regression", metrics=["mae", "r_squared"])
    values = run_task(random_dataset("regression"), config)
    assert {v.descriptor.metric_id for v in values} == {MetricId.MAE, MetricId.R_SQUARED}
    assert [v.descriptor.metric_id for v in values][0] == MetricId.MAE


def test_variant_selection_narrows_the_sweep():
    config = RunConfig(task="classification", metrics=["precision"], variants="per_class_macro")
    (value,) = run_task(random_dataset("classification"), config)
    assert value.descriptor.variant == "PRF/Macro"


@pytest.mark.parametrize("task", [t.value for t in TaskFamily])
def test_random_datasets_sweep_without_out_of_domain_values(task):
    config = RunConfig(task=task, mc_resamples=199)
    values = run_task(random_dataset(task), config)
    assert values
    assert all(v.validity != Validity.OUT_OF_DOMAIN for v in values)
    assert exit_code(classify_discrepancies(values, config.tolerance, config.stochastic_tolerance)) != 3


def test_random_dataset_is_seeded():
    a, b = random_dataset("image2d", seed=3), random_dataset("image2d", seed=3)
    np.testing.assert_array_equal(a.test, b.test)
    assert not np.array_equal(a.test, random_dataset("image2d", seed=4).test)


@pytest.mark.parametrize("name", sorted(PHENOMENA))
def test_phenomenon_reproduces_its_classification(name):
    outcome = run_phenomenon(name)
    assert outcome.passed, f"{name}: observed {outcome.observed}"


def test_imbalanced_precision_spreads_over_averagings():
    outcome = run_phenomenon("imbalanced_precision")
    values = {r.value_a for r in outcome.records} | {r.value_b for r in outcome.records}
    assert len(values) >= 3
    assert {r.classification for r in outcome.records} <= {Classification.RD, Classification.NONE}


def test_imbalanced_confusion_matrix():
    data = get_phenomenon("imbalanced_precision").build()
    assert isinstance(data, ClassificationData)
    assert data.cm.counts.tolist() == [[90, 0], [9, 1]]


def test_unknown_phenomenon():
    with pytest.raises(UnknownMetricError):
        run_phenomenon("moon_phase")


def test_perfect_predictions_agree_across_precision_variants():
    data = ClassificationData.of([0] * 5 + [1] * 5, [0] * 5 + [1] * 5)
    values = run_variants(data, MetricId.PRECISION, RunConfig(task="classification"))
    assert {v.value for v in values} == {1.0}
    records = classify_discrepancies(values)
    assert records
    assert {r.classification for r in records} == {Classification.NONE}


def test_mann_whitney_sweep_labels_statistic_pairs_as_reporting():
    data = SampleGroups.of([1.0, 4.0, 6.0, 9.0, 11.0], [2.0, 3.0, 5.0, 7.0, 8.0, 10.0])
    records = classify_discrepancies(run_variants(data, MetricId.MANN_WHITNEY, RunConfig(task="stattest")))
    statistic = [r for r in records if r.quantity == Quantity.STATISTIC]
    assert {r.classification for r in statistic} == {Classification.RD, Classification.NONE}
    exact_u1_vs_w = [r for r in statistic
                     if {r.descriptor_a.formula_family, r.descriptor_b.formula_family} == {"Exact", "Normal"}
                     and {r.value_a, r.value_b} == {16.0, 31.0}]
    assert [r.classification for r in exact_u1_vs_w] == [Classification.RD]
    p_values = [r for r in records if r.quantity == Quantity.P_VALUE]
    assert Classification.ID in {r.classification for r in p_values}


def test_msle_and_mape_check_only_their_own_domain():
    zero_truth = PairedSeries(np.array([0.0, 1.0, 3.0]), np.array([0.0, 1.0, 2.0]))
    (msle,) = compute_metric(describe(MetricId.MSLE, "Standard"), zero_truth)
    assert msle.validity == Validity.OK
    (mape,) = compute_metric(describe(MetricId.MAPE, "Standard", units="fraction", zero_policy="error"), zero_truth)
    assert mape.validity == Validity.UNDEFINED

    negative_truth = PairedSeries(np.array([-1.0, 2.0]), np.array([-1.0, 1.0]))
    (mape,) = compute_metric(describe(MetricId.MAPE, "Standard", units="fraction", zero_policy="error"), negative_truth)
    assert mape.value == pytest.approx(0.25)
    (msle,) = compute_metric(describe(MetricId.MSLE, "Standard"), negative_truth)
    assert msle.validity == Validity.UNDEFINED
