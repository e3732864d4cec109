import math

import numpy as np
import pytest

from modules.metrics.core import DomainError, MetricError, Validity
from modules.metrics.correlate import (
    BiweightCentering, DependenceKind, InformationUnits, RankLinearKind, RobustKind, VariablePair,
    dependence, partial_corr, rank_linear_corr, robust_corr,
)
from modules.oracles import naive_dcor


def pair(x, y, Z=None) -> VariablePair:
    return VariablePair(np.array(x, dtype=float), np.array(y, dtype=float), Z)


@pytest.mark.parametrize("kind", list(RankLinearKind))
def test_rank_linear_identity_and_reversal(kind):
    x = [1.0, 2.0, 4.0, 8.0, 9.5]
    assert rank_linear_corr(pair(x, x), kind).value == pytest.approx(1.0)
    assert rank_linear_corr(pair(x, [-v for v in x]), kind).value == pytest.approx(-1.0)


def test_kendall_tie_handling():
    v = pair([1, 2, 3, 4], [1, 1, 2, 2])
    assert rank_linear_corr(v, RankLinearKind.KENDALL_TAU_A).value == pytest.approx(4.0 / 6.0)
    assert rank_linear_corr(v, RankLinearKind.KENDALL_TAU_B).value == pytest.approx(4.0 / math.sqrt(24.0))


def test_constant_input_is_undefined():
    v = pair([1, 2, 3, 4], [5, 5, 5, 5])
    assert rank_linear_corr(v, RankLinearKind.PEARSON).validity == Validity.UNDEFINED
    assert rank_linear_corr(v, RankLinearKind.SPEARMAN).validity == Validity.UNDEFINED
    assert rank_linear_corr(v, RankLinearKind.KENDALL_TAU_B).validity == Validity.UNDEFINED
    assert dependence(v, DependenceKind.DISTANCE_CORRELATION).validity == Validity.UNDEFINED


def test_rank_correlations_ignore_monotone_transforms(rng):
    for _ in range(100):
        x = rng.normal(size=15)
        y = x + rng.normal(size=15)
        base = pair(x, y)
        warped = pair(np.exp(x), y ** 3)
        for kind in (RankLinearKind.SPEARMAN, RankLinearKind.KENDALL_TAU_A, RankLinearKind.KENDALL_TAU_B):
            assert rank_linear_corr(warped, kind).value == pytest.approx(rank_linear_corr(base, kind).value,
                                                                         abs=1e-12)
        # continuous draws have no ties
        assert (rank_linear_corr(base, RankLinearKind.KENDALL_TAU_A).value
                == rank_linear_corr(base, RankLinearKind.KENDALL_TAU_B).value)
        pearson = rank_linear_corr(base, RankLinearKind.PEARSON).value
        assert rank_linear_corr(pair(3.0 * x - 2.0, 0.5 * y + 7.0)).value == pytest.approx(pearson, abs=1e-12)
        assert -1.0 <= pearson <= 1.0


@pytest.mark.parametrize("kind", list(RobustKind))
def test_robust_identity_and_reversal(kind):
    x = np.arange(1.0, 11.0)
    assert robust_corr(pair(x, x), kind).value == pytest.approx(1.0)
    assert robust_corr(pair(x, -x), kind).value == pytest.approx(-1.0)


@pytest.mark.parametrize("kind", list(RobustKind))
def test_robust_estimators_resist_a_single_outlier(kind):
    x = np.arange(1.0, 21.0)
    y = x.copy()
    y[-1] = -100.0
    v = pair(x, y)
    pearson = rank_linear_corr(v).value
    robust = robust_corr(v, kind).value
    assert abs(robust - 1.0) < abs(pearson - 1.0)


def test_robust_preconditions():
    with pytest.raises(MetricError):
        robust_corr(pair([1, 2, 3, 4], [1, 2, 3, 4]))
    with pytest.raises(DomainError):
        robust_corr(pair(range(10), range(10)), RobustKind.BIWEIGHT, c=0.0)
    with pytest.raises(DomainError):
        robust_corr(pair(range(10), range(10)), RobustKind.PERCENTAGE_BEND, beta=0.7)
    flat = pair([1, 1, 1, 1, 1, 1, 9], [1, 2, 3, 4, 5, 6, 7])
    assert robust_corr(flat, RobustKind.BIWEIGHT).validity == Validity.UNDEFINED


def test_biweight_centering_is_a_declared_parameter():
    v = pair(range(10), [0, 2, 1, 4, 3, 6, 5, 8, 7, 30])
    median_mad = robust_corr(v, RobustKind.BIWEIGHT, centering=BiweightCentering.MEDIAN_MAD)
    mean_sd = robust_corr(v, RobustKind.BIWEIGHT, centering=BiweightCentering.MEAN_SD)
    assert median_mad.descriptor != mean_sd.descriptor
    assert median_mad.descriptor.formula_family == "MedianMad"


def test_distance_correlation_of_identical_vectors():
    x = [0.3, 1.2, -0.7, 2.2, 5.0]
    assert dependence(pair(x, x), DependenceKind.DISTANCE_CORRELATION).value == pytest.approx(1.0, abs=1e-12)


def test_distance_correlation_matches_naive_double_centering():
    x = [0.5, -1.25, 3.0, 2.2, 0.0, 4.75, -2.0, 1.1, 0.9, 3.3]
    y = [1.0, 0.4, -0.3, 2.8, 1.7, -1.1, 0.2, 0.6, 2.2, -0.9]
    dcor = dependence(pair(x, y), DependenceKind.DISTANCE_CORRELATION).value
    assert dcor == pytest.approx(naive_dcor(x, y), abs=1e-12)
    assert 0.0 <= dcor <= 1.0


def test_distance_correlation_vanishes_on_product_grid():
    grid = [(float(i), float(j)) for i in range(25) for j in range(20)]
    x, y = zip(*grid)
    assert dependence(pair(x, y), DependenceKind.DISTANCE_CORRELATION).value < 0.05


def test_mutual_information():
    independent = pair([0, 0, 1, 1], [0, 1, 0, 1])
    assert dependence(independent, bins=2).value == 0.0

    coupled = pair([0, 0, 1, 1], [0, 0, 1, 1])
    nats = dependence(coupled, bins=2).value
    assert nats == pytest.approx(math.log(2.0))
    assert dependence(coupled, bins=2, units=InformationUnits.BITS).value == pytest.approx(1.0)

    assert dependence(pair([1, 1, 1], [2, 2, 2]), bins=2).validity == Validity.UNDEFINED
    with pytest.raises(DomainError):
        dependence(coupled, bins=1)


def test_mutual_information_default_bins_recorded():
    v = pair(range(10), range(10))
    value = dependence(v, DependenceKind.MUTUAL_INFORMATION)
    assert value.value >= 0.0
    assert value.descriptor == dependence(v, DependenceKind.MUTUAL_INFORMATION, bins=None).descriptor


def test_partial_correlation_without_covariates_is_pearson():
    v = pair([1, 3, 2, 5, 4, 6], [2, 1, 4, 3, 6, 5])
    assert partial_corr(v).value == pytest.approx(rank_linear_corr(v).value, abs=1e-15)


def test_partial_correlation_closed_form():
    x = np.array([1.0, 3.0, 2.0, 5.0, 4.0, 6.0])
    y = np.array([2.0, 1.0, 4.0, 3.0, 6.0, 7.0])
    z = np.array([0.5, 2.0, 1.0, 1.5, 3.5, 2.5])
    r = np.corrcoef(np.vstack((x, y, z)))
    r_xy, r_xz, r_yz = r[0, 1], r[0, 2], r[1, 2]
    expected = (r_xy - r_xz * r_yz) / math.sqrt((1 - r_xz ** 2) * (1 - r_yz ** 2))
    assert partial_corr(pair(x, y, z)).value == pytest.approx(expected, abs=1e-12)


def test_partial_correlation_preconditions():
    x = [1.0, 3.0, 2.0, 5.0, 4.0]
    y = [2.0, 1.0, 4.0, 3.0, 6.0]
    z = [1.0, 2.0, 3.0, 4.0, 5.0]
    with pytest.raises(DomainError):
        partial_corr(pair(x, y, np.column_stack((z, z))))
    with pytest.raises(DomainError):
        partial_corr(pair(x[:3], y[:3], z[:3]))
