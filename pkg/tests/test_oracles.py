import math

import pytest

from modules.metrics.core import BudgetExceededError, DomainError
from modules.oracles import (
    exact_mwu_distribution, exhaustive_permutation, exhaustive_wilcoxon, naive_dcor, naive_directed_hausdorff,
    naive_hausdorff, numeric_cdf, pair_counting_rand, pairwise_auc,
)


def test_pairwise_auc_counts_ties_as_half():
    assert pairwise_auc([1, 0], [0.5, 0.5]) == 0.5
    assert pairwise_auc([1, 1, 0, 0], [0.9, 0.4, 0.5, 0.1]) == 0.75
    assert pairwise_auc(["a", "b"], [0.2, 0.8], positive="a") == 0.0
    with pytest.raises(DomainError):
        pairwise_auc([1, 1], [0.1, 0.2])


def test_mwu_distribution_shape():
    assert exact_mwu_distribution(2, 2) == [1, 1, 2, 1, 1]
    counts = exact_mwu_distribution(4, 6)
    assert sum(counts) == math.comb(10, 4)
    assert counts == counts[::-1]
    assert exact_mwu_distribution(0, 3) == [1]


def test_exhaustive_permutation():
    assert exhaustive_permutation([1, 2], [3, 4]) == pytest.approx(1.0 / 3.0)
    assert exhaustive_permutation([1, 2], [3, 4], tail="less") == pytest.approx(1.0 / 6.0)
    assert exhaustive_permutation([1, 2], [3, 4], tail="greater") == 1.0
    assert exhaustive_permutation([1, 5, 9], [2, 3], statistic="median_diff") <= 1.0
    with pytest.raises(BudgetExceededError):
        exhaustive_permutation(list(range(15)), list(range(15)))


def test_exhaustive_wilcoxon():
    assert exhaustive_wilcoxon([1.0, -2.0, 3.0]) == (4.0, 0.75)
    assert exhaustive_wilcoxon([0.0, 1.0, 2.0], tail="greater") == (3.0, 0.25)
    with pytest.raises(DomainError):
        exhaustive_wilcoxon([0.0, 0.0])
    with pytest.raises(BudgetExceededError):
        exhaustive_wilcoxon(list(range(1, 22)))


def test_naive_dcor():
    assert naive_dcor([1.0, 2.0, 4.0], [1.0, 2.0, 4.0]) == pytest.approx(1.0)
    assert math.isnan(naive_dcor([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))


def test_naive_hausdorff():
    a = [(0.0, 0.0)]
    b = [(0.0, 0.0), (0.0, 10.0)]
    assert naive_directed_hausdorff(a, b) == 0.0
    assert naive_directed_hausdorff(b, a) == 10.0
    assert naive_hausdorff(a, b) == 10.0


def test_pair_counting_rand():
    ari, are, voi = pair_counting_rand([0, 0, 1, 1], [5, 5, 7, 7])
    assert (ari, are, voi) == (1.0, 0.0, 0.0)
    ari, are, voi = pair_counting_rand([0, 0, 0], [0, 0, 0])
    assert ari == 1.0
    ari, are, _ = pair_counting_rand([0, 1, 2], [0, 0, 1])
    assert ari == 0.0
    assert math.isnan(are)


def test_numeric_cdf():
    assert numeric_cdf("normal", 0.0) == pytest.approx(0.5, abs=1e-12)
    assert numeric_cdf("chi2", 4.0, upper=True, df=2) == pytest.approx(math.exp(-2.0), rel=1e-10)
    assert numeric_cdf("t", 1.0, df=1) == pytest.approx(0.75, rel=1e-10)
    assert numeric_cdf("chi2", -1.0, df=3) == 0.0
    assert numeric_cdf("kolmogorov", 0.0) == 0.0
    with pytest.raises(DomainError):
        numeric_cdf("gamma", 1.0)
