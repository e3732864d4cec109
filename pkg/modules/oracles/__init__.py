"""
Brute-force oracles

Slow reference implementations used by the test suite only.
"""

from .brute_force import (
    exact_mwu_distribution,
    exhaustive_permutation,
    exhaustive_wilcoxon,
    naive_dcor,
    naive_directed_hausdorff,
    naive_hausdorff,
    numeric_cdf,
    pair_counting_rand,
    pairwise_auc,
)

__all__ = [
    "exact_mwu_distribution",
    "exhaustive_permutation",
    "exhaustive_wilcoxon",
    "naive_dcor",
    "naive_directed_hausdorff",
    "naive_hausdorff",
    "numeric_cdf",
    "pair_counting_rand",
    "pairwise_auc",
]
