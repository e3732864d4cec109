"""
Brute-force reference implementations.

Each function recomputes a quantity the slow, obvious way (explicit loops,
full enumeration, numerical quadrature) so the fast implementations in
``modules.metrics`` can be checked against it on small instances. Nothing
here imports from the metric modules; only the core error types are shared.
"""

import itertools
import logging
import math
from collections import Counter
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from scipy import integrate

from modules.metrics.core import BudgetExceededError, DomainError

logger = logging.getLogger(__name__)

PERMUTATION_GUARD = 1_000_000
WILCOXON_GUARD = 20


def _tail_probability(count_le: int, count_ge: int, total: int, tail: str) -> float:
    lower = count_le / total
    upper = count_ge / total
    if tail == "two-sided":
        return min(1.0, 2.0 * min(lower, upper))
    if tail == "greater":
        return upper
    if tail == "less":
        return lower
    raise DomainError(f"unknown tail '{tail}'")


def pairwise_auc(y: Sequence, scores: Sequence[float], positive=1) -> float:
    """
    AUC by counting every (positive, negative) pair

    Args:
        y: Labels
        scores: Scores, higher meaning more positive
        positive: Label treated as positive

    Returns:
        float: (wins + ties / 2) / pairs
    """
    pos = [s for label, s in zip(y, scores) if label == positive]
    neg = [s for label, s in zip(y, scores) if label != positive]
    if not pos or not neg:
        raise DomainError("AUC needs at least one positive and one negative")
    credit = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                credit += 1.0
            elif p == q:
                credit += 0.5
    return credit / (len(pos) * len(neg))


def exact_mwu_distribution(n1: int, n2: int) -> List[int]:
    """
    Null counts of U1 for samples of size n1 and n2 without ties

    Uses the recurrence c(n1, n2, u) = c(n1 - 1, n2, u - n2) + c(n1, n2 - 1, u),
    i.e. the largest observation belongs to the first sample or it does not.

    Returns:
        List[int]: counts[u] for u = 0 .. n1*n2, summing to binom(n1 + n2, n1)
    """
    if n1 < 0 or n2 < 0:
        raise DomainError("sample sizes must be non-negative")

    @lru_cache(maxsize=None)
    def count(a: int, b: int, u: int) -> int:
        if u < 0 or u > a * b:
            return 0
        if a == 0 or b == 0:
            return 1 if u == 0 else 0
        return count(a - 1, b, u - b) + count(a, b - 1, u)

    return [count(n1, n2, u) for u in range(n1 * n2 + 1)]


def _median(values: Sequence[float]) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def _split_statistic(first: Sequence[float], second: Sequence[float], statistic: str) -> float:
    if statistic == "mean_diff":
        return sum(first) / len(first) - sum(second) / len(second)
    if statistic == "median_diff":
        return _median(first) - _median(second)
    raise DomainError(f"unknown permutation statistic '{statistic}'")


def exhaustive_permutation(x: Sequence[float], y: Sequence[float], statistic: str = "mean_diff",
                           tail: str = "two-sided") -> float:
    """
    Permutation p-value over every split of the pooled sample

    Raises:
        BudgetExceededError: More than 10^6 splits
    """
    pooled = [float(v) for v in x] + [float(v) for v in y]
    n1 = len(x)
    total = math.comb(len(pooled), n1)
    if total > PERMUTATION_GUARD:
        raise BudgetExceededError(f"{total} splits exceed the guard of {PERMUTATION_GUARD}")
    observed = _split_statistic(pooled[:n1], pooled[n1:], statistic)
    slack = 1e-12 * max(1.0, abs(observed))
    extreme = 0
    for chosen in itertools.combinations(range(len(pooled)), n1):
        members = set(chosen)
        first = [pooled[i] for i in chosen]
        second = [pooled[i] for i in range(len(pooled)) if i not in members]
        value = _split_statistic(first, second, statistic)
        if tail == "greater":
            extreme += value >= observed - slack
        elif tail == "less":
            extreme += value <= observed + slack
        else:
            extreme += abs(value) >= abs(observed) - slack
    return extreme / total


def _average_ranks(values: Sequence[float]) -> List[float]:
    ranks = []
    for v in values:
        below = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        ranks.append(below + (equal + 1) / 2.0)
    return ranks


def exhaustive_wilcoxon(diffs: Sequence[float], tail: str = "two-sided") -> Tuple[float, float]:
    """
    Signed-rank W+ and its p-value over all 2^n sign patterns

    Zero differences are dropped before ranking.

    Returns:
        Tuple[float, float]: (W+, p)

    Raises:
        BudgetExceededError: More than 20 non-zero differences
    """
    kept = [float(d) for d in diffs if d != 0]
    if not kept:
        raise DomainError("all differences are zero")
    if len(kept) > WILCOXON_GUARD:
        raise BudgetExceededError(f"{len(kept)} differences exceed the guard of {WILCOXON_GUARD}")
    ranks = _average_ranks([abs(d) for d in kept])
    observed = sum(r for r, d in zip(ranks, kept) if d > 0)
    total = 0
    le = ge = 0
    for signs in itertools.product((False, True), repeat=len(kept)):
        w = sum(r for r, positive in zip(ranks, signs) if positive)
        total += 1
        le += w <= observed + 1e-9
        ge += w >= observed - 1e-9
    return observed, _tail_probability(le, ge, total, tail)


def naive_dcor(x: Sequence[float], y: Sequence[float]) -> float:
    """Distance correlation from explicitly double-centred n x n distance matrices"""
    n = len(x)
    if n != len(y) or n < 2:
        raise DomainError("distance correlation needs two equal-length samples of size >= 2")

    def centred(v: Sequence[float]) -> List[List[float]]:
        d = [[abs(v[i] - v[j]) for j in range(n)] for i in range(n)]
        rows = [sum(d[i]) / n for i in range(n)]
        cols = [sum(d[i][j] for i in range(n)) / n for j in range(n)]
        grand = sum(rows) / n
        return [[d[i][j] - rows[i] - cols[j] + grand for j in range(n)] for i in range(n)]

    a = centred([float(v) for v in x])
    b = centred([float(v) for v in y])

    def product(p, q) -> float:
        return sum(p[i][j] * q[i][j] for i in range(n) for j in range(n)) / (n * n)

    xy, xx, yy = max(0.0, product(a, b)), product(a, a), product(b, b)
    if xx <= 0.0 or yy <= 0.0:
        return math.nan
    return math.sqrt(xy) / math.sqrt(math.sqrt(xx) * math.sqrt(yy))


def naive_directed_hausdorff(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]) -> float:
    """max over a of the distance to the nearest point of b"""
    if not a or not b:
        raise DomainError("Hausdorff distance needs two non-empty point sets")
    return max(min(math.dist(p, q) for q in b) for p in a)


def naive_hausdorff(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]) -> float:
    """Symmetric Hausdorff distance by all-pairs search"""
    return max(naive_directed_hausdorff(a, b), naive_directed_hausdorff(b, a))


def pair_counting_rand(pred: Sequence, ref: Sequence) -> Tuple[float, float, float]:
    """
    (ARI, adapted Rand error, variation of information in nats)

    ARI and the adapted Rand error come from a loop over all element pairs;
    the variation of information from explicit label co-occurrence counts.
    ARI is 1.0 for identical partitions with a degenerate chance term and
    NaN for any other degenerate case, as is an undefined adapted Rand error.
    """
    if len(pred) != len(ref) or len(pred) < 2:
        raise DomainError("partitions must label the same elements, at least two")
    both = only_pred = only_ref = neither = 0
    for i, j in itertools.combinations(range(len(pred)), 2):
        same_pred = pred[i] == pred[j]
        same_ref = ref[i] == ref[j]
        if same_pred and same_ref:
            both += 1
        elif same_pred:
            only_pred += 1
        elif same_ref:
            only_ref += 1
        else:
            neither += 1

    denominator = (both + only_pred) * (only_pred + neither) + (both + only_ref) * (only_ref + neither)
    if denominator == 0:
        identical = len({(p, r) for p, r in zip(pred, ref)}) == len(set(pred)) == len(set(ref))
        ari = 1.0 if identical else math.nan
    else:
        ari = 2.0 * (both * neither - only_pred * only_ref) / denominator

    pred_pairs = both + only_pred
    ref_pairs = both + only_ref
    if pred_pairs == 0 or ref_pairs == 0:
        are = math.nan
    else:
        are = 1.0 - 2.0 * both / (pred_pairs + ref_pairs)

    n = len(pred)
    joint: Dict[Tuple, int] = Counter(zip(pred, ref))
    pred_counts = Counter(pred)
    ref_counts = Counter(ref)
    voi = 0.0
    for (p, r), n_pr in joint.items():
        share = n_pr / n
        voi -= share * (math.log(n_pr / pred_counts[p]) + math.log(n_pr / ref_counts[r]))
    return ari, are, voi


# ---------------------------------------------------------------------------
# Distribution functions by quadrature
# ---------------------------------------------------------------------------

def _normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _t_pdf(x: float, df: float) -> float:
    log_c = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(log_c - (df + 1) / 2 * math.log1p(x * x / df))


def _chi2_pdf(x: float, df: float) -> float:
    if x <= 0.0:
        return 0.0
    k = df / 2.0
    return math.exp((k - 1) * math.log(x) - x / 2 - k * math.log(2.0) - math.lgamma(k))


def _f_pdf(x: float, d1: float, d2: float) -> float:
    if x <= 0.0:
        return 0.0
    log_beta = math.lgamma(d1 / 2) + math.lgamma(d2 / 2) - math.lgamma((d1 + d2) / 2)
    log_num = (d1 / 2) * math.log(d1 / d2) + (d1 / 2 - 1) * math.log(x) - (d1 + d2) / 2 * math.log1p(d1 * x / d2)
    return math.exp(log_num - log_beta)


def _kolmogorov_cdf(x: float) -> float:
    # theta-function form, independent of the alternating series
    if x <= 0.0:
        return 0.0
    total = 0.0
    for k in range(1, 200):
        term = math.exp(-((2 * k - 1) ** 2) * math.pi ** 2 / (8.0 * x * x))
        total += term
        if term < 1e-300:
            break
    return min(1.0, math.sqrt(2.0 * math.pi) / x * total)


def _integrate(pdf, lower: float, upper: float, breakpoint: float = None) -> float:
    options = {"epsabs": 1e-14, "epsrel": 1e-12, "limit": 500}
    if breakpoint is not None and lower < breakpoint < upper:
        left, _ = integrate.quad(pdf, lower, breakpoint, **options)
        right, _ = integrate.quad(pdf, breakpoint, upper, **options)
        return left + right
    value, _ = integrate.quad(pdf, lower, upper, **options)
    return value


def numeric_cdf(dist: str, x: float, upper: bool = False, df: float = None, df2: float = None) -> float:
    """
    CDF (or survival function) by adaptive quadrature of the density

    Args:
        dist: normal, t, chi2, f or kolmogorov
        x: Argument
        upper: Return the upper tail instead of the CDF
        df: Degrees of freedom (t, chi2) or numerator degrees of freedom (f)
        df2: Denominator degrees of freedom (f)

    Returns:
        float: Tail probability
    """
    if dist == "kolmogorov":
        cdf = _kolmogorov_cdf(x)
        return 1.0 - cdf if upper else cdf

    if dist == "normal":
        pdf, support, mode = _normal_pdf, -math.inf, 0.0
    elif dist == "t":
        pdf, support, mode = (lambda v: _t_pdf(v, df)), -math.inf, 0.0
    elif dist == "chi2":
        pdf, support, mode = (lambda v: _chi2_pdf(v, df)), 0.0, max(df - 2.0, 0.0)
    elif dist == "f":
        pdf, support, mode = (lambda v: _f_pdf(v, df, df2)), 0.0, 1.0
    else:
        raise DomainError(f"unknown distribution '{dist}'")

    if x <= support:
        return 1.0 if upper else 0.0
    if upper:
        return _integrate(pdf, x, math.inf, mode)
    return _integrate(pdf, support, x, mode)
