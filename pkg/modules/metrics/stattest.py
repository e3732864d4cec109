"""
Hypothesis tests with explicit statistic, tail, centering and exactness conventions.

Every p-value comes from ``distributions`` (or from an exact enumeration)
and is checked against [0, 1] by the TestResult validator. Ties always
get average ranks, and normal approximations are tie-corrected.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    BudgetExceededError, ConventionDescriptor, DomainError, MetricError, MetricId, ShapeError, TestResult,
)
from .distributions import (
    chi2_sf, f_cdf, f_sf, kolmogorov_sf, normal_cdf, normal_ppf, normal_sf, t_cdf, t_sf, tail_p_value,
)
from .numeric import as_float_array, average_ranks, tie_term
from .registry import describe

logger = logging.getLogger(__name__)

EXACT_LATTICE_LIMIT = 10_000
EXACT_SIGNED_RANK_LIMIT = 20
EXACT_PERMUTATION_LIMIT = 1_000_000
MC_CHUNK = 256


class Tail(str, Enum):
    TWO_SIDED = "two-sided"
    GREATER = "greater"
    LESS = "less"


class TTestKind(str, Enum):
    INDEPENDENT_POOLED = "IndependentPooled"
    WELCH = "Welch"
    PAIRED = "Paired"
    Z_KNOWN_SIGMA = "ZKnownSigma"
    Z_SAMPLE_SIGMA = "ZSampleSigma"


class KsMethod(str, Enum):
    EXACT = "Exact"
    ASYMPTOTIC = "Asymptotic"
    ASYMPTOTIC_STEPHENS = "AsymptoticStephens"


class RankTestKind(str, Enum):
    MANN_WHITNEY = "MannWhitney"
    KRUSKAL_WALLIS = "KruskalWallis"
    WILCOXON_SIGNED_RANK = "WilcoxonSignedRank"


class PMethod(str, Enum):
    NORMAL = "Normal"
    EXACT = "Exact"


class VarianceTestKind(str, Enum):
    F_TEST = "FTest"
    BARTLETT = "Bartlett"
    LEVENE = "Levene"


class LeveneCenter(str, Enum):
    MEAN = "MeanCentered"
    MEDIAN = "MedianCentered"
    TRIMMED = "TrimmedCentered"


class DistributionTestKind(str, Enum):
    SHAPIRO_WILK = "ShapiroWilk"
    CHI_SQUARE_GOF = "ChiSquareGOF"
    CHI_SQUARE_INDEPENDENCE = "ChiSquareIndependence"
    ANOVA = "ANOVA"


class PermutationMethod(str, Enum):
    EXACT_ENUMERATION = "ExactEnumeration"
    MONTE_CARLO = "MonteCarlo"


class PermutationStatistic(str, Enum):
    MEAN_DIFF = "mean_diff"
    MEDIAN_DIFF = "median_diff"


@dataclass(frozen=True)
class SampleGroups:
    """One, two or g real samples; paired samples must share a length"""
    groups: Tuple[np.ndarray, ...]
    paired: bool = False

    def __post_init__(self):
        groups = tuple(as_float_array(g, f"group {i}", min_length=2) for i, g in enumerate(self.groups))
        if not groups:
            raise ShapeError("at least one sample group is required")
        if self.paired and len(groups) == 2 and groups[0].size != groups[1].size:
            raise ShapeError(f"paired samples differ in length: {groups[0].size} vs {groups[1].size}")
        for g in groups:
            g.setflags(write=False)
        object.__setattr__(self, "groups", groups)

    @classmethod
    def of(cls, *groups: Sequence[float], paired: bool = False) -> "SampleGroups":
        return cls(tuple(np.asarray(g, dtype=float) for g in groups), paired)

    @property
    def g(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> List[int]:
        return [int(x.size) for x in self.groups]

    def pair(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.g != 2:
            raise ShapeError(f"test needs exactly two groups, got {self.g}")
        return self.groups[0], self.groups[1]

    def require_groups(self, minimum: int = 2):
        if self.g < minimum:
            raise ShapeError(f"test needs at least {minimum} groups, got {self.g}")


def _result(descriptor: ConventionDescriptor, statistic: float, p_value: float,
            df: Optional[Tuple[float, ...]] = None, notes: Sequence[str] = ()) -> TestResult:
    return TestResult(descriptor=descriptor, statistic=float(statistic), p_value=float(p_value),
                      df=df, notes=tuple(notes))


def _normal_tail_p(z: float, tail: Tail) -> float:
    return tail_p_value(normal_cdf(z), normal_sf(z), tail.value)


# ---------------------------------------------------------------------------
# t and z tests
# ---------------------------------------------------------------------------

def t_tests(s: SampleGroups, kind: TTestKind = TTestKind.INDEPENDENT_POOLED, tail: Tail = Tail.TWO_SIDED,
            sigma: float = 1.0) -> TestResult:
    """
    Two-sample t (pooled or Welch), paired t and two-sample z tests.

    A paired test takes two equal-length groups or a single group of
    differences.

    Returns:
        TestResult: Undefined when the standard error is zero
    """
    kind = TTestKind(kind)
    tail = Tail(tail)

    if kind == TTestKind.PAIRED:
        descriptor = describe(MetricId.PAIRED_T_TEST, "Paired", tail=tail.value)
        if s.g == 1:
            d = s.groups[0]
        else:
            x, y = s.pair()
            if x.size != y.size:
                raise ShapeError(f"paired samples differ in length: {x.size} vs {y.size}")
            d = x - y
        n = d.size
        sd = float(np.std(d, ddof=1))
        if sd == 0.0:
            return TestResult.undefined(descriptor, "zero variance in paired differences")
        t = float(np.mean(d)) / (sd / math.sqrt(n))
        df = float(n - 1)
        return _result(descriptor, t, tail_p_value(t_cdf(t, df), t_sf(t, df), tail.value), (df,))

    x, y = s.pair()
    n1, n2 = x.size, y.size
    diff = float(np.mean(x)) - float(np.mean(y))
    v1, v2 = float(np.var(x, ddof=1)), float(np.var(y, ddof=1))

    if kind == TTestKind.Z_KNOWN_SIGMA:
        if not sigma > 0:
            raise DomainError(f"known sigma must be positive, got {sigma}")
        descriptor = describe(MetricId.Z_TEST, "KnownSigma", tail=tail.value, sigma=float(sigma))
        z = diff / (sigma * math.sqrt(1.0 / n1 + 1.0 / n2))
        return _result(descriptor, z, _normal_tail_p(z, tail))

    if kind == TTestKind.Z_SAMPLE_SIGMA:
        descriptor = describe(MetricId.Z_TEST, "SampleSigma", tail=tail.value)
        se = math.sqrt(v1 / n1 + v2 / n2)
        if se == 0.0:
            return TestResult.undefined(descriptor, "zero standard error")
        z = diff / se
        return _result(descriptor, z, _normal_tail_p(z, tail))

    if kind == TTestKind.WELCH:
        descriptor = describe(MetricId.T_TEST, "Welch", tail=tail.value)
        a, b = v1 / n1, v2 / n2
        se2 = a + b
        if se2 == 0.0:
            return TestResult.undefined(descriptor, "zero standard error")
        df = se2 * se2 / (a * a / (n1 - 1) + b * b / (n2 - 1))
    else:
        descriptor = describe(MetricId.T_TEST, "Pooled", tail=tail.value)
        df = float(n1 + n2 - 2)
        pooled = ((n1 - 1) * v1 + (n2 - 1) * v2) / df
        se2 = pooled * (1.0 / n1 + 1.0 / n2)
        if se2 == 0.0:
            return TestResult.undefined(descriptor, "zero standard error")
    t = diff / math.sqrt(se2)
    return _result(descriptor, t, tail_p_value(t_cdf(t, df), t_sf(t, df), tail.value), (df,))


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------

def _ks_integer_statistic(x: np.ndarray, y: np.ndarray) -> int:
    """max |i*n2 - j*n1| over pooled points; D = value / (n1*n2)"""
    n1, n2 = x.size, y.size
    pooled = np.concatenate((x, y))
    i = np.searchsorted(np.sort(x), pooled, side="right").astype(np.int64)
    j = np.searchsorted(np.sort(y), pooled, side="right").astype(np.int64)
    return int(np.max(np.abs(i * n2 - j * n1)))


def _ks_exact_p(n1: int, n2: int, d_int: int) -> float:
    """P(D >= d) by counting lattice paths that stay strictly inside the band"""
    previous: List[int] = []
    for i in range(n1 + 1):
        row = [0] * (n2 + 1)
        for j in range(n2 + 1):
            if abs(i * n2 - j * n1) >= d_int:
                continue
            if i == 0 and j == 0:
                row[j] = 1
            else:
                row[j] = (previous[j] if i > 0 else 0) + (row[j - 1] if j > 0 else 0)
        previous = row
    total = math.comb(n1 + n2, n1)
    return float(Fraction(total - previous[n2], total))


def ks_2samp(s: SampleGroups, p_method: KsMethod = KsMethod.EXACT) -> TestResult:
    """
    Two-sample Kolmogorov-Smirnov test (two-sided).

    Exact p-values are used while n1*n2 <= 10^4; larger samples fall back
    to the asymptotic series with a note.
    """
    p_method = KsMethod(p_method)
    descriptor = describe(MetricId.KS_2SAMP, p_method.value)
    x, y = s.pair()
    n1, n2 = x.size, y.size
    d_int = _ks_integer_statistic(x, y)
    d = d_int / (n1 * n2)
    notes = []

    if p_method == KsMethod.EXACT:
        if n1 * n2 <= EXACT_LATTICE_LIMIT:
            return _result(descriptor, d, _ks_exact_p(n1, n2, d_int))
        logger.warning(f"⚠️ KS exact p skipped for n1*n2={n1 * n2}; using the asymptotic series")
        notes.append(f"n1*n2={n1 * n2} exceeds the exact limit; asymptotic p used")

    en = n1 * n2 / (n1 + n2)
    if p_method == KsMethod.ASYMPTOTIC_STEPHENS:
        root = math.sqrt(en)
        lam = (root + 0.12 + 0.11 / root) * d
    else:
        lam = math.sqrt(en) * d
    return _result(descriptor, d, kolmogorov_sf(lam), notes=notes)


# ---------------------------------------------------------------------------
# Rank tests
# ---------------------------------------------------------------------------

def _corrected_normal_p(stat: float, mean: float, sd: float, continuity: bool, tail: Tail,
                        mirror: float) -> float:
    """Normal p for a statistic with the given null mean/sd; mirror is the reflected statistic"""
    if sd == 0.0:
        return 1.0
    cc = 0.5 if continuity else 0.0
    if tail == Tail.GREATER:
        return normal_sf((stat - mean - cc) / sd)
    if tail == Tail.LESS:
        return normal_cdf((stat - mean + cc) / sd)
    z = (max(stat, mirror) - mean - cc) / sd
    return min(1.0, 2.0 * normal_sf(z))


def mann_whitney_null_counts(n1: int, n2: int) -> List[int]:
    """
    Number of arrangements giving U = u for u = 0..n1*n2.

    Coefficients of the Gaussian binomial [n1+n2 choose n1]_q, built as
    prod (1 - q^(n2+i)) / (1 - q^i) truncated at degree n1*n2.
    """
    size = n1 * n2 + 1
    poly = np.zeros(size, dtype=object)
    poly[0] = 1
    for i in range(1, n1 + 1):
        shift = n2 + i
        if shift < size:
            multiplied = poly.copy()
            multiplied[shift:] = poly[shift:] - poly[:size - shift]
            poly = multiplied
        for residue in range(min(i, size)):
            poly[residue::i] = np.cumsum(poly[residue::i])
    return [int(c) for c in poly]


def _mann_whitney(s: SampleGroups, statistic: str, continuity: bool, p_method: PMethod, tail: Tail) -> TestResult:
    if statistic not in ("U1", "U2", "W"):
        raise DomainError(f"unknown Mann-Whitney statistic '{statistic}'")
    params = {"statistic": statistic, "tail": tail.value}
    if p_method == PMethod.NORMAL:
        params["continuity"] = bool(continuity)
    descriptor = describe(MetricId.MANN_WHITNEY, p_method.value, **params)

    x, y = s.pair()
    n1, n2 = x.size, y.size
    pooled = np.concatenate((x, y))
    ranks = average_ranks(pooled)
    r1 = float(np.sum(ranks[:n1]))
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    reported = {"U1": u1, "U2": u2, "W": r1}[statistic]
    notes = []

    ties = tie_term(pooled)
    if p_method == PMethod.EXACT:
        if ties == 0 and n1 * n2 <= EXACT_LATTICE_LIMIT:
            counts = mann_whitney_null_counts(n1, n2)
            total = math.comb(n1 + n2, n1)
            u = int(round(u1))
            lower = Fraction(sum(counts[:u + 1]), total)
            upper = Fraction(sum(counts[u:]), total)
            return _result(descriptor, reported, tail_p_value(float(lower), float(upper), tail.value))
        reason = "ties present" if ties else f"n1*n2={n1 * n2} exceeds the exact limit"
        logger.warning(f"⚠️ Mann-Whitney exact p unavailable ({reason}); using the normal approximation")
        notes.append(f"{reason}; normal approximation used")

    n = n1 + n2
    mean = n1 * n2 / 2.0
    variance = n1 * n2 / 12.0 * ((n + 1) - ties / (n * (n - 1)))
    p = _corrected_normal_p(u1, mean, math.sqrt(max(variance, 0.0)), continuity, tail, u2)
    return _result(descriptor, reported, p, notes=notes)


def _kruskal_wallis(s: SampleGroups) -> TestResult:
    descriptor = describe(MetricId.KRUSKAL_WALLIS, "TieCorrected")
    s.require_groups(2)
    pooled = np.concatenate(s.groups)
    n = pooled.size
    ranks = average_ranks(pooled)
    bounds = np.cumsum([0] + s.sizes)
    h = sum(float(np.sum(ranks[a:b])) ** 2 / (b - a) for a, b in zip(bounds[:-1], bounds[1:]))
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    df = float(s.g - 1)
    correction = 1.0 - tie_term(pooled) / (n ** 3 - n)
    if correction == 0.0:
        return _result(descriptor, 0.0, 1.0, (df,), notes=("all observations tied",))
    h = max(0.0, h / correction)
    return _result(descriptor, h, chi2_sf(h, df), (df,))


def signed_rank_null_counts(doubled_ranks: Sequence[int]) -> np.ndarray:
    """Subset-sum counts of the doubled ranks: counts[t] = #{sign patterns with 2*W+ = t}"""
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        shifted = counts.copy()
        shifted[r:] += counts[:total + 1 - r]
        counts = shifted
    return counts


def _signed_ranks(d: np.ndarray, zero_policy: str) -> Tuple[np.ndarray, np.ndarray]:
    if zero_policy == "wilcoxon":
        d = d[d != 0]
        if d.size == 0:
            raise MetricError("every paired difference is zero")
        return d, average_ranks(np.abs(d))
    if zero_policy == "pratt":
        ranks = average_ranks(np.abs(d))
        keep = d != 0
        if not np.any(keep):
            raise MetricError("every paired difference is zero")
        return d[keep], ranks[keep]
    raise DomainError(f"unknown zero policy '{zero_policy}'")


def _wilcoxon(s: SampleGroups, statistic: str, zero_policy: str, continuity: bool, p_method: PMethod,
              tail: Tail) -> TestResult:
    if statistic not in ("WPlus", "WMin"):
        raise DomainError(f"unknown signed-rank statistic '{statistic}'")
    params = {"statistic": statistic, "zero_policy": zero_policy, "tail": tail.value}
    if p_method == PMethod.NORMAL:
        params["continuity"] = bool(continuity)
    descriptor = describe(MetricId.WILCOXON_SIGNED_RANK, p_method.value, **params)

    if s.g == 1:
        d = s.groups[0]
    else:
        x, y = s.pair()
        if x.size != y.size:
            raise ShapeError(f"paired samples differ in length: {x.size} vs {y.size}")
        d = x - y
    d, ranks = _signed_ranks(d, zero_policy)
    w_plus = float(np.sum(ranks[d > 0]))
    w_minus = float(np.sum(ranks[d < 0]))
    reported = w_plus if statistic == "WPlus" else min(w_plus, w_minus)
    notes = []

    if p_method == PMethod.EXACT:
        if d.size <= EXACT_SIGNED_RANK_LIMIT:
            doubled = [int(round(2 * r)) for r in ranks]
            counts = signed_rank_null_counts(doubled)
            total = float(counts.sum())
            observed = int(round(2 * w_plus))
            lower = float(counts[:observed + 1].sum()) / total
            upper = float(counts[observed:].sum()) / total
            return _result(descriptor, reported, tail_p_value(lower, upper, tail.value))
        logger.warning(f"⚠️ signed-rank exact p skipped for n={d.size}; using the normal approximation")
        notes.append(f"n={d.size} exceeds the exact limit; normal approximation used")

    mean = float(np.sum(ranks)) / 2.0
    sd = math.sqrt(float(np.sum(ranks * ranks)) / 4.0)
    p = _corrected_normal_p(w_plus, mean, sd, continuity, tail, 2.0 * mean - w_plus)
    return _result(descriptor, reported, p, notes=notes)


def rank_tests(s: SampleGroups, kind: RankTestKind = RankTestKind.MANN_WHITNEY, statistic: Optional[str] = None,
               continuity: bool = True, p_method: PMethod = PMethod.NORMAL, zero_policy: str = "wilcoxon",
               tail: Tail = Tail.TWO_SIDED) -> TestResult:
    """
    Mann-Whitney, Kruskal-Wallis and Wilcoxon signed-rank tests.

    Args:
        s: Sample groups
        kind: Which test
        statistic: U1, U2 or W (Mann-Whitney); WPlus or WMin (signed rank).
            The reported statistic never changes the p-value.
        continuity: Continuity correction for normal approximations
        p_method: Normal or Exact
        zero_policy: wilcoxon (drop zero differences) or pratt (rank then drop)
        tail: Alternative hypothesis; greater means the first group is larger

    Returns:
        TestResult: Statistic, p-value and (Kruskal-Wallis) df
    """
    kind = RankTestKind(kind)
    tail = Tail(tail)
    p_method = PMethod(p_method)
    if kind == RankTestKind.MANN_WHITNEY:
        return _mann_whitney(s, statistic or "U1", continuity, p_method, tail)
    if kind == RankTestKind.KRUSKAL_WALLIS:
        return _kruskal_wallis(s)
    return _wilcoxon(s, statistic or "WPlus", zero_policy, continuity, p_method, tail)


# ---------------------------------------------------------------------------
# Variance tests
# ---------------------------------------------------------------------------

def _one_way_anova(groups: Sequence[np.ndarray]) -> Optional[Tuple[float, float, float]]:
    """(F, df_between, df_within) or None when within-group dispersion is zero"""
    pooled = np.concatenate(groups)
    n, g = pooled.size, len(groups)
    if n - g <= 0:
        raise DomainError(f"ANOVA needs more observations than groups (n={n}, g={g})")
    grand = float(np.mean(pooled))
    between = sum(x.size * (float(np.mean(x)) - grand) ** 2 for x in groups)
    within = sum(float(np.sum((x - np.mean(x)) ** 2)) for x in groups)
    if within == 0.0:
        return None
    return (between / (g - 1)) / (within / (n - g)), float(g - 1), float(n - g)


def trimmed_mean(x: np.ndarray, proportion: float) -> float:
    """Mean after cutting int(proportion * n) values from each end"""
    if not 0.0 <= proportion < 0.5:
        raise DomainError(f"trim proportion must lie in [0, 0.5), got {proportion}")
    cut = int(proportion * x.size)
    ordered = np.sort(x)
    return float(np.mean(ordered[cut:x.size - cut]))


def variance_tests(s: SampleGroups, kind: VarianceTestKind = VarianceTestKind.LEVENE, tail: Tail = Tail.TWO_SIDED,
                   center: LeveneCenter = LeveneCenter.MEDIAN, proportion: float = 0.1) -> TestResult:
    """
    F test, Bartlett test and Levene test with a chosen center.

    Raises:
        DomainError: A zero-variance group (F, Bartlett)
    """
    kind = VarianceTestKind(kind)
    tail = Tail(tail)

    if kind == VarianceTestKind.F_TEST:
        descriptor = describe(MetricId.F_TEST, "VarianceRatio", tail=tail.value)
        x, y = s.pair()
        v1, v2 = float(np.var(x, ddof=1)), float(np.var(y, ddof=1))
        if v1 == 0.0 or v2 == 0.0:
            raise DomainError("F test needs non-zero variance in both groups")
        f = v1 / v2
        d1, d2 = float(x.size - 1), float(y.size - 1)
        return _result(descriptor, f, tail_p_value(f_cdf(f, d1, d2), f_sf(f, d1, d2), tail.value), (d1, d2))

    s.require_groups(2)
    if kind == VarianceTestKind.BARTLETT:
        descriptor = describe(MetricId.BARTLETT, "Standard")
        sizes = np.array(s.sizes, dtype=float)
        variances = np.array([np.var(x, ddof=1) for x in s.groups])
        if np.any(variances == 0):
            raise DomainError("Bartlett test needs non-zero variance in every group")
        n, g = float(sizes.sum()), float(s.g)
        pooled = float(np.sum((sizes - 1) * variances)) / (n - g)
        numerator = (n - g) * math.log(pooled) - float(np.sum((sizes - 1) * np.log(variances)))
        denominator = 1.0 + (float(np.sum(1.0 / (sizes - 1))) - 1.0 / (n - g)) / (3.0 * (g - 1))
        stat = numerator / denominator
        df = g - 1
        return _result(descriptor, stat, chi2_sf(stat, df), (df,))

    center = LeveneCenter(center)
    if center == LeveneCenter.TRIMMED:
        descriptor = describe(MetricId.LEVENE, center.value, proportion=float(proportion))
        centers = [trimmed_mean(x, proportion) for x in s.groups]
    else:
        descriptor = describe(MetricId.LEVENE, center.value)
        centers = [float(np.mean(x) if center == LeveneCenter.MEAN else np.median(x)) for x in s.groups]
    deviations = [np.abs(x - c) for x, c in zip(s.groups, centers)]
    anova = _one_way_anova(deviations)
    if anova is None:
        return TestResult.undefined(descriptor, "zero dispersion of absolute deviations")
    f, d1, d2 = anova
    return _result(descriptor, f, f_sf(f, d1, d2), (d1, d2))


# ---------------------------------------------------------------------------
# Distribution tests
# ---------------------------------------------------------------------------

_SW_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SW_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_SW_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_SW_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_SW_C6 = (-0.4803, -0.082676, 0.0030302)
_SW_G = (-2.273, 0.459)


def _poly(coefficients: Sequence[float], x: float) -> float:
    return sum(c * x ** i for i, c in enumerate(coefficients))


def shapiro_wilk_coefficients(n: int) -> np.ndarray:
    """Royston's approximation of the Shapiro-Wilk weights for the upper half"""
    half = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    m = np.array([normal_ppf((i - 0.375) / (n + 0.25)) for i in range(1, half + 1)])
    summ2 = 2.0 * float(np.sum(m * m))
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a = np.zeros(half)
    a[0] = _poly(_SW_C1, rsn) - m[0] / ssumm2
    if n > 5:
        start = 2
        a[1] = -m[1] / ssumm2 + _poly(_SW_C2, rsn)
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a[0] ** 2 - 2.0 * a[1] ** 2))
    else:
        start = 1
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a[0] ** 2))
    a[start:] = -m[start:] / fac
    return a


def _shapiro_wilk(x: np.ndarray) -> TestResult:
    descriptor = describe(MetricId.SHAPIRO_WILK, "Royston")
    n = x.size
    if not 3 <= n <= 5000:
        raise MetricError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    ordered = np.sort(x)
    spread = ordered[-1] - ordered[0]
    if spread == 0.0:
        return TestResult.undefined(descriptor, "all observations identical")
    ordered = (ordered - ordered[0]) / spread
    half = shapiro_wilk_coefficients(n)
    weights = np.zeros(n)
    weights[:half.size] = -half
    weights[n - half.size:] = half[::-1]
    centered = ordered - ordered.mean()
    w = min(1.0, float(np.dot(weights, ordered)) ** 2 / float(np.dot(centered, centered)))

    if n == 3:
        p = max(0.0, 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0))
        return _result(descriptor, w, min(1.0, p))
    w1 = 1.0 - w
    if w1 <= 0.0:
        return _result(descriptor, w, 1.0)
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_SW_G, n)
        if y >= gamma:
            return _result(descriptor, w, 0.0)
        y = -math.log(gamma - y)
        mean = _poly(_SW_C3, n)
        sd = math.exp(_poly(_SW_C4, n))
    else:
        log_n = math.log(n)
        mean = _poly(_SW_C5, log_n)
        sd = math.exp(_poly(_SW_C6, log_n))
    return _result(descriptor, w, normal_sf((y - mean) / sd))


def chi_square_gof(observed, expected=None, ddof: int = 0) -> TestResult:
    """Pearson goodness of fit; expected defaults to uniform counts"""
    descriptor = describe(MetricId.CHI_SQUARE_GOF, "Pearson", ddof=int(ddof))
    observed = as_float_array(observed, "observed", min_length=2)
    if np.any(observed < 0):
        raise DomainError("observed counts must be non-negative")
    if expected is None:
        expected = np.full(observed.size, observed.mean())
    expected = as_float_array(expected, "expected", min_length=2)
    if expected.size != observed.size:
        raise ShapeError(f"{observed.size} observed cells but {expected.size} expected")
    if np.any(expected <= 0):
        raise DomainError("expected counts must be positive")
    if abs(observed.sum() - expected.sum()) > 1e-8 * max(1.0, observed.sum()):
        raise DomainError("observed and expected totals differ")
    df = observed.size - 1 - int(ddof)
    if df < 1:
        raise DomainError(f"chi-square needs at least one degree of freedom, got {df}")
    stat = float(np.sum((observed - expected) ** 2 / expected))
    return _result(descriptor, stat, chi2_sf(stat, df), (float(df),))


def chi_square_independence(table, yates: bool = False) -> TestResult:
    """Pearson test of independence; Yates correction applies only when df = 1"""
    descriptor = describe(MetricId.CHI_SQUARE_INDEPENDENCE, "Pearson", yates=bool(yates))
    observed = np.asarray(table, dtype=float)
    if observed.ndim != 2 or min(observed.shape) < 2:
        raise ShapeError(f"contingency table must be at least 2 x 2, got shape {observed.shape}")
    if not np.all(np.isfinite(observed)) or np.any(observed < 0):
        raise DomainError("contingency counts must be finite and non-negative")
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / observed.sum()
    if np.any(expected == 0):
        raise DomainError("contingency table has a zero expected cell")
    df = (observed.shape[0] - 1) * (observed.shape[1] - 1)
    if yates and df == 1:
        diff = expected - observed
        observed = observed + np.sign(diff) * np.minimum(0.5, np.abs(diff))
    stat = float(np.sum((observed - expected) ** 2 / expected))
    return _result(descriptor, stat, chi2_sf(stat, df), (float(df),))


def distribution_tests(s: Optional[SampleGroups], kind: DistributionTestKind = DistributionTestKind.ANOVA,
                       expected=None, ddof: int = 0, table=None, yates: bool = False) -> TestResult:
    """
    Shapiro-Wilk, chi-square (goodness of fit and independence) and one-way ANOVA.

    Goodness of fit reads observed counts from the first group. Independence
    uses ``table`` when given, otherwise the groups as equal-length rows.
    """
    kind = DistributionTestKind(kind)
    if kind == DistributionTestKind.CHI_SQUARE_INDEPENDENCE:
        if table is None:
            if s is None or len(set(s.sizes)) != 1:
                raise ShapeError("independence test needs a table or equal-length groups")
            table = np.vstack(s.groups)
        return chi_square_independence(table, yates)
    if s is None:
        raise ShapeError(f"{kind.value} needs sample groups")
    if kind == DistributionTestKind.SHAPIRO_WILK:
        return _shapiro_wilk(s.groups[0])
    if kind == DistributionTestKind.CHI_SQUARE_GOF:
        return chi_square_gof(s.groups[0], expected, ddof)

    descriptor = describe(MetricId.ANOVA, "OneWay")
    s.require_groups(2)
    anova = _one_way_anova(s.groups)
    if anova is None:
        return TestResult.undefined(descriptor, "zero within-group variance")
    f, d1, d2 = anova
    return _result(descriptor, f, f_sf(f, d1, d2), (d1, d2))


# ---------------------------------------------------------------------------
# Permutation test
# ---------------------------------------------------------------------------

def _group_statistic(values: np.ndarray, split: int, statistic: PermutationStatistic) -> np.ndarray:
    """Statistic of each row, first ``split`` columns against the rest"""
    if statistic == PermutationStatistic.MEAN_DIFF:
        return values[:, :split].mean(axis=1) - values[:, split:].mean(axis=1)
    return np.median(values[:, :split], axis=1) - np.median(values[:, split:], axis=1)


def _count_extreme(resampled: np.ndarray, observed: float, tail: Tail) -> int:
    tolerance = 1e-12 * max(1.0, abs(observed))
    if tail == Tail.GREATER:
        return int(np.sum(resampled >= observed - tolerance))
    if tail == Tail.LESS:
        return int(np.sum(resampled <= observed + tolerance))
    return int(np.sum(np.abs(resampled) >= abs(observed) - tolerance))


def _monte_carlo_chunk(pooled: np.ndarray, split: int, statistic: PermutationStatistic, observed: float,
                       tail: Tail, seed: int, chunk: int, size: int) -> int:
    """Resamples of one chunk come from a Philox stream keyed by (seed, chunk index)"""
    rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, chunk, 0, 0]))
    order = rng.permuted(np.tile(np.arange(pooled.size), (size, 1)), axis=1)
    return _count_extreme(_group_statistic(pooled[order], split, statistic), observed, tail)


def permutation_test(s: SampleGroups, statistic: PermutationStatistic = PermutationStatistic.MEAN_DIFF,
                     n_resamples: int = 9999, seed: int = 42, tail: Tail = Tail.TWO_SIDED,
                     method: PermutationMethod = PermutationMethod.EXACT_ENUMERATION, workers: int = 1) -> TestResult:
    """
    Two-sample permutation test.

    Exact enumeration visits every split (at most 10^6). Monte Carlo uses
    the add-one estimate (count + 1) / (n_resamples + 1); its resamples are
    drawn in fixed chunks, each seeded from (seed, chunk index), so the
    count does not depend on ``workers``.

    Raises:
        BudgetExceededError: Too many splits for exact enumeration
    """
    statistic = PermutationStatistic(statistic)
    method = PermutationMethod(method)
    tail = Tail(tail)
    x, y = s.pair()
    pooled = np.concatenate((x, y))
    split = x.size
    observed = float(_group_statistic(pooled[None, :], split, statistic)[0])

    if method == PermutationMethod.EXACT_ENUMERATION:
        descriptor = describe(MetricId.PERMUTATION_TEST, method.value, statistic=statistic.value, tail=tail.value)
        total = math.comb(pooled.size, split)
        if total > EXACT_PERMUTATION_LIMIT:
            raise BudgetExceededError(f"{total} splits exceed the exact limit of {EXACT_PERMUTATION_LIMIT}")
        everyone = np.arange(pooled.size)
        count = 0
        combos = itertools.combinations(range(pooled.size), split)
        while True:
            block = list(itertools.islice(combos, 65536))
            if not block:
                break
            first = np.array(block, dtype=np.int64)
            mask = np.ones((first.shape[0], pooled.size), dtype=bool)
            mask[np.arange(first.shape[0])[:, None], first] = False
            rest = np.broadcast_to(everyone, mask.shape)[mask].reshape(first.shape[0], -1)
            order = np.concatenate((first, rest), axis=1)
            count += _count_extreme(_group_statistic(pooled[order], split, statistic), observed, tail)
        return _result(descriptor, observed, count / total)

    if n_resamples < 1:
        raise DomainError(f"n_resamples must be positive, got {n_resamples}")
    descriptor = describe(MetricId.PERMUTATION_TEST, method.value, statistic=statistic.value, tail=tail.value,
                          n_resamples=int(n_resamples), seed=int(seed))
    chunks = [(c, min(MC_CHUNK, n_resamples - c * MC_CHUNK)) for c in range(math.ceil(n_resamples / MC_CHUNK))]

    def run(chunk: Tuple[int, int]) -> int:
        return _monte_carlo_chunk(pooled, split, statistic, observed, tail, int(seed), chunk[0], chunk[1])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            count = sum(pool.map(run, chunks))
    else:
        count = sum(map(run, chunks))
    return _result(descriptor, observed, (count + 1) / (n_resamples + 1))
