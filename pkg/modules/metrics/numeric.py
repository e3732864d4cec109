"""
Numeric helpers shared across metric modules: input validation, the
zero-denominator fill policy, aggregation, ranks and display rounding.
"""

from decimal import Decimal, ROUND_HALF_EVEN
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .core import DomainError, FillPolicy, ShapeError


def as_float_array(values, name: str = "values", ndim: int = 1, min_length: int = 1) -> np.ndarray:
    """Validate and convert to a finite float64 array"""
    array = np.asarray(values, dtype=float)
    if array.ndim != ndim:
        raise ShapeError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if array.shape[0] < min_length:
        raise ShapeError(f"{name} needs at least {min_length} entries, got {array.shape[0]}")
    if not np.all(np.isfinite(array)):
        raise DomainError(f"{name} must be finite")
    return array


def check_same_length(a: np.ndarray, b: np.ndarray, names: str = "inputs") -> None:
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"{names} differ in length: {a.shape[0]} vs {b.shape[0]}")


def safe_ratio(numerator: float, denominator: float) -> Optional[float]:
    """numerator / denominator, or None when the denominator is zero"""
    if denominator == 0:
        return None
    return float(numerator) / float(denominator)


def fill(value: Optional[float], policy: FillPolicy) -> Optional[float]:
    """Apply the fill policy to a possibly undefined ratio"""
    if value is not None:
        return value
    if policy == FillPolicy.ZERO:
        return 0.0
    if policy == FillPolicy.ONE:
        return 1.0
    return None


def aggregate(values: Sequence[Optional[float]], policy: FillPolicy,
              weights: Optional[Sequence[float]] = None) -> Optional[float]:
    """
    Unweighted (macro) or weighted mean of per-class values.

    Entries with zero weight never contribute. Under FillPolicy.UNDEFINED a
    single undefined contributing entry makes the aggregate undefined;
    DROP skips undefined entries; ZERO/ONE substitute.
    """
    if weights is None:
        weights = [1.0] * len(values)
    if len(weights) != len(values):
        raise ShapeError("weights and values differ in length")
    total = 0.0
    weight_sum = 0.0
    for value, weight in zip(values, weights):
        if weight == 0:
            continue
        value = fill(value, policy)
        if value is None:
            if policy == FillPolicy.DROP:
                continue
            return None
        total += float(weight) * value
        weight_sum += float(weight)
    if weight_sum == 0:
        return None
    return total / weight_sum


def average_ranks(values) -> np.ndarray:
    """1-based ranks with ties sharing their average rank"""
    return rankdata(np.asarray(values, dtype=float), method="average")


def tie_counts(values) -> np.ndarray:
    """Sizes of the tie groups (only groups of size > 1)"""
    _, counts = np.unique(np.asarray(values), return_counts=True)
    return counts[counts > 1]


def tie_term(values) -> float:
    """sum(t^3 - t) over tie groups"""
    t = tie_counts(values).astype(float)
    return float(np.sum(t ** 3 - t))


def comb2(n) -> np.ndarray:
    """n choose 2, elementwise"""
    n = np.asarray(n, dtype=float)
    return n * (n - 1.0) / 2.0


def round_half_even(value: Optional[float], decimals: int = 2) -> Optional[str]:
    """Display rounding; non-finite values are spelled out"""
    if value is None:
        return None
    if np.isnan(value):
        return "nan"
    if np.isinf(value):
        return "inf" if value > 0 else "-inf"
    quantum = Decimal(1).scaleb(-decimals)
    rounded = Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_EVEN)
    if rounded == 0:
        rounded = abs(rounded)
    return str(rounded)
