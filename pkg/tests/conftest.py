"""Shared fixtures and hypothesis strategies"""

import numpy as np
import pytest
from hypothesis import strategies as st

from modules.metrics.core import ConfusionMatrix


@st.composite
def confusion_matrices(draw, max_classes: int = 5, max_total: int = 200):
    k = draw(st.integers(2, max_classes))
    total = draw(st.integers(1, max_total))
    cells = draw(st.lists(st.integers(0, 1000), min_size=k * k, max_size=k * k))
    weights = np.array(cells, dtype=float) + 1e-9
    counts = np.floor(weights / weights.sum() * total).astype(int).reshape(k, k)
    counts[0, 0] += total - counts.sum()
    return ConfusionMatrix(counts)


@st.composite
def label_pairs(draw, max_classes: int = 5, max_n: int = 200):
    """(y_true, y_pred, labels) with a declared label set"""
    k = draw(st.integers(2, max_classes))
    n = draw(st.integers(1, max_n))
    y_true = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    y_pred = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    return y_true, y_pred, tuple(range(k))


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def random_confusion_matrices():
    """1,000 seeded confusion matrices with K <= 5 and n <= 200"""
    generator = np.random.default_rng(2024)
    matrices = []
    for _ in range(1000):
        k = int(generator.integers(2, 6))
        n = int(generator.integers(1, 201))
        y_true = generator.integers(0, k, n)
        y_pred = np.where(generator.random(n) < 0.6, y_true, generator.integers(0, k, n))
        counts = np.zeros((k, k), dtype=int)
        np.add.at(counts, (y_true, y_pred), 1)
        matrices.append(ConfusionMatrix(counts))
    return matrices
