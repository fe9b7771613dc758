"""Shared generators for randomized tests."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from xlmem.correlation import LanguageSignal
from xlmem.graph import LanguageGraph, build_graph
from xlmem.subspace import SimilarityMatrix

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def random_similarity(rng: np.random.Generator, n: int) -> SimilarityMatrix:
    """Symmetric matrix with off-diagonal entries uniform in [0, 1]."""
    values = np.triu(rng.uniform(0.0, 1.0, size=(n, n)), k=1)
    values = values + values.T
    np.fill_diagonal(values, 1.0)
    return SimilarityMatrix(languages=tuple(f"l{i}" for i in range(n)), values=values)


def random_graph(rng: np.random.Generator, n: int, edge_prob: float = 0.5) -> LanguageGraph:
    """Erdos-Renyi-style graph: thresholding uniform similarities at 1 - p."""
    return build_graph(random_similarity(rng, n), theta=1.0 - edge_prob)


def signal_on(graph_or_langs, values) -> LanguageSignal:
    languages = getattr(graph_or_langs, "languages", graph_or_langs)
    return LanguageSignal(languages=tuple(languages), values=np.asarray(values, dtype=float))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
