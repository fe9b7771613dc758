"""Deterministic synthetic fixtures for tests and demos.

These generators plant known structure (language families, similarity
clusters, within-family memorization trends) so the correlation machinery
can be exercised end to end without running any model inference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import LanguageSignal
from .subspace import SimilarityMatrix

__all__ = ["FamilyFixture", "family_fixture", "clustered_similarity", "two_cluster_similarity"]

# Family token volumes and per-metric family baselines.  The baselines are
# deliberately shuffled against the token volumes so that family-level
# (cross-topology) variation carries no token/memorization trend, while
# within every family memorization decreases linearly in token count.
_TOKEN_BASES = (2.0e6, 5.0e6, 8.0e6, 12.0e6)
_TOKEN_SPREAD = 0.8e6
_METRIC_PARAMS: dict[str, tuple[tuple[float, float, float, float], float, float]] = {
    # name: (family baselines, within-family amplitude, noise sd)
    "EM": ((0.32, 0.58, 0.20, 0.44), 0.10, 0.004),
    "PM": ((-46.0, -33.0, -52.0, -40.0), 4.0, 0.15),
    "RM_BLEU": ((5.5, 11.0, 3.0, 8.0), 1.4, 0.05),
    "RM_ROUGE_L": ((8.5, 14.0, 6.0, 11.0), 1.6, 0.06),
}


@dataclass(frozen=True)
class FamilyFixture:
    similarity: SimilarityMatrix
    tokens: LanguageSignal
    signals: dict[str, LanguageSignal]
    family_of: tuple[int, ...]


def family_fixture(
    n_families: int = 4,
    family_size: int = 6,
    within: float = 0.9,
    cross: float = 0.2,
    seed: int = 20240801,
) -> FamilyFixture:
    """Plant language families with inverse token/memorization coupling inside each.

    Within a family, languages with more training tokens get lower values on
    every memorization signal; across families the two are unrelated.  Any
    threshold between `cross` and `within` therefore splits the graph into
    one clique per family, where the graph correlation is strongly negative
    while the flat Pearson over all languages stays near zero.
    """
    rng = np.random.default_rng(seed)
    languages = tuple(
        f"fam{k}_lang{i}" for k in range(n_families) for i in range(family_size)
    )
    family_of = tuple(k for k in range(n_families) for _ in range(family_size))
    fam = np.asarray(family_of)

    values = np.where(fam[:, None] == fam[None, :], within, cross)
    np.fill_diagonal(values, 1.0)
    similarity = SimilarityMatrix(languages=languages, values=values)

    bases = np.resize(np.asarray(_TOKEN_BASES), n_families)
    offsets = np.linspace(-1.0, 1.0, family_size) * _TOKEN_SPREAD
    token_values = np.concatenate(
        [bases[k] + rng.permutation(offsets) for k in range(n_families)]
    )
    tokens = LanguageSignal(languages=languages, values=token_values)

    signals: dict[str, LanguageSignal] = {}
    for name, (baselines, amplitude, noise_sd) in _METRIC_PARAMS.items():
        base = np.resize(np.asarray(baselines), n_families)
        vals = np.concatenate(
            [
                base[k]
                - amplitude * (token_values[fam == k] - bases[k]) / _TOKEN_SPREAD
                + rng.normal(0.0, noise_sd, family_size)
                for k in range(n_families)
            ]
        )
        signals[name] = LanguageSignal(languages=languages, values=vals)
    return FamilyFixture(
        similarity=similarity, tokens=tokens, signals=signals, family_of=family_of
    )


def clustered_similarity(
    n_languages: int = 95,
    n_clusters: int = 22,
    within_range: tuple[float, float] = (0.35, 0.90),
    cross_range: tuple[float, float] = (0.00, 0.40),
    jitter: float = 0.01,
    seed: int = 7,
) -> SimilarityMatrix:
    """Random similarity matrix with planted clusters of uneven sizes.

    Cross-cluster similarity is drawn once per cluster pair (plus small
    per-language jitter), so raising a threshold detaches whole clusters one
    affinity at a time instead of percolating through independent pairs.
    """
    rng = np.random.default_rng(seed)
    assignment = np.sort(rng.integers(0, n_clusters, size=n_languages))
    affinity = rng.uniform(*cross_range, size=(n_clusters, n_clusters))
    affinity = np.triu(affinity, k=1)
    affinity = affinity + affinity.T
    values = affinity[np.ix_(assignment, assignment)] + rng.normal(
        0.0, jitter, size=(n_languages, n_languages)
    )
    same = assignment[:, None] == assignment[None, :]
    values[same] = rng.uniform(*within_range, size=int(same.sum()))
    values = np.triu(values, k=1)
    values = values + values.T
    np.clip(values, -1.0, 1.0, out=values)
    np.fill_diagonal(values, 1.0)
    languages = tuple(f"l{i:02d}" for i in range(n_languages))
    return SimilarityMatrix(languages=languages, values=values)


def two_cluster_similarity(
    cluster_size: int = 3, within: float = 0.8, bridge: float = 0.45
) -> SimilarityMatrix:
    """Two planted clusters connected only at similarity `bridge`.

    Thresholds at or below `bridge` see one component; anything above it
    (up to `within`) sees exactly two.
    """
    n = 2 * cluster_size
    half = np.arange(n) // cluster_size
    values = np.where(half[:, None] == half[None, :], within, bridge)
    np.fill_diagonal(values, 1.0)
    languages = tuple(f"c{h}_l{i}" for h, i in zip(half, np.arange(n) % cluster_size))
    return SimilarityMatrix(languages=languages, values=values)
