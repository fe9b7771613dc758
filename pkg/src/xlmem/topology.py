"""Subgraph aggregation, intra-/cross-topology correlation, threshold sweeps."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .correlation import LanguageSignal, _pearson, graph_correlation
from .errors import (
    DegenerateSmoothness,
    DegenerateVariance,
    InsufficientData,
    InsufficientGroups,
    InvalidSubgraph,
    LanguageSetMismatch,
)
from .graph import LanguageGraph, build_graph, components
from .subspace import SimilarityMatrix

__all__ = [
    "SubgraphSummary",
    "SweepRow",
    "aggregate_subgraph",
    "intra_topo_correlation",
    "cross_topo_correlation",
    "threshold_sweep",
    "signal_consistency",
    "summarize_components",
]


@dataclass(frozen=True)
class SubgraphSummary:
    """Degree-weighted aggregate values for one connected group."""

    member_indices: frozenset[int]
    aggregated: Mapping[str, float]
    size: int
    is_singleton: bool


@dataclass(frozen=True)
class SweepRow:
    """One threshold's component counts and correlation cells.

    Correlation cells are ``None`` where the quantity is undefined at this
    threshold (degenerate smoothness, too few groups, or zero variance);
    report writers render those as the literal string ``undefined``.
    """

    theta: float
    subgraph_count: int
    singleton_count: int
    intra: Mapping[str, float | None] = field(default_factory=dict)
    cross: Mapping[str, float | None] = field(default_factory=dict)


def _component_of(graph: LanguageGraph, start: int) -> set[int]:
    """Members of the connected component containing `start` (breadth-first)."""
    seen = {start}
    queue = deque([start])
    adjacency = graph.adjacency
    while queue:
        node = queue.popleft()
        for nbr in np.nonzero(adjacency[node])[0]:
            nbr = int(nbr)
            if nbr not in seen:
                seen.add(nbr)
                queue.append(nbr)
    return seen


def aggregate_subgraph(
    graph: LanguageGraph, members: Iterable[int], signal: LanguageSignal
) -> float:
    """Degree-weighted mean of a signal over one connected component.

    Weights are node degrees recomputed over edges internal to `members`.
    A singleton has no internal edges, so its aggregate is its own value.
    """
    member_set = frozenset(int(i) for i in members)
    if not member_set:
        raise InvalidSubgraph("empty member set")
    if min(member_set) < 0 or max(member_set) >= graph.n_nodes:
        raise InvalidSubgraph(f"member index out of range for {graph.n_nodes}-node graph")
    if _component_of(graph, next(iter(member_set))) != member_set:
        raise InvalidSubgraph("member set is not exactly one connected component")
    if signal.languages != graph.languages:
        raise LanguageSetMismatch("signal ordering differs from the graph's; align it first")
    if len(member_set) == 1:
        return float(signal.values[next(iter(member_set))])
    idx = np.fromiter(sorted(member_set), dtype=int)
    internal = graph.adjacency[np.ix_(idx, idx)]
    weights = internal.sum(axis=1).astype(float)
    return float(weights @ signal.values[idx] / weights.sum())


def intra_topo_correlation(
    graph: LanguageGraph, m: LanguageSignal, t: LanguageSignal
) -> float:
    """Correlation over connected language pairs.

    The Laplacian quadratic forms only involve edges, so this is exactly the
    graph correlation coefficient restricted to the connected part of the
    topology.
    """
    return graph_correlation(graph, m, t)


def cross_topo_correlation(
    graph: LanguageGraph,
    m: LanguageSignal,
    t: LanguageSignal,
    include_singletons: bool = True,
) -> float:
    """Pearson correlation between degree-weighted group aggregates.

    Each connected group contributes one (m-aggregate, t-aggregate) pair;
    singletons contribute their own values when included.
    """
    partition = components(graph)
    groups = partition.groups(include_singletons)
    if len(groups) < 3:
        raise InsufficientGroups(
            f"cross-topology correlation needs >= 3 groups, got {len(groups)}"
        )
    agg_m = np.array([aggregate_subgraph(graph, g, m) for g in groups])
    agg_t = np.array([aggregate_subgraph(graph, g, t) for g in groups])
    return _pearson(agg_m, agg_t)


def summarize_components(
    graph: LanguageGraph,
    signals: Mapping[str, LanguageSignal],
    include_singletons: bool = True,
) -> list[SubgraphSummary]:
    """Per-group aggregates for every named signal."""
    partition = components(graph)
    out = []
    for group in partition.groups(include_singletons):
        aggregated = {name: aggregate_subgraph(graph, group, sig) for name, sig in signals.items()}
        out.append(
            SubgraphSummary(
                member_indices=group,
                aggregated=aggregated,
                size=len(group),
                is_singleton=len(group) == 1,
            )
        )
    return out


def threshold_sweep(
    sim: SimilarityMatrix,
    signals: Mapping[str, LanguageSignal],
    tokens: LanguageSignal,
    thetas: Sequence[float],
    include_singletons: bool = True,
) -> list[SweepRow]:
    """Build the graph at each threshold and correlate every signal with tokens.

    Each row records component counts plus, per signal, the intra-topology
    graph correlation and the cross-topology Pearson against the token-count
    signal.  Degenerate cells are kept as explicit ``None`` markers rather
    than dropped.
    """
    if len(thetas) == 0:
        raise InsufficientData("threshold sweep needs at least one theta")
    for theta in thetas:
        if not -1.0 <= theta <= 1.0:
            raise InsufficientData(f"theta {theta} outside [-1, 1]")
    aligned_tokens = tokens.align_to(sim.languages)
    aligned = {name: sig.align_to(sim.languages) for name, sig in signals.items()}
    rows = []
    for theta in thetas:
        graph = build_graph(sim, theta)
        partition = components(graph)
        intra: dict[str, float | None] = {}
        cross: dict[str, float | None] = {}
        for name, sig in aligned.items():
            try:
                intra[name] = graph_correlation(graph, sig, aligned_tokens)
            except DegenerateSmoothness:
                intra[name] = None
            try:
                cross[name] = cross_topo_correlation(
                    graph, sig, aligned_tokens, include_singletons=include_singletons
                )
            except (InsufficientGroups, DegenerateVariance):
                cross[name] = None
        rows.append(
            SweepRow(
                theta=float(theta),
                subgraph_count=partition.n_subgraphs,
                singleton_count=partition.n_singletons,
                intra=intra,
                cross=cross,
            )
        )
    return rows


def signal_consistency(a: LanguageSignal, b: LanguageSignal) -> float:
    """Pearson correlation of two runs' per-language values over matched languages."""
    if set(a.languages) != set(b.languages):
        missing = sorted(set(a.languages) - set(b.languages))
        extra = sorted(set(b.languages) - set(a.languages))
        raise LanguageSetMismatch(
            f"runs cover different languages (only-in-a={missing}, only-in-b={extra})"
        )
    return _pearson(a.values, b.align_to(a.languages).values)
