"""Thresholded language graphs: adjacency, degrees, Laplacian, components."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _scipy_components

from .subspace import SimilarityMatrix

__all__ = ["LanguageGraph", "ComponentPartition", "build_graph", "components", "graph_to_json"]


@dataclass(frozen=True)
class LanguageGraph:
    """Undirected language graph at a similarity threshold.

    ``adjacency`` is 0/1 (or the retained similarity weights when
    ``weighted``), with zero diagonal; ``laplacian`` is the unnormalized
    ``D - A``.  In the default unweighted case all three arrays are integer,
    so identities like ``L @ 1 == 0`` hold exactly.
    """

    languages: tuple[str, ...]
    theta: float
    adjacency: np.ndarray
    degrees: np.ndarray
    laplacian: np.ndarray
    weighted: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "languages", tuple(self.languages))
        for name in ("adjacency", "degrees", "laplacian"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self) -> int:
        return len(self.languages)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency, k=1)))

    def edges(self) -> list[tuple[int, int]]:
        """Edge list as (i, j) index pairs with i < j."""
        ii, jj = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(ii.tolist(), jj.tolist()))


@dataclass(frozen=True)
class ComponentPartition:
    """Connected components split into multi-node subgraphs and singletons."""

    subgraphs: tuple[frozenset[int], ...]
    singletons: tuple[int, ...]

    @property
    def n_subgraphs(self) -> int:
        return len(self.subgraphs)

    @property
    def n_singletons(self) -> int:
        return len(self.singletons)

    def groups(self, include_singletons: bool = True) -> list[frozenset[int]]:
        """All groups, each as an index set; singletons become size-1 sets."""
        out = list(self.subgraphs)
        if include_singletons:
            out.extend(frozenset((i,)) for i in self.singletons)
        return out


def build_graph(sim: SimilarityMatrix, theta: float, weighted: bool = False) -> LanguageGraph:
    """Threshold a similarity matrix into a self-loop-free language graph.

    An edge joins languages i != j iff ``sim(i, j) >= theta`` (ties
    included).  By default edges are unweighted 0/1; with ``weighted=True``
    the retained entries keep their similarity values instead.
    An edgeless graph is a legal result.
    """
    values = (sim.values + sim.values.T) / 2.0  # guard against 1e-10 asymmetry at ties
    keep = values >= theta
    np.fill_diagonal(keep, False)
    if weighted:
        adjacency = np.where(keep, values, 0.0)
        degrees = adjacency.sum(axis=1)
    else:
        adjacency = keep.astype(np.int64)
        degrees = adjacency.sum(axis=1)
    laplacian = np.diag(degrees) - adjacency
    return LanguageGraph(
        languages=sim.languages,
        theta=float(theta),
        adjacency=adjacency,
        degrees=degrees,
        laplacian=laplacian,
        weighted=weighted,
    )


def components(graph: LanguageGraph) -> ComponentPartition:
    """Partition the graph into connected components.

    Components with at least two members are reported as subgraphs (ordered
    by their smallest member index); degree-zero nodes are singletons.
    """
    n = graph.n_nodes
    _, labels = _scipy_components(csr_matrix(graph.adjacency), directed=False)
    members: dict[int, set[int]] = {}
    for node, label in enumerate(labels):
        members.setdefault(int(label), set()).add(node)
    subgraphs = sorted((group for group in members.values() if len(group) > 1), key=min)
    singletons = sorted(node for group in members.values() if len(group) == 1 for node in group)
    return ComponentPartition(
        subgraphs=tuple(frozenset(g) for g in subgraphs),
        singletons=tuple(singletons),
    )


def graph_to_json(graph: LanguageGraph) -> dict:
    """JSON-serializable form: threshold, languages, and the edge list."""
    return {
        "theta": graph.theta,
        "languages": list(graph.languages),
        "edges": [[i, j] for i, j in graph.edges()],
    }


def write_graph_json(path: str | Path, graph: LanguageGraph) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_json(graph), fh, indent=2, sort_keys=True)
        fh.write("\n")
