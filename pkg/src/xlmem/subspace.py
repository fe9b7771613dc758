"""Language-specific subspace extraction and pairwise language similarity.

Per-language mean embeddings from one hidden layer of a multilingual model
are decomposed into a shared (language-agnostic) mean component and a
low-rank language-specific subspace.  Embeddings projected into that
subspace yield a cosine similarity matrix over language pairs, which is the
input to the graph construction in :mod:`xlmem.graph`.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateProjection,
    DimensionMismatch,
    EmptyInput,
    InsufficientOverlap,
    NumericalError,
    RankError,
    SchemaError,
)

__all__ = [
    "LayerEmbeddings",
    "SubspaceModel",
    "SimilarityMatrix",
    "mean_embeddings",
    "identify_subspace",
    "project_language",
    "similarity_matrix",
    "matrix_correlation",
    "load_embeddings_jsonl",
]

# Norm below which a projected embedding is treated as degenerate.
_PROJECTION_EPS = 1e-12


@dataclass(frozen=True)
class LayerEmbeddings:
    """Per-language mean embeddings extracted from a single hidden layer."""

    layer: int
    dim: int
    vectors: Mapping[str, np.ndarray]

    def __post_init__(self) -> None:
        if self.layer < 0:
            raise SchemaError(f"layer index must be >= 0, got {self.layer}")
        if self.dim <= 0:
            raise SchemaError(f"embedding dim must be > 0, got {self.dim}")
        if len(self.vectors) < 2:
            raise SchemaError("need mean embeddings for at least 2 languages")
        clean: dict[str, np.ndarray] = {}
        for lang, vec in self.vectors.items():
            arr = np.asarray(vec, dtype=float)
            if arr.shape != (self.dim,):
                raise DimensionMismatch(
                    f"embedding for {lang!r} has length {arr.shape}, expected ({self.dim},)"
                )
            arr = arr.copy()
            arr.setflags(write=False)
            clean[lang] = arr
        object.__setattr__(self, "vectors", clean)

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(self.vectors)

    def matrix(self) -> np.ndarray:
        """Stack mean embeddings into a dim x n_languages matrix (column per language)."""
        return np.column_stack([self.vectors[lang] for lang in self.vectors])


@dataclass(frozen=True)
class SubspaceModel:
    """Shared mean plus orthonormal language-specific basis and coordinates.

    ``basis`` has shape (dim, rank) with orthonormal columns; ``coords`` has
    shape (n_languages, rank) so that ``mu 1^T + basis @ coords.T``
    reconstructs the input embedding matrix.
    """

    mu: np.ndarray
    basis: np.ndarray
    coords: np.ndarray
    rank: int

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        basis = np.asarray(self.basis, dtype=float)
        coords = np.asarray(self.coords, dtype=float)
        d = mu.shape[0]
        if basis.shape != (d, self.rank):
            raise DimensionMismatch(
                f"basis shape {basis.shape} inconsistent with dim {d}, rank {self.rank}"
            )
        if coords.ndim != 2 or coords.shape[1] != self.rank:
            raise DimensionMismatch(f"coords shape {coords.shape} inconsistent with rank {self.rank}")
        n_lang = coords.shape[0]
        if not 1 <= self.rank < min(d, n_lang):
            raise RankError(f"rank must satisfy 1 <= r < min(dim={d}, n_languages={n_lang})")
        gram = basis.T @ basis
        if np.abs(gram - np.eye(self.rank)).max() > 1e-9:
            raise NumericalError("basis columns are not orthonormal within 1e-9")
        for name, arr in (("mu", mu), ("basis", basis), ("coords", coords)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    def reconstruction(self) -> np.ndarray:
        """Rank-r reconstruction of the embedding matrix this model was fitted on."""
        return self.mu[:, None] + self.basis @ self.coords.T


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric matrix of pairwise language similarities in [-1, 1]."""

    languages: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        langs = tuple(self.languages)
        if len(set(langs)) != len(langs):
            raise SchemaError("duplicate language identifiers")
        vals = np.asarray(self.values, dtype=float)
        n = len(langs)
        if vals.shape != (n, n):
            raise DimensionMismatch(f"matrix shape {vals.shape} does not match {n} languages")
        if np.abs(vals - vals.T).max() > 1e-9:
            raise SchemaError("similarity matrix is not symmetric within 1e-9")
        if np.abs(np.diagonal(vals) - 1.0).max() > 1e-9:
            raise SchemaError("similarity matrix diagonal is not 1 within 1e-9")
        if vals.min() < -1.0 - 1e-9 or vals.max() > 1.0 + 1e-9:
            raise SchemaError("similarity values outside [-1, 1] tolerance")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "languages", langs)
        object.__setattr__(self, "values", vals)

    @property
    def n_languages(self) -> int:
        return len(self.languages)

    def to_csv(self, path: str | Path) -> None:
        """Write as CSV: header row of language codes, square numeric body."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.languages)
            for row in self.values:
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "SimilarityMatrix":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                languages = tuple(next(reader))
            except StopIteration:
                raise SchemaError(f"{path}: empty similarity CSV") from None
            rows = [row for row in reader if row]
        if len(rows) != len(languages):
            raise SchemaError(
                f"{path}: expected {len(languages)} rows to match header, got {len(rows)}"
            )
        try:
            values = np.array([[float(v) for v in row] for row in rows], dtype=float)
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric similarity value ({exc})") from None
        return cls(languages=languages, values=values)


def mean_embeddings(sentence_vectors: Sequence[Sequence[float]], dim: int) -> np.ndarray:
    """Coordinate-wise arithmetic mean of sentence embedding vectors.

    Parameters
    ----------
    sentence_vectors : sequence of length-`dim` vectors
    dim : expected vector length

    Returns
    -------
    numpy array of shape (dim,)
    """
    if len(sentence_vectors) == 0:
        raise EmptyInput("cannot average an empty list of sentence vectors")
    out = np.zeros(dim, dtype=float)
    for i, vec in enumerate(sentence_vectors):
        arr = np.asarray(vec, dtype=float)
        if arr.shape != (dim,):
            raise DimensionMismatch(f"sentence vector {i} has shape {arr.shape}, expected ({dim},)")
        out += arr
    return out / len(sentence_vectors)


def identify_subspace(embeddings: LayerEmbeddings, rank: int) -> SubspaceModel:
    """Split mean embeddings into a shared mean and a language-specific subspace.

    Two-step procedure on the dim x n matrix M of per-language means:

    1. Low-rank approximation: subtract the column mean, keep the top-`rank`
       SVD factors, and rebuild ``M' = mu' 1^T + (top-r factors)``.
    2. Orthogonality forcing: recompute the shared mean as
       ``mu = pinv(M')^T 1 / ||pinv(M')^T 1||^2`` (the unique mean that makes
       the residual ``M' - mu 1^T`` orthogonal to ``mu`` whenever the all-ones
       vector lies in the row space of M'), then take the top-`rank` SVD of
       the re-centered matrix.

    The sign of each basis column is fixed by making its largest-magnitude
    entry positive, so results are deterministic across SVD backends.

    Returns
    -------
    SubspaceModel with orthonormal ``basis`` and coordinates ``coords`` such
    that ``mu 1^T + basis @ coords.T`` approximates M.
    """
    M = embeddings.matrix()
    d, n_lang = M.shape
    if not 1 <= rank < min(d, n_lang):
        raise RankError(f"rank must satisfy 1 <= r < min(dim={d}, n_languages={n_lang}), got {rank}")
    ones = np.ones(n_lang)
    try:
        mu0 = M @ ones / n_lang
        u, s, vt = np.linalg.svd(M - mu0[:, None], full_matrices=False)
        approx = mu0[:, None] + u[:, :rank] @ (s[:rank, None] * vt[:rank])

        pinv_t = np.linalg.pinv(approx).T
        w = pinv_t @ ones
        w_sq = float(w @ w)
        # The all-ones vector can be orthogonal to the row space (e.g. data
        # centered across languages); then w vanishes and the column mean is
        # already the orthogonality-consistent choice.
        if w_sq > (1e-12 * max(1.0, float(np.abs(pinv_t).max())) ** 2):
            mu = w / w_sq
        else:
            mu = approx @ ones / n_lang

        u2, s2, v2t = np.linalg.svd(approx - mu[:, None], full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from exc

    basis = u2[:, :rank].copy()
    coords = (v2t[:rank].T * s2[:rank]).copy()
    for k in range(rank):
        pivot = np.argmax(np.abs(basis[:, k]))
        if basis[pivot, k] < 0:
            basis[:, k] = -basis[:, k]
            coords[:, k] = -coords[:, k]
    return SubspaceModel(mu=mu, basis=basis, coords=coords, rank=rank)


def project_language(model: SubspaceModel, embedding: Sequence[float]) -> np.ndarray:
    """Orthogonal projection of an embedding onto the language-specific subspace."""
    arr = np.asarray(embedding, dtype=float)
    if arr.shape != (model.dim,):
        raise DimensionMismatch(f"embedding has shape {arr.shape}, expected ({model.dim},)")
    return model.basis @ (model.basis.T @ arr)


def similarity_matrix(model: SubspaceModel, embeddings: LayerEmbeddings) -> SimilarityMatrix:
    """Pairwise cosine similarity of subspace-projected mean embeddings."""
    if embeddings.dim != model.dim:
        raise DimensionMismatch(
            f"embeddings dim {embeddings.dim} does not match subspace dim {model.dim}"
        )
    langs = embeddings.languages
    projected = np.empty((model.dim, len(langs)))
    for j, lang in enumerate(langs):
        vec = project_language(model, embeddings.vectors[lang])
        norm = float(np.linalg.norm(vec))
        if norm <= _PROJECTION_EPS:
            raise DegenerateProjection(
                f"projection of language {lang!r} has norm {norm:.3e}; cosine undefined"
            )
        projected[:, j] = vec / norm
    values = projected.T @ projected
    values = (values + values.T) / 2.0
    np.fill_diagonal(values, 1.0)
    np.clip(values, -1.0, 1.0, out=values)
    return SimilarityMatrix(languages=langs, values=values)


def matrix_correlation(a: SimilarityMatrix, b: SimilarityMatrix) -> float:
    """Pearson correlation of two similarity matrices over shared language pairs.

    The language sets are intersected (kept in `a`'s order) and the strict
    upper triangles of both reordered matrices are correlated.  Used to
    compare model-derived similarities against externally supplied matrices.
    """
    in_b = set(b.languages)
    shared = [lang for lang in a.languages if lang in in_b]
    if len(shared) < 3:
        raise InsufficientOverlap(
            f"need at least 3 shared languages, got {len(shared)}"
        )
    idx_a = [a.languages.index(lang) for lang in shared]
    idx_b = [b.languages.index(lang) for lang in shared]
    sub_a = a.values[np.ix_(idx_a, idx_a)]
    sub_b = b.values[np.ix_(idx_b, idx_b)]
    iu = np.triu_indices(len(shared), k=1)
    from .correlation import _pearson  # local import avoids a module cycle

    return _pearson(sub_a[iu], sub_b[iu])


def load_embeddings_jsonl(
    path: str | Path, layer: int | None = None
) -> LayerEmbeddings:
    """Load mean embeddings for one layer from a JSON-lines file.

    Each line is either a per-language record
    ``{"language", "layer", "dim", "vector"}`` or a per-sentence record with
    an additional ``"sentence_id"``; sentence records are averaged per
    language.  ``layer=None`` selects the highest layer index present (the
    final hidden layer).
    """
    by_layer: dict[int, dict[str, list[list[float]]]] = defaultdict(lambda: defaultdict(list))
    means: dict[int, dict[str, np.ndarray]] = defaultdict(dict)
    dims: dict[int, int] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            try:
                lang = rec["language"]
                lyr = int(rec["layer"])
                dim = int(rec["dim"])
                vec = rec["vector"]
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{path}:{lineno}: bad embedding record ({exc})") from None
            if len(vec) != dim:
                raise SchemaError(
                    f"{path}:{lineno}: vector length {len(vec)} does not match dim {dim}"
                )
            if lyr in dims and dims[lyr] != dim:
                raise SchemaError(f"{path}:{lineno}: conflicting dim for layer {lyr}")
            dims[lyr] = dim
            if "sentence_id" in rec:
                by_layer[lyr][lang].append(vec)
            else:
                if lang in means[lyr]:
                    raise SchemaError(f"{path}:{lineno}: duplicate mean record for {lang!r} layer {lyr}")
                means[lyr][lang] = np.asarray(vec, dtype=float)
    layers = sorted(set(by_layer) | set(means))
    if not layers:
        raise EmptyInput(f"{path}: no embedding records found")
    selected = max(layers) if layer is None else layer
    if selected not in layers:
        raise SchemaError(f"{path}: layer {selected} not present (available: {layers})")
    vectors = dict(means.get(selected, {}))
    for lang, sentences in by_layer.get(selected, {}).items():
        if lang in vectors:
            raise SchemaError(f"{path}: language {lang!r} has both mean and sentence records")
        vectors[lang] = mean_embeddings(sentences, dims[selected])
    return LayerEmbeddings(layer=selected, dim=dims[selected], vectors=vectors)
