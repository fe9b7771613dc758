"""Graph smoothness, cross-smoothness, and correlation coefficients.

The central quantity is the graph-based correlation coefficient between two
per-language signals x and y over a language graph with Laplacian L:

    rho_G(x, y) = (x^T L y) / sqrt((x^T L x) (y^T L y))

which the Cauchy-Schwarz inequality bounds to [-1, 1].  A flat Pearson
coefficient is provided as the structure-blind baseline.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateSmoothness,
    DegenerateVariance,
    DimensionMismatch,
    InsufficientData,
    LanguageSetMismatch,
    SchemaError,
)
from .graph import LanguageGraph

__all__ = [
    "LanguageSignal",
    "smoothness",
    "cross_smoothness",
    "graph_correlation",
    "pearson",
]


@dataclass(frozen=True)
class LanguageSignal:
    """One scalar per language (memorization rate, token count, ...)."""

    languages: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        langs = tuple(self.languages)
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(langs),):
            raise DimensionMismatch(
                f"signal has {vals.shape} values for {len(langs)} languages"
            )
        if len(set(langs)) != len(langs):
            raise SchemaError("duplicate language identifiers in signal")
        if not np.all(np.isfinite(vals)):
            bad = langs[int(np.flatnonzero(~np.isfinite(vals))[0])]
            raise SchemaError(f"non-finite signal value for language {bad!r}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "languages", langs)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.languages)

    def align_to(self, languages: Sequence[str]) -> "LanguageSignal":
        """Reorder to the given language list; missing/extra languages are an error."""
        target = tuple(languages)
        if set(target) != set(self.languages):
            missing = sorted(set(target) - set(self.languages))
            extra = sorted(set(self.languages) - set(target))
            raise LanguageSetMismatch(
                f"signal languages do not match target (missing={missing}, extra={extra})"
            )
        index = {lang: i for i, lang in enumerate(self.languages)}
        values = self.values[[index[lang] for lang in target]]
        return LanguageSignal(languages=target, values=values)

    def log_scaled(self) -> "LanguageSignal":
        """Natural-log transform; requires strictly positive values."""
        if self.values.min() <= 0:
            bad = self.languages[int(np.argmin(self.values))]
            raise SchemaError(f"log scale requires positive values; {bad!r} is {self.values.min()}")
        return LanguageSignal(languages=self.languages, values=np.log(self.values))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["language", "value"])
            for lang, val in zip(self.languages, self.values):
                writer.writerow([lang, repr(float(val))])

    @classmethod
    def from_csv(cls, path: str | Path) -> "LanguageSignal":
        """Read a `language,value` CSV with a header row."""
        langs: list[str] = []
        vals: list[float] = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip().lower() for h in header[:2]] != ["language", "value"]:
                raise SchemaError(f"{path}: expected header 'language,value'")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) < 2:
                    raise SchemaError(f"{path}:{lineno}: expected two columns")
                try:
                    vals.append(float(row[1]))
                except ValueError:
                    raise SchemaError(f"{path}:{lineno}: non-numeric value {row[1]!r}") from None
                langs.append(row[0])
        if not langs:
            raise SchemaError(f"{path}: no signal rows")
        return cls(languages=tuple(langs), values=np.array(vals))


def _check_signal(graph: LanguageGraph, signal: LanguageSignal) -> np.ndarray:
    if len(signal) != graph.n_nodes:
        raise DimensionMismatch(
            f"signal length {len(signal)} does not match graph with {graph.n_nodes} nodes"
        )
    if signal.languages != graph.languages:
        raise LanguageSetMismatch(
            "signal language ordering differs from the graph's; align it first"
        )
    return signal.values


def smoothness(graph: LanguageGraph, x: LanguageSignal) -> float:
    """Quadratic form x^T L x, the total squared variation of x across edges."""
    vx = _check_signal(graph, x)
    lap = graph.laplacian.astype(float, copy=False)
    # L @ 1 = 0, so centering changes nothing mathematically but keeps
    # constant signals at exactly zero in floating point.
    vx = vx - vx.mean()
    value = float(vx @ (lap @ vx))
    return max(value, 0.0)


def cross_smoothness(graph: LanguageGraph, x: LanguageSignal, y: LanguageSignal) -> float:
    """Bilinear form x^T L y measuring co-variation of two signals across edges."""
    vx = _check_signal(graph, x)
    vy = _check_signal(graph, y)
    lap = graph.laplacian.astype(float, copy=False)
    vx = vx - vx.mean()
    vy = vy - vy.mean()
    return float(vx @ (lap @ vy))


def graph_correlation(
    graph: LanguageGraph,
    m: LanguageSignal,
    t: LanguageSignal,
    eps: float = 1e-12,
) -> float:
    """Graph-based correlation coefficient between two signals.

    Raises
    ------
    DegenerateSmoothness
        If either signal has smoothness <= eps (constant on every connected
        pair, or an edgeless graph), which leaves the ratio undefined.
    """
    sm = smoothness(graph, m)
    st = smoothness(graph, t)
    if sm <= eps:
        raise DegenerateSmoothness("first signal has zero smoothness on this graph")
    if st <= eps:
        raise DegenerateSmoothness("second signal has zero smoothness on this graph")
    return cross_smoothness(graph, m, t) / float(np.sqrt(sm * st))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Sample Pearson correlation of two equal-length vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch(f"length mismatch: {x.shape} vs {y.shape}")
    n = x.size
    if n < 2:
        raise InsufficientData(f"Pearson correlation needs at least 2 points, got {n}")
    if n == 2:
        warnings.warn("Pearson correlation over only 2 points is +/-1 by construction", stacklevel=3)
    xc = x - x.mean()
    yc = y - y.mean()
    vx = float(xc @ xc)
    vy = float(yc @ yc)
    if vx == 0.0 or vy == 0.0:
        which = "first" if vx == 0.0 else "second"
        raise DegenerateVariance(f"{which} input has zero variance")
    return float(np.corrcoef(x, y)[0, 1])


def pearson(x: LanguageSignal | Sequence[float], y: LanguageSignal | Sequence[float]) -> float:
    """Flat (graph-blind) Pearson correlation between two signals.

    When both arguments are :class:`LanguageSignal`, their language orderings
    must match exactly.
    """
    if isinstance(x, LanguageSignal) and isinstance(y, LanguageSignal):
        if x.languages != y.languages:
            raise LanguageSetMismatch("signals are over different language orderings")
        return _pearson(x.values, y.values)
    vx = x.values if isinstance(x, LanguageSignal) else np.asarray(x, dtype=float)
    vy = y.values if isinstance(y, LanguageSignal) else np.asarray(y, dtype=float)
    return _pearson(vx, vy)
