"""Table emission and run manifests.

This layer only formats values produced by the analysis modules; nothing is
computed here.  Undefined cells (degenerate correlations) are rendered as
the literal string ``undefined``, never blank or NaN.  Manifests record the
configuration, software versions, seeds, and input digests that produced a
bundle, so identical inputs reproduce byte-identical outputs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy

from . import __version__
from .memscore import LanguageScore, Metric, overall_scores
from .topology import SweepRow

__all__ = [
    "ReportBundle",
    "write_correlate_csv",
    "write_sweep_wide_csv",
    "write_sweep_long_csv",
    "write_run_report_csv",
    "write_manifest",
    "sha256_file",
]

UNDEFINED = "undefined"

# Row labels used in the emitted tables, per metric key.
LONG_LABELS = {"EM": "EM", "PM": "PM", "RM_BLEU": "RM (BLEU)", "RM_ROUGE_L": "RM (Rouge-L)"}
SHORT_LABELS = {"EM": "EM", "PM": "PM", "RM_BLEU": "RM (B)", "RM_ROUGE_L": "RM (R)"}


def _cell(value: float | None) -> str:
    return UNDEFINED if value is None else format(float(value), ".10g")


def _label(name: str, table: Mapping[str, str]) -> str:
    return table.get(name, name)


def write_correlate_csv(
    path: str | Path,
    metric_names: Sequence[str],
    flat: Mapping[str, float | None],
    graph_corr: Mapping[str, float | None],
) -> None:
    """Per-metric correlation table: one row per metric, columns r and rho_G."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "r", "rho_G"])
        for name in metric_names:
            writer.writerow([_label(name, LONG_LABELS), _cell(flat[name]), _cell(graph_corr[name])])


def write_sweep_wide_csv(
    path: str | Path, rows: Sequence[SweepRow], metric_names: Sequence[str]
) -> None:
    """Threshold-sweep table: one column per theta, metric/scope rows.

    Rows: subgraph count, singleton count, then per metric an Intra row
    (graph correlation) and a Cross row (group-level Pearson).
    """
    thetas = [format(row.theta, "g") for row in rows]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", *thetas])
        writer.writerow(["# Subgraph", *[str(r.subgraph_count) for r in rows]])
        writer.writerow(["# Single Point", *[str(r.singleton_count) for r in rows]])
        for name in metric_names:
            label = _label(name, SHORT_LABELS)
            writer.writerow([f"{label} Intra", *[_cell(r.intra.get(name)) for r in rows]])
            writer.writerow([f"{label} Cross", *[_cell(r.cross.get(name)) for r in rows]])


def write_sweep_long_csv(
    path: str | Path, rows: Sequence[SweepRow], metric_names: Sequence[str]
) -> None:
    """Plot-friendly long format: `theta,metric,scope,value` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "metric", "scope", "value"])
        for row in rows:
            theta = format(row.theta, "g")
            writer.writerow([theta, "subgraphs", "count", str(row.subgraph_count)])
            writer.writerow([theta, "singletons", "count", str(row.singleton_count)])
            for name in metric_names:
                writer.writerow([theta, name, "intra", _cell(row.intra.get(name))])
                writer.writerow([theta, name, "cross", _cell(row.cross.get(name))])


def write_run_report_csv(
    path: str | Path, runs: Sequence[tuple[str, Sequence[LanguageScore]]]
) -> None:
    """Cross-run summary: one row per labelled run, Table-style metric columns.

    Values come from :func:`xlmem.memscore.overall_scores`; EM is shown in
    percent; metrics absent from a run are rendered as ``--``.
    """
    columns = [Metric.EM, Metric.PM, Metric.RM_BLEU, Metric.RM_ROUGE_L]
    headers = ["EM (%)", "PM", "RM (B)", "RM (R)"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", *headers])
        for label, scores in runs:
            summary = overall_scores(scores)
            cells = []
            for metric in columns:
                if metric not in summary:
                    cells.append("--")
                    continue
                value, _ = summary[metric]
                if metric is Metric.EM:
                    value *= 100.0
                cells.append(format(value, ".10g"))
            writer.writerow([label, *cells])


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class ReportBundle:
    """A run's output directory: named tables plus the manifest describing them."""

    output_dir: Path
    tables: dict[str, Path] = field(default_factory=dict)
    manifest_path: Path | None = None

    def add_table(self, name: str, path: Path) -> None:
        self.tables[name] = path


def write_manifest(
    bundle: ReportBundle,
    subcommand: str,
    config: Mapping[str, object],
    inputs: Sequence[str | Path],
    seed: int | None = None,
) -> Path:
    """Write `manifest.json` recording config, versions, seed, and digests.

    Every emitted table is listed with its SHA-256, and every input file is
    digested, so a manifest fully determines (and verifies) a bundle.
    """
    manifest = {
        "subcommand": subcommand,
        "config": dict(config),
        "seed": seed,
        "versions": {
            "xlmem": __version__,
            "python": ".".join(map(str, sys.version_info[:3])),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "tables": {
            name: {"path": path.name, "sha256": sha256_file(path)}
            for name, path in sorted(bundle.tables.items())
        },
    }
    path = bundle.output_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    bundle.manifest_path = path
    return path
