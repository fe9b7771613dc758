"""Command-line interface tying the pipeline together.

Subcommands: filter-corpus, score, subspace, graph, correlate, sweep,
consistency, report.  Every run writes its tables plus a `manifest.json`
into the output directory (``--output-dir``, or ``$XLMEM_OUTPUT_DIR``, or
the working directory).

Exit codes: 0 on success, 1 on configuration/validation errors, 2 on data
errors raised while processing inputs.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from collections import Counter
from pathlib import Path

from .corpus import (
    FilterConfig,
    FilterReason,
    filter_passage,
    iter_passages_jsonl,
    sample_corpus,
    write_passages_jsonl,
    write_shortfall_csv,
)
from .correlation import LanguageSignal, graph_correlation, pearson
from .errors import (
    DegenerateSmoothness,
    DegenerateVariance,
    InsufficientData,
    XlmemError,
)
from .graph import build_graph, components, write_graph_json
from .memscore import language_scores, load_records_jsonl, load_scores_csv
from .memscore import write_scores_csv, write_scores_wide_csv
from .report import (
    ReportBundle,
    write_correlate_csv,
    write_manifest,
    write_run_report_csv,
    write_sweep_long_csv,
    write_sweep_wide_csv,
)
from .subspace import SimilarityMatrix, identify_subspace, load_embeddings_jsonl, similarity_matrix
from .topology import signal_consistency, threshold_sweep

DEFAULT_SWEEP_THETAS = (0.31, 0.33, 0.35, 0.37, 0.39, 0.41, 0.43, 0.45)
OUTPUT_DIR_ENV = "XLMEM_OUTPUT_DIR"


class ValidationError(Exception):
    """Bad configuration or arguments (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"input file does not exist: {path}")
    return p


def _theta_in_range(theta: float) -> float:
    if not -1.0 <= theta <= 1.0:
        raise ValidationError(f"theta must be in [-1, 1], got {theta}")
    return theta


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _named_paths(pairs: list[str], flag: str) -> list[tuple[str, Path]]:
    out: list[tuple[str, Path]] = []
    seen: set[str] = set()
    for pair in pairs:
        name, sep, path = pair.partition("=")
        if not sep or not name or not path:
            raise ValidationError(f"{flag} expects NAME=PATH, got {pair!r}")
        if name in seen:
            raise ValidationError(f"duplicate {flag} name {name!r}")
        seen.add(name)
        out.append((name, _existing(path)))
    return out


def _output_dir(args: argparse.Namespace) -> Path:
    root = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _safe_filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name)


def _load_signal(path: Path, languages: tuple[str, ...]) -> LanguageSignal:
    return LanguageSignal.from_csv(path).align_to(languages)


# --- subcommand handlers -----------------------------------------------------

def _cmd_filter_corpus(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    config = FilterConfig(
        min_chars=args.min_chars,
        digit_run_length=args.digit_run,
        repeat_unit_length=args.repeat_unit,
        repeat_min_count=args.repeat_count,
        garbled_max_fraction=args.garbled_fraction,
        min_lid_confidence=args.lid_confidence,
        min_lid_proportion=args.lid_proportion,
    )
    reasons: Counter = Counter()

    def accepted_stream():
        for passage in iter_passages_jsonl(args.input):
            verdict = filter_passage(passage, config)
            reasons[verdict.reason] += 1
            if verdict.accepted:
                yield passage

    result = sample_corpus(
        accepted_stream(),
        quota_per_language=args.quota,
        buffer_capacity=args.buffer_capacity,
        seed=args.seed,
    )
    bundle = ReportBundle(output_dir=out)
    lang_dir = out / "by_language"
    lang_dir.mkdir(exist_ok=True)
    for lang in sorted(result.per_language):
        path = lang_dir / f"{_safe_filename(lang)}.jsonl"
        write_passages_jsonl(path, result.per_language[lang])
        bundle.add_table(f"passages/{lang}", path)
    shortfall_path = out / "shortfall.csv"
    write_shortfall_csv(shortfall_path, result)
    bundle.add_table("shortfall", shortfall_path)
    rejections_path = out / "rejections.csv"
    with open(rejections_path, "w", newline="") as fh:
        fh.write("reason,count\n")
        for reason in FilterReason:
            fh.write(f"{reason.value},{reasons.get(reason, 0)}\n")
    bundle.add_table("rejections", rejections_path)
    write_manifest(
        bundle,
        "filter-corpus",
        config={
            "input": str(args.input),
            "quota": args.quota,
            "buffer_capacity": args.buffer_capacity,
            "min_chars": config.min_chars,
            "digit_run_length": config.digit_run_length,
            "repeat_unit_length": config.repeat_unit_length,
            "repeat_min_count": config.repeat_min_count,
            "garbled_max_fraction": config.garbled_max_fraction,
            "min_lid_confidence": config.min_lid_confidence,
            "min_lid_proportion": config.min_lid_proportion,
        },
        inputs=[args.input],
        seed=args.seed,
    )
    kept = sum(len(v) for v in result.per_language.values())
    print(f"kept {kept} passages across {len(result.per_language)} languages "
          f"({len(result.shortfall)} under quota) -> {out}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    if args.suffix_length < 1:
        raise ValidationError(f"suffix length must be >= 1, got {args.suffix_length}")
    out = _output_dir(args)
    records = load_records_jsonl(args.records, text_fallback=args.text_mode)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    scores = language_scores(records, metrics)
    bundle = ReportBundle(output_dir=out)
    long_path = out / "scores.csv"
    write_scores_csv(long_path, scores)
    bundle.add_table("scores", long_path)
    wide_path = out / "scores_wide.csv"
    write_scores_wide_csv(wide_path, scores)
    bundle.add_table("scores_wide", wide_path)
    write_manifest(
        bundle,
        "score",
        config={
            "records": str(args.records),
            "metrics": metrics,
            "text_mode": args.text_mode,
            "prompt_lengths": _float_list(args.prompt_lengths),
            "suffix_length": args.suffix_length,
        },
        inputs=[args.records],
        seed=None,
    )
    print(f"scored {len(records)} records, {len(scores)} language/metric rows -> {out}")
    return 0


def _cmd_subspace(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    embeddings = load_embeddings_jsonl(args.embeddings, layer=args.layer)
    model = identify_subspace(embeddings, rank=args.rank)
    sim = similarity_matrix(model, embeddings)
    bundle = ReportBundle(output_dir=out)
    sim_path = out / "similarity.csv"
    sim.to_csv(sim_path)
    bundle.add_table("similarity", sim_path)
    write_manifest(
        bundle,
        "subspace",
        config={
            "embeddings": str(args.embeddings),
            "layer": embeddings.layer,
            "rank": args.rank,
            "dim": embeddings.dim,
            "languages": list(embeddings.languages),
        },
        inputs=[args.embeddings],
        seed=None,
    )
    print(f"similarity over {sim.n_languages} languages (layer {embeddings.layer}, "
          f"rank {args.rank}) -> {sim_path}")
    return 0


def _cmd_graph(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    sim = SimilarityMatrix.from_csv(args.similarity)
    graph = build_graph(sim, theta=args.theta, weighted=args.weighted)
    partition = components(graph)
    bundle = ReportBundle(output_dir=out)
    graph_path = out / "graph.json"
    write_graph_json(graph_path, graph)
    bundle.add_table("graph", graph_path)
    write_manifest(
        bundle,
        "graph",
        config={"similarity": str(args.similarity), "theta": args.theta, "weighted": args.weighted},
        inputs=[args.similarity],
        seed=None,
    )
    print(f"theta={args.theta:g}: {graph.n_edges} edges, "
          f"{partition.n_subgraphs} subgraphs, {partition.n_singletons} singletons -> {graph_path}")
    return 0


def _prepare_signals(
    args: argparse.Namespace,
) -> tuple[SimilarityMatrix, list[tuple[str, Path]], dict[str, LanguageSignal], LanguageSignal]:
    sim = SimilarityMatrix.from_csv(args.similarity)
    named = _named_paths(args.signal, "--signal")
    signals = {name: _load_signal(path, sim.languages) for name, path in named}
    tokens = _load_signal(Path(args.tokens), sim.languages)
    if args.log_tokens:
        tokens = tokens.log_scaled()
    return sim, named, signals, tokens


def _cmd_correlate(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    sim, named, signals, tokens = _prepare_signals(args)
    graph = build_graph(sim, theta=args.theta)
    flat: dict[str, float | None] = {}
    rho: dict[str, float | None] = {}
    for name, signal in signals.items():
        try:
            flat[name] = pearson(signal, tokens)
        except (DegenerateVariance, InsufficientData):
            flat[name] = None
        try:
            rho[name] = graph_correlation(graph, signal, tokens)
        except DegenerateSmoothness:
            rho[name] = None
    bundle = ReportBundle(output_dir=out)
    table_path = out / "correlate.csv"
    write_correlate_csv(table_path, list(signals), flat, rho)
    bundle.add_table("correlate", table_path)
    write_manifest(
        bundle,
        "correlate",
        config={
            "similarity": str(args.similarity),
            "signals": {name: str(path) for name, path in named},
            "tokens": str(args.tokens),
            "theta": args.theta,
            "token_scale": "log" if args.log_tokens else "raw",
        },
        inputs=[args.similarity, args.tokens] + [p for _, p in named],
        seed=None,
    )
    print(f"correlations at theta={args.theta:g} -> {table_path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    thetas = args.thetas if isinstance(args.thetas, list) else _float_list(args.thetas)
    for theta in thetas:
        _theta_in_range(theta)
    if not thetas:
        raise ValidationError("sweep needs at least one theta")
    sim, named, signals, tokens = _prepare_signals(args)
    rows = threshold_sweep(
        sim, signals, tokens, thetas, include_singletons=args.include_singletons
    )
    bundle = ReportBundle(output_dir=out)
    wide_path = out / "sweep_wide.csv"
    write_sweep_wide_csv(wide_path, rows, list(signals))
    bundle.add_table("sweep_wide", wide_path)
    long_path = out / "sweep_long.csv"
    write_sweep_long_csv(long_path, rows, list(signals))
    bundle.add_table("sweep_long", long_path)
    write_manifest(
        bundle,
        "sweep",
        config={
            "similarity": str(args.similarity),
            "signals": {name: str(path) for name, path in named},
            "tokens": str(args.tokens),
            "thetas": thetas,
            "token_scale": "log" if args.log_tokens else "raw",
            "include_singletons": args.include_singletons,
        },
        inputs=[args.similarity, args.tokens] + [p for _, p in named],
        seed=None,
    )
    print(f"swept {len(thetas)} thresholds -> {wide_path}")
    return 0


def _cmd_consistency(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    a = LanguageSignal.from_csv(args.signal_a)
    b = LanguageSignal.from_csv(args.signal_b)
    value = signal_consistency(a, b)
    bundle = ReportBundle(output_dir=out)
    path = out / "consistency.csv"
    with open(path, "w", newline="") as fh:
        fh.write("signal_a,signal_b,pearson,n_languages\n")
        fh.write(f"{Path(args.signal_a).name},{Path(args.signal_b).name},"
                 f"{format(value, '.10g')},{len(a)}\n")
    bundle.add_table("consistency", path)
    write_manifest(
        bundle,
        "consistency",
        config={"signal_a": str(args.signal_a), "signal_b": str(args.signal_b)},
        inputs=[args.signal_a, args.signal_b],
        seed=None,
    )
    print(f"consistency r={value:.4f} over {len(a)} languages -> {path}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    named = _named_paths(args.scores, "--scores")
    runs = [(label, load_scores_csv(path)) for label, path in named]
    bundle = ReportBundle(output_dir=out)
    path = out / "report.csv"
    write_run_report_csv(path, runs)
    bundle.add_table("report", path)
    write_manifest(
        bundle,
        "report",
        config={"scores": {label: str(p) for label, p in named}},
        inputs=[p for _, p in named],
        seed=None,
    )
    print(f"summarized {len(runs)} runs -> {path}")
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xlmem", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--output-dir", default=None, help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")

    p = sub.add_parser("filter-corpus", help="filter raw passages and sample per-language quotas")
    common(p)
    p.add_argument("--input", required=True, type=_existing)
    p.add_argument("--quota", type=int, default=50_000)
    p.add_argument("--buffer-capacity", type=int, default=5_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-chars", type=int, default=601)
    p.add_argument("--digit-run", type=int, default=20)
    p.add_argument("--repeat-unit", type=int, default=20)
    p.add_argument("--repeat-count", type=int, default=3)
    p.add_argument("--garbled-fraction", type=float, default=0.01)
    p.add_argument("--lid-confidence", type=float, default=0.90)
    p.add_argument("--lid-proportion", type=float, default=0.90)
    p.set_defaults(func=_cmd_filter_corpus)

    p = sub.add_parser("score", help="per-language memorization scores from a records file")
    common(p)
    p.add_argument("--records", required=True, type=_existing)
    p.add_argument("--metrics", default="EM,PM,RM_BLEU,RM_ROUGE_L")
    p.add_argument("--text-mode", action="store_true",
                   help="fall back to whitespace tokens for records carrying *_text fields")
    p.add_argument("--prompt-lengths", default="50,100,150")
    p.add_argument("--suffix-length", type=int, default=15)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("subspace", help="similarity matrix from per-layer mean embeddings")
    common(p)
    p.add_argument("--embeddings", required=True, type=_existing)
    p.add_argument("--layer", type=int, default=None, help="hidden layer (default: final)")
    p.add_argument("--rank", type=int, default=1)
    p.set_defaults(func=_cmd_subspace)

    p = sub.add_parser("graph", help="threshold a similarity matrix into a language graph")
    common(p)
    p.add_argument("--similarity", required=True, type=_existing)
    p.add_argument("--theta", required=True, type=float)
    p.add_argument("--weighted", action="store_true",
                   help="keep similarity values as edge weights instead of 0/1")
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("correlate", help="flat and graph-based correlation of signals vs tokens")
    common(p)
    p.add_argument("--similarity", required=True, type=_existing)
    p.add_argument("--signal", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--tokens", required=True, type=_existing)
    p.add_argument("--theta", required=True, type=float)
    p.add_argument("--log-tokens", action="store_true")
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("sweep", help="correlations and component counts across thresholds")
    common(p)
    p.add_argument("--similarity", required=True, type=_existing)
    p.add_argument("--signal", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--tokens", required=True, type=_existing)
    p.add_argument("--thetas", default=",".join(str(t) for t in DEFAULT_SWEEP_THETAS))
    p.add_argument("--log-tokens", action="store_true")
    p.add_argument("--include-singletons", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("consistency", help="Pearson correlation between two runs' signals")
    common(p)
    p.add_argument("--signal-a", required=True, type=_existing)
    p.add_argument("--signal-b", required=True, type=_existing)
    p.set_defaults(func=_cmd_consistency)

    p = sub.add_parser("report", help="cross-run summary table from score CSVs")
    common(p)
    p.add_argument("--scores", action="append", required=True, metavar="LABEL=PATH")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if hasattr(args, "theta"):
            _theta_in_range(args.theta)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except XlmemError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
