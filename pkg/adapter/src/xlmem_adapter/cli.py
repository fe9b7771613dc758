"""Command-line entry points: generate-records and extract-embeddings."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import torch

from . import __version__
from .causal import generate_causal_records
from .embeddings import extract_embeddings
from .jobs import GenerationJob, SpanCorruptionSpec
from .span import generate_span_records
from .tinymodel import load_model, model_fingerprint


def _read_jsonl(path: Path) -> list[dict]:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                sys.exit(f"{path}:{lineno}: invalid JSON ({exc})")
    return rows


def _write_jsonl(path: Path, rows) -> int:
    count = 0
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def _write_manifest(out_dir: Path, payload: dict) -> None:
    outputs = payload.pop("output_files")
    payload["outputs"] = {
        name: hashlib.sha256(Path(path).read_bytes()).hexdigest() for name, path in outputs.items()
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _tokenizer_fingerprint(tokenizer) -> str:
    if hasattr(tokenizer, "fingerprint"):
        return tokenizer.fingerprint()
    return f"hf/{getattr(tokenizer, 'name_or_path', 'unknown')}"


def _cmd_generate_records(args: argparse.Namespace) -> int:
    job = GenerationJob(
        model=args.model,
        architecture=args.architecture,
        prefix_length=args.prefix_length,
        suffix_length=args.suffix_length,
        batch_size=args.batch_size,
        device=args.device,
        seed=args.seed,
        span=SpanCorruptionSpec(
            corruption_rate=args.corruption_rate,
            mean_span_length=args.mean_span_length,
            seed=args.seed,
        ),
    )
    model, tokenizer = load_model(args.model, args.architecture, seed=args.seed)
    passages = _read_jsonl(Path(args.passages))
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / "records.jsonl"
    if args.architecture == "causal":
        records = generate_causal_records(job, passages, model, tokenizer)
    else:
        records = generate_span_records(job, passages, model, tokenizer)
    count = _write_jsonl(records_path, records)
    _write_manifest(
        out_dir,
        {
            "command": "generate-records",
            "version": __version__,
            "model": model_fingerprint(args.model, model),
            "tokenizer": _tokenizer_fingerprint(tokenizer),
            "seed": args.seed,
            "config": {
                "architecture": args.architecture,
                "prefix_length": args.prefix_length,
                "suffix_length": args.suffix_length,
                "corruption_rate": args.corruption_rate,
                "mean_span_length": args.mean_span_length,
                "passages": str(args.passages),
            },
            "output_files": {"records": records_path},
        },
    )
    print(f"wrote {count} records -> {records_path}")
    return 0


def _cmd_extract_embeddings(args: argparse.Namespace) -> int:
    model, tokenizer = load_model(args.model, args.architecture, seed=args.seed)
    sentences = _read_jsonl(Path(args.corpus))
    layers = [int(tok) for tok in args.layers.split(",") if tok.strip()]
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    emb_path = out_dir / "embeddings.jsonl"
    records = extract_embeddings(
        model, tokenizer, sentences, layers=layers, pooling=args.pooling, device=args.device
    )
    count = _write_jsonl(emb_path, records)
    _write_manifest(
        out_dir,
        {
            "command": "extract-embeddings",
            "version": __version__,
            "model": model_fingerprint(args.model, model),
            "tokenizer": _tokenizer_fingerprint(tokenizer),
            "seed": args.seed,
            "config": {
                "corpus": str(args.corpus),
                "layers": layers,
                "pooling": args.pooling,
            },
            "output_files": {"embeddings": emb_path},
        },
    )
    print(f"wrote {count} (language, layer) embeddings -> {emb_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xlmem-adapter", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("generate-records", help="greedy-decode memorization records")
    p.add_argument("--model", required=True,
                   help="'tiny-causal', 'tiny-span', or a transformers path/identifier")
    p.add_argument("--architecture", choices=("causal", "span"), required=True)
    p.add_argument("--passages", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--prefix-length", type=int, default=50)
    p.add_argument("--suffix-length", type=int, default=15)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--corruption-rate", type=float, default=0.15)
    p.add_argument("--mean-span-length", type=float, default=3.0)
    p.add_argument("--device", default="cpu")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_generate_records)

    p = sub.add_parser("extract-embeddings", help="per-layer mean sentence embeddings")
    p.add_argument("--model", required=True)
    p.add_argument("--architecture", choices=("causal", "span"), default="causal")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--layers", default="0,1,2")
    p.add_argument("--pooling", choices=("mean", "final"), default="mean")
    p.add_argument("--device", default="cpu")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_extract_embeddings)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    # single-threaded kernels keep greedy decoding bit-reproducible
    torch.set_num_threads(args.threads)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
