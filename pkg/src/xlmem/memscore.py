"""Per-sample and per-language memorization metrics.

A record captures one evaluated sample: the prompt/suffix token split, the
model's greedy continuation, and the log-probabilities the model assigned to
the true suffix.  Metrics:

* EM   - exact-match rate: the greedy continuation reproduces the suffix.
* RM   - relaxed match: sentence BLEU-4 or ROUGE-L between continuation and
         suffix, averaged per language and reported on a 0-100 scale.
* PM   - reconstruction likelihood: the summed reference log-probabilities.

Encoder-decoder runs use span-corruption records: a sample is exactly
memorized only if every masked span is reproduced, PM sums over all spans,
and relaxed metrics are rejected (spans are too short for n-gram overlap to
mean anything).

Comparisons operate on model-tokenizer token IDs.  A whitespace-token text
fallback exists for records that carry raw strings instead.
"""

from __future__ import annotations

import csv
import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from math import exp, fsum, log
from pathlib import Path
from typing import Hashable, Iterable, Sequence

from .errors import (
    EmptyInput,
    MissingLogprobs,
    RejectedMetric,
    SchemaError,
    WrongArchitecture,
)

__all__ = [
    "Metric",
    "SpanSegment",
    "MemorizationRecord",
    "LanguageScore",
    "em_ratio",
    "is_memorized",
    "em_rate",
    "bleu",
    "rouge_l",
    "pm_score",
    "language_scores",
    "overall_scores",
    "load_records_jsonl",
    "write_scores_csv",
    "write_scores_wide_csv",
]

Token = Hashable

# Slack allowed on "log-probabilities are <= 0" to absorb float noise.
_LOGPROB_TOL = 1e-9


class Metric(str, Enum):
    EM = "EM"
    PM = "PM"
    RM_BLEU = "RM_BLEU"
    RM_ROUGE_L = "RM_ROUGE_L"

    def __str__(self) -> str:  # so CSV cells read "EM", not "Metric.EM"
        return self.value


RELAXED_METRICS = frozenset({Metric.RM_BLEU, Metric.RM_ROUGE_L})


def _check_logprobs(logprobs: Sequence[float] | None, n_ref: int, where: str) -> tuple[float, ...] | None:
    if logprobs is None:
        return None
    vals = tuple(float(v) for v in logprobs)
    if len(vals) != n_ref:
        raise SchemaError(f"{where}: {len(vals)} logprobs for {n_ref} reference tokens")
    for v in vals:
        if not v <= _LOGPROB_TOL:
            raise SchemaError(f"{where}: log-probability {v} is positive")
    return vals


@dataclass(frozen=True)
class SpanSegment:
    """One masked span of a span-corruption record."""

    reference_tokens: tuple[Token, ...]
    predicted_tokens: tuple[Token, ...]
    reference_logprobs: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        ref = tuple(self.reference_tokens)
        if not ref:
            raise SchemaError("span has an empty reference")
        object.__setattr__(self, "reference_tokens", ref)
        object.__setattr__(self, "predicted_tokens", tuple(self.predicted_tokens))
        object.__setattr__(
            self,
            "reference_logprobs",
            _check_logprobs(self.reference_logprobs, len(ref), "span"),
        )


@dataclass(frozen=True)
class MemorizationRecord:
    """One evaluated sample from a causal or span-corruption run."""

    language: str
    sample_id: str
    architecture: str  # "causal" | "span"
    prefix_tokens: tuple[Token, ...] = ()
    reference_tokens: tuple[Token, ...] = ()
    predicted_tokens: tuple[Token, ...] = ()
    reference_logprobs: tuple[float, ...] | None = None
    spans: tuple[SpanSegment, ...] = ()

    def __post_init__(self) -> None:
        if self.architecture not in ("causal", "span"):
            raise SchemaError(
                f"record {self.sample_id!r}: unknown architecture {self.architecture!r}"
            )
        for name in ("prefix_tokens", "reference_tokens", "predicted_tokens"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "spans", tuple(self.spans))
        where = f"record {self.sample_id!r}"
        if self.architecture == "causal":
            if len(self.reference_tokens) < 1:
                raise SchemaError(f"{where}: causal record needs a non-empty reference suffix")
            if self.spans:
                raise SchemaError(f"{where}: causal record must not carry spans")
            object.__setattr__(
                self,
                "reference_logprobs",
                _check_logprobs(self.reference_logprobs, len(self.reference_tokens), where),
            )
        else:
            if not self.spans:
                raise SchemaError(f"{where}: span record needs at least one span")
            if self.reference_logprobs is not None:
                raise SchemaError(f"{where}: span record carries logprobs per span, not top-level")

    @property
    def prefix_length(self) -> int:
        return len(self.prefix_tokens)

    @property
    def suffix_length(self) -> int:
        return len(self.reference_tokens)


@dataclass(frozen=True)
class LanguageScore:
    """Aggregated value of one metric for one language."""

    language: str
    metric: Metric
    value: float
    sample_count: int

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise SchemaError("sample_count must be >= 1")
        v = self.value
        if self.metric is Metric.EM and not 0.0 <= v <= 1.0:
            raise SchemaError(f"EM rate {v} outside [0, 1]")
        if self.metric in RELAXED_METRICS and not 0.0 <= v <= 100.0:
            raise SchemaError(f"RM score {v} outside [0, 100]")
        if self.metric is Metric.PM and v > 0.0:
            raise SchemaError(f"PM {v} is positive")


def em_ratio(record: MemorizationRecord) -> float:
    """Fraction of the sequence supplied as prompt, n / (n + m)."""
    if record.architecture != "causal":
        raise WrongArchitecture("exact-memorization ratio is defined for causal records only")
    n = record.prefix_length
    m = record.suffix_length
    return n / (n + m)


def is_memorized(record: MemorizationRecord) -> bool:
    """Exact-match test: the prediction reproduces the reference token for token.

    Span records count as memorized only if every masked span matches.
    """
    if record.architecture == "causal":
        return record.predicted_tokens == record.reference_tokens
    return all(s.predicted_tokens == s.reference_tokens for s in record.spans)


def _group_by_language(
    records: Sequence[MemorizationRecord],
) -> dict[str, list[MemorizationRecord]]:
    if not records:
        raise EmptyInput("no records to score")
    architectures = {r.architecture for r in records}
    if len(architectures) > 1:
        raise WrongArchitecture("records mix causal and span architectures in one run")
    groups: dict[str, list[MemorizationRecord]] = defaultdict(list)
    for rec in records:
        groups[rec.language].append(rec)
    return groups


def em_rate(records: Sequence[MemorizationRecord]) -> dict[str, float]:
    """Per-language fraction of exactly memorized samples."""
    return {
        lang: sum(is_memorized(r) for r in group) / len(group)
        for lang, group in _group_by_language(records).items()
    }


def _ngram_counts(tokens: Sequence[Token], order: int) -> Counter:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


def bleu(candidate: Sequence[Token], reference: Sequence[Token]) -> float:
    """Sentence-level BLEU-4 with add-one smoothing on zero higher-order counts.

    Geometric mean of modified n-gram precisions for n = 1..4, times the
    brevity penalty ``exp(min(0, 1 - |ref| / |cand|))``.  A zero unigram
    overlap (or an empty candidate) scores 0.  Short suffixes routinely have
    no 4-gram overlap, so every zero count at n >= 2 is smoothed to
    ``1 / (total + 1)`` instead of zeroing the whole product.
    """
    if len(reference) == 0:
        raise EmptyInput("BLEU reference must be non-empty")
    if len(candidate) == 0:
        return 0.0
    log_precisions = []
    for order in range(1, 5):
        cand_counts = _ngram_counts(candidate, order)
        ref_counts = _ngram_counts(reference, order)
        overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        total = max(len(candidate) - order + 1, 0)
        if order == 1:
            if overlap == 0:
                return 0.0
            precision = overlap / total
        elif overlap == 0:
            precision = 1.0 / (total + 1)
        else:
            precision = overlap / total
        log_precisions.append(log(precision))
    geo_mean = exp(sum(log_precisions) / 4.0)
    brevity = exp(min(0.0, 1.0 - len(reference) / len(candidate)))
    return geo_mean * brevity


def _lcs_length(a: Sequence[Token], b: Sequence[Token]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: Sequence[Token], reference: Sequence[Token]) -> float:
    """ROUGE-L F1: longest-common-subsequence precision/recall harmonic mean."""
    if len(reference) == 0:
        raise EmptyInput("ROUGE-L reference must be non-empty")
    if len(candidate) == 0:
        return 0.0
    lcs = _lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2.0 * precision * recall / (precision + recall)


def pm_score(record: MemorizationRecord) -> float:
    """Summed reference-token log-probabilities (over all spans for span records)."""
    if record.architecture == "causal":
        if record.reference_logprobs is None:
            raise MissingLogprobs(f"record {record.sample_id!r} has no reference logprobs")
        return sum(record.reference_logprobs)
    total = 0.0
    for i, span in enumerate(record.spans):
        if span.reference_logprobs is None:
            raise MissingLogprobs(f"record {record.sample_id!r} span {i} has no logprobs")
        total += sum(span.reference_logprobs)
    return total


def language_scores(
    records: Sequence[MemorizationRecord],
    metrics: Iterable[Metric | str] = tuple(Metric),
) -> list[LanguageScore]:
    """Aggregate records into one LanguageScore per (language, metric).

    EM is the exact-match fraction; PM the mean of per-sample summed
    log-probabilities; RM metrics are per-sample BLEU/ROUGE-L means scaled
    to 0-100.  Relaxed metrics on span records raise :class:`RejectedMetric`.
    """
    wanted = [Metric(m) for m in metrics]
    if not wanted:
        raise EmptyInput("no metrics requested")
    groups = _group_by_language(records)
    architecture = records[0].architecture
    if architecture == "span" and any(m in RELAXED_METRICS for m in wanted):
        raise RejectedMetric(
            "relaxed metrics are not meaningful for span-corruption records"
        )
    out: list[LanguageScore] = []
    for lang in sorted(groups):
        group = groups[lang]
        count = len(group)
        for metric in wanted:
            # fsum makes the reductions exact, hence record-order invariant
            if metric is Metric.EM:
                value = sum(is_memorized(r) for r in group) / count
            elif metric is Metric.PM:
                value = fsum(pm_score(r) for r in group) / count
                if value > 0.0:
                    if value > 1e-6:
                        raise SchemaError(f"PM mean {value} for {lang!r} is positive")
                    value = 0.0
            elif metric is Metric.RM_BLEU:
                value = 100.0 * fsum(bleu(r.predicted_tokens, r.reference_tokens) for r in group) / count
            else:
                value = 100.0 * fsum(rouge_l(r.predicted_tokens, r.reference_tokens) for r in group) / count
            out.append(LanguageScore(language=lang, metric=metric, value=value, sample_count=count))
    return out


# --- JSON-lines record interface -------------------------------------------

def _tokens_from(obj: dict, key: str, where: str, text_fallback: bool) -> tuple:
    if key in obj and obj[key] is not None:
        return tuple(obj[key])
    text_key = key.replace("_tokens", "_text")
    if text_fallback and isinstance(obj.get(text_key), str):
        return tuple(obj[text_key].split())
    return ()


def record_from_json(obj: dict, text_fallback: bool = False) -> MemorizationRecord:
    where = f"record {obj.get('sample_id', '?')!r}"
    try:
        language = obj["language"]
        sample_id = str(obj["sample_id"])
        architecture = obj["architecture"]
    except KeyError as exc:
        raise SchemaError(f"{where}: missing field {exc}") from None
    spans = tuple(
        SpanSegment(
            reference_tokens=tuple(s.get("reference_tokens", ())),
            predicted_tokens=tuple(s.get("predicted_tokens", ())),
            reference_logprobs=None
            if s.get("reference_logprobs") is None
            else tuple(s["reference_logprobs"]),
        )
        for s in obj.get("spans", ())
    )
    logprobs = obj.get("reference_logprobs")
    return MemorizationRecord(
        language=language,
        sample_id=sample_id,
        architecture=architecture,
        prefix_tokens=_tokens_from(obj, "prefix_tokens", where, text_fallback),
        reference_tokens=_tokens_from(obj, "reference_tokens", where, text_fallback),
        predicted_tokens=_tokens_from(obj, "predicted_tokens", where, text_fallback),
        reference_logprobs=None if logprobs is None else tuple(logprobs),
        spans=spans,
    )


def record_to_json(record: MemorizationRecord) -> dict:
    out: dict = {
        "language": record.language,
        "sample_id": record.sample_id,
        "architecture": record.architecture,
        "prefix_tokens": list(record.prefix_tokens),
    }
    if record.architecture == "causal":
        out["reference_tokens"] = list(record.reference_tokens)
        out["predicted_tokens"] = list(record.predicted_tokens)
        if record.reference_logprobs is not None:
            out["reference_logprobs"] = list(record.reference_logprobs)
    else:
        out["spans"] = [
            {
                "reference_tokens": list(s.reference_tokens),
                "predicted_tokens": list(s.predicted_tokens),
                **(
                    {"reference_logprobs": list(s.reference_logprobs)}
                    if s.reference_logprobs is not None
                    else {}
                ),
            }
            for s in record.spans
        ]
    return out


def load_records_jsonl(path: str | Path, text_fallback: bool = False) -> list[MemorizationRecord]:
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            try:
                records.append(record_from_json(obj, text_fallback=text_fallback))
            except SchemaError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    if not records:
        raise EmptyInput(f"{path}: no records found")
    return records


# --- score table emission ---------------------------------------------------

_WIDE_COLUMNS = ("EM (%)", "PM", "RM (B)", "RM (R)")
_WIDE_BY_METRIC = {
    Metric.EM: "EM (%)",
    Metric.PM: "PM",
    Metric.RM_BLEU: "RM (B)",
    Metric.RM_ROUGE_L: "RM (R)",
}


def write_scores_csv(path: str | Path, scores: Sequence[LanguageScore]) -> None:
    """Long format: one `language,metric,value,sample_count` row per score."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["language", "metric", "value", "sample_count"])
        for score in scores:
            writer.writerow(
                [score.language, score.metric.value, format(score.value, ".10g"), score.sample_count]
            )


def overall_scores(scores: Sequence[LanguageScore]) -> dict[Metric, tuple[float, int]]:
    """Collapse per-language scores into one (value, sample_count) per metric.

    Values are sample-count-weighted means over languages, i.e. equivalent to
    aggregating the underlying records in one pool.
    """
    if not scores:
        raise EmptyInput("no scores to summarize")
    out: dict[Metric, tuple[float, int]] = {}
    for metric in Metric:
        rows = [s for s in scores if s.metric is metric]
        if not rows:
            continue
        total = sum(s.sample_count for s in rows)
        weighted = fsum(s.value * s.sample_count for s in rows) / total
        out[metric] = (weighted, total)
    return out


def load_scores_csv(path: str | Path) -> list[LanguageScore]:
    """Read back a long-format scores CSV."""
    out: list[LanguageScore] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["language", "metric", "value", "sample_count"]:
            raise SchemaError(f"{path}: expected header 'language,metric,value,sample_count'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(
                    LanguageScore(
                        language=row[0],
                        metric=Metric(row[1]),
                        value=float(row[2]),
                        sample_count=int(row[3]),
                    )
                )
            except (IndexError, ValueError) as exc:
                raise SchemaError(f"{path}:{lineno}: bad score row ({exc})") from None
    if not out:
        raise EmptyInput(f"{path}: no score rows")
    return out


def write_scores_wide_csv(path: str | Path, scores: Sequence[LanguageScore]) -> None:
    """Wide format: one row per language with EM (%) / PM / RM (B) / RM (R) columns.

    EM is rescaled to percent here; metrics absent from the run are rendered
    as ``--``.
    """
    table: dict[str, dict[str, str]] = defaultdict(dict)
    for score in scores:
        value = score.value * 100.0 if score.metric is Metric.EM else score.value
        table[score.language][_WIDE_BY_METRIC[score.metric]] = format(value, ".10g")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["language", *_WIDE_COLUMNS])
        for lang in sorted(table):
            writer.writerow([lang] + [table[lang].get(col, "--") for col in _WIDE_COLUMNS])
