"""Span-corruption record generation for encoder-decoder models."""

from __future__ import annotations

import logging
from typing import Iterable, Iterator

import numpy as np
import torch

from .causal import encode_text
from .jobs import GenerationJob
from .tokenizer import EOS_ID, ByteTokenizer

logger = logging.getLogger(__name__)


def random_spans_noise_mask(
    length: int, corruption_rate: float, mean_span_length: float, rng: np.random.Generator
) -> np.ndarray:
    """Boolean mask of non-contiguous noise spans over a token sequence.

    Follows the usual span-corruption construction: the number of noise
    tokens is `round(length * rate)`, grouped into spans of
    `mean_span_length` tokens on average, interleaved with non-noise
    segments of at least one token so spans never touch.
    """
    if length < 2:
        raise ValueError("need at least 2 tokens to corrupt")
    num_noise = int(round(length * corruption_rate))
    num_noise = max(1, min(length - 1, num_noise))
    num_spans = int(round(num_noise / mean_span_length))
    num_spans = max(1, min(num_spans, num_noise, length - num_noise))

    def segment(total: int, parts: int) -> np.ndarray:
        if parts == 1:
            return np.array([total])
        cuts = np.sort(rng.choice(total - 1, size=parts - 1, replace=False) + 1)
        return np.diff(np.concatenate([[0], cuts, [total]]))

    noise_lengths = segment(num_noise, num_spans)
    plain_lengths = segment(length - num_noise, num_spans)
    mask = np.zeros(length, dtype=bool)
    position = 0
    for plain, noise in zip(plain_lengths, noise_lengths):
        position += plain
        mask[position : position + noise] = True
        position += noise
    return mask


def corrupt(tokens: list[int], mask: np.ndarray, tokenizer: ByteTokenizer):
    """Split tokens into (encoder input with sentinels, target, span references)."""
    encoder: list[int] = []
    target: list[int] = []
    spans: list[list[int]] = []
    sentinel = 0
    i = 0
    while i < len(tokens):
        if not mask[i]:
            encoder.append(tokens[i])
            i += 1
            continue
        start = i
        while i < len(tokens) and mask[i]:
            i += 1
        encoder.append(tokenizer.sentinel(sentinel))
        target.append(tokenizer.sentinel(sentinel))
        target.extend(tokens[start:i])
        spans.append(list(tokens[start:i]))
        sentinel += 1
    target.append(EOS_ID)
    return encoder, target, spans


def split_predicted_spans(decoded: list[int], n_spans: int, tokenizer: ByteTokenizer) -> list[list[int]]:
    """Recover per-sentinel predictions from a greedy decoder output."""
    spans: list[list[int]] = [[] for _ in range(n_spans)]
    current = None
    for token in decoded:
        if tokenizer.is_sentinel(token):
            index = token - tokenizer.sentinel(0)
            current = index if 0 <= index < n_spans else None
            continue
        if token == EOS_ID:
            break
        if current is not None:
            spans[current].append(int(token))
    return spans


@torch.no_grad()
def generate_span_records(
    job: GenerationJob, passages: Iterable[dict], model, tokenizer: ByteTokenizer
) -> Iterator[dict]:
    """Yield one span-corruption record per sufficiently long passage.

    The first `prefix_length + suffix_length` tokens form the sequence;
    masked spans follow `job.span`; predictions come from greedy decoding
    and logprobs from teacher forcing on the true target.
    """
    seq_len = job.prefix_length + job.suffix_length
    device = torch.device(job.device)
    model.to(device)
    for index, passage in enumerate(passages):
        tokens = encode_text(tokenizer, passage["text"])
        if len(tokens) < seq_len:
            logger.warning(
                "skipping %s: %d tokens < sequence length %d",
                passage.get("source_id", "?"), len(tokens), seq_len,
            )
            continue
        tokens = tokens[:seq_len]
        rng = np.random.default_rng((job.span.seed, index))
        mask = random_spans_noise_mask(
            seq_len, job.span.corruption_rate, job.span.mean_span_length, rng
        )
        encoder, target, references = corrupt(tokens, mask, tokenizer)

        enc = torch.tensor([encoder], dtype=torch.long, device=device)
        generated = model.generate(
            enc, max_new_tokens=len(target) + 4, do_sample=False, num_beams=1
        )[0].tolist()[1:]  # drop the decoder start token
        predicted = split_predicted_spans(generated, len(references), tokenizer)

        tgt = torch.tensor([target], dtype=torch.long, device=device)
        logits = model(input_ids=enc, labels=tgt).logits
        logprobs = torch.log_softmax(logits, dim=-1)[0]
        token_logprob = logprobs.gather(1, tgt[0].unsqueeze(-1)).squeeze(-1)
        token_logprob = torch.clamp(token_logprob, max=0.0)

        spans_payload = []
        position = 0
        for reference, prediction in zip(references, predicted):
            position += 1  # the sentinel token preceding the span content
            lps = [float(v) for v in token_logprob[position : position + len(reference)]]
            position += len(reference)
            spans_payload.append(
                {
                    "reference_tokens": reference,
                    "predicted_tokens": prediction,
                    "reference_logprobs": lps,
                }
            )
        yield {
            "language": passage["language"],
            "sample_id": str(passage.get("source_id", f"row{index}")),
            "architecture": "span",
            "prefix_tokens": encoder,
            "spans": spans_payload,
        }
