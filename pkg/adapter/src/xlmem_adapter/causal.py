"""Causal prompt/suffix record generation with teacher-forced logprobs."""

from __future__ import annotations

import logging
from typing import Iterable, Iterator

import torch

from .jobs import GenerationJob

logger = logging.getLogger(__name__)


def encode_text(tokenizer, text: str) -> list[int]:
    try:
        return list(tokenizer.encode(text, add_special_tokens=False))
    except TypeError:  # the byte tokenizer takes no keyword arguments
        return list(tokenizer.encode(text))


def _batches(items: list, size: int) -> Iterator[list]:
    for start in range(0, len(items), size):
        yield items[start : start + size]


@torch.no_grad()
def _greedy_continuation(model, prefix: torch.Tensor, steps: int) -> torch.Tensor:
    ids = prefix
    for _ in range(steps):
        logits = model(input_ids=ids).logits[:, -1, :]
        ids = torch.cat([ids, logits.argmax(dim=-1, keepdim=True)], dim=1)
    return ids[:, prefix.shape[1] :]


@torch.no_grad()
def _reference_logprobs(model, prefix: torch.Tensor, reference: torch.Tensor) -> torch.Tensor:
    """Log-probability of each reference token given the prefix and the true preceding suffix."""
    n = prefix.shape[1]
    m = reference.shape[1]
    full = torch.cat([prefix, reference], dim=1)
    logits = model(input_ids=full).logits
    logprobs = torch.log_softmax(logits[:, n - 1 : n + m - 1, :], dim=-1)
    return logprobs.gather(2, reference.unsqueeze(-1)).squeeze(-1)


def generate_causal_records(
    job: GenerationJob, passages: Iterable[dict], model, tokenizer
) -> Iterator[dict]:
    """Yield one memorization record per sufficiently long passage.

    The prefix is the first `prefix_length` tokens, the reference the next
    `suffix_length`; the prediction is the greedy continuation of the
    prefix, and the logprobs are teacher-forced on the true reference.
    Shorter passages are skipped with a logged reason.
    """
    n, m = job.prefix_length, job.suffix_length
    device = torch.device(job.device)
    model.to(device)

    eligible = []
    for passage in passages:
        ids = encode_text(tokenizer, passage["text"])
        if len(ids) < n + m:
            logger.warning(
                "skipping %s: %d tokens < prefix %d + suffix %d",
                passage.get("source_id", "?"), len(ids), n, m,
            )
            continue
        eligible.append((passage, ids[: n + m]))

    for batch in _batches(eligible, job.batch_size):
        ids = torch.tensor([tokens for _, tokens in batch], dtype=torch.long, device=device)
        prefix, reference = ids[:, :n], ids[:, n:]
        predicted = _greedy_continuation(model, prefix, m)
        logprobs = _reference_logprobs(model, prefix, reference)
        # log-softmax can round to a hair above 0 for near-certain tokens
        logprobs = torch.clamp(logprobs, max=0.0)
        for row, (passage, _) in enumerate(batch):
            yield {
                "language": passage["language"],
                "sample_id": str(passage.get("source_id", f"row{row}")),
                "architecture": "causal",
                "prefix_tokens": prefix[row].tolist(),
                "reference_tokens": reference[row].tolist(),
                "predicted_tokens": predicted[row].tolist(),
                "reference_logprobs": [float(v) for v in logprobs[row]],
            }
