"""Per-layer mean sentence embeddings from a parallel corpus."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np
import torch

from .causal import encode_text


@torch.no_grad()
def sentence_states(model, token_ids: list[int], device: str = "cpu") -> tuple[torch.Tensor, ...]:
    """Hidden states of one sentence, one tensor (seq_len, dim) per layer."""
    ids = torch.tensor([token_ids], dtype=torch.long, device=torch.device(device))
    encoder = model.get_encoder() if hasattr(model, "get_encoder") else model
    out = encoder(input_ids=ids, output_hidden_states=True)
    return tuple(h[0] for h in out.hidden_states)


def extract_embeddings(
    model,
    tokenizer,
    sentences: Iterable[dict],
    layers: Sequence[int],
    pooling: str = "mean",
    device: str = "cpu",
) -> list[dict]:
    """Mean sentence embedding per (language, layer), in the embeddings JSONL schema.

    Every sentence record needs `language`, `sentence_id`, and `text`; each
    sentence is pooled over its token states (`mean` or `final`) and the
    pooled vectors are averaged per language.
    """
    if pooling not in ("mean", "final"):
        raise ValueError(f"unknown pooling {pooling!r}")
    model.to(torch.device(device))
    sums: dict[tuple[str, int], np.ndarray] = {}
    counts: dict[str, int] = defaultdict(int)
    n_layers = None
    for sentence in sentences:
        ids = encode_text(tokenizer, sentence["text"])
        if not ids:
            raise ValueError(f"sentence {sentence.get('sentence_id', '?')!r} tokenizes to nothing")
        states = sentence_states(model, ids, device=device)
        n_layers = len(states)
        for layer in layers:
            if not 0 <= layer < len(states):
                raise ValueError(
                    f"layer {layer} out of range; model exposes layers 0..{len(states) - 1}"
                )
            pooled = states[layer].mean(dim=0) if pooling == "mean" else states[layer][-1]
            key = (sentence["language"], layer)
            vec = pooled.double().cpu().numpy()
            sums[key] = vec if key not in sums else sums[key] + vec
        counts[sentence["language"]] += 1
    if n_layers is None:
        raise ValueError("no sentences supplied")
    records = []
    for (language, layer), total in sorted(sums.items()):
        mean = total / counts[language]
        records.append(
            {
                "language": language,
                "layer": int(layer),
                "dim": int(mean.shape[0]),
                "vector": [float(v) for v in mean],
            }
        )
    return records
