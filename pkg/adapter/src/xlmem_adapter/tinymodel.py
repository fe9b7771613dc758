"""Deterministic tiny models for offline runs.

The sandboxed test environment cannot download pretrained checkpoints, so
`tiny-causal` and `tiny-span` build small randomly initialized (but seeded,
hence reproducible) GPT-2-style and T5-style models over the byte
tokenizer.  Any other model string is treated as a local path or hub
identifier and loaded through the usual auto classes.
"""

from __future__ import annotations

import torch
from transformers import (
    AutoModelForCausalLM,
    AutoModelForSeq2SeqLM,
    AutoTokenizer,
    GPT2Config,
    GPT2LMHeadModel,
    T5Config,
    T5ForConditionalGeneration,
)

from .tokenizer import EOS_ID, PAD_ID, VOCAB_SIZE, ByteTokenizer

TINY_CAUSAL = "tiny-causal"
TINY_SPAN = "tiny-span"


def tiny_causal_model(seed: int = 0) -> GPT2LMHeadModel:
    config = GPT2Config(
        vocab_size=VOCAB_SIZE,
        n_positions=1024,
        n_embd=64,
        n_layer=2,
        n_head=2,
        bos_token_id=EOS_ID,
        eos_token_id=EOS_ID,
        pad_token_id=PAD_ID,
    )
    torch.manual_seed(seed)
    model = GPT2LMHeadModel(config)
    model.eval()
    return model


def tiny_span_model(seed: int = 0) -> T5ForConditionalGeneration:
    config = T5Config(
        vocab_size=VOCAB_SIZE,
        d_model=64,
        d_ff=128,
        d_kv=32,
        num_layers=2,
        num_heads=2,
        pad_token_id=PAD_ID,
        eos_token_id=EOS_ID,
        decoder_start_token_id=PAD_ID,
    )
    torch.manual_seed(seed)
    model = T5ForConditionalGeneration(config)
    model.eval()
    return model


def load_model(identifier: str, architecture: str, seed: int = 0):
    """Resolve a model string to (model, tokenizer).

    The bundled tiny identifiers are built locally; anything else is loaded
    with the transformers auto classes (requires the checkpoint to be
    reachable).
    """
    if identifier == TINY_CAUSAL:
        return tiny_causal_model(seed), ByteTokenizer()
    if identifier == TINY_SPAN:
        return tiny_span_model(seed), ByteTokenizer()
    tokenizer = AutoTokenizer.from_pretrained(identifier)
    if architecture == "causal":
        model = AutoModelForCausalLM.from_pretrained(identifier)
    else:
        model = AutoModelForSeq2SeqLM.from_pretrained(identifier)
    model.eval()
    return model, tokenizer


def model_fingerprint(identifier: str, model) -> str:
    n_params = sum(p.numel() for p in model.parameters())
    return f"{identifier}/params={n_params}"
