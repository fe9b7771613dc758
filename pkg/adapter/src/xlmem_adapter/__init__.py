"""Thin adapter around pretrained models that emits xlmem input files.

Produces greedy-decoded memorization records with teacher-forced reference
log-probabilities (causal prompt/suffix splits or T5-style span corruption)
and per-layer mean sentence embeddings, all in the JSONL schemas the
analysis package ingests.
"""

__version__ = "0.1.0"

from .jobs import GenerationJob, SpanCorruptionSpec
from .tokenizer import ByteTokenizer
from .tinymodel import tiny_causal_model, tiny_span_model

__all__ = [
    "__version__",
    "GenerationJob",
    "SpanCorruptionSpec",
    "ByteTokenizer",
    "tiny_causal_model",
    "tiny_span_model",
]
