"""Job configuration for record generation."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SpanCorruptionSpec:
    """Span-corruption noising parameters (T5-style defaults)."""

    corruption_rate: float = 0.15
    mean_span_length: float = 3.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.corruption_rate < 1.0:
            raise ValueError(f"corruption rate must be in (0, 1), got {self.corruption_rate}")
        if self.mean_span_length < 1.0:
            raise ValueError(f"mean span length must be >= 1, got {self.mean_span_length}")


@dataclass(frozen=True)
class GenerationJob:
    """One record-generation run over a passage file.

    Decoding is always greedy; `prefix_length`/`suffix_length` set the
    prompt/target split for causal models, and `span` configures the
    corruption for encoder-decoder models.
    """

    model: str
    architecture: str  # "causal" | "span"
    prefix_length: int = 50
    suffix_length: int = 15
    batch_size: int = 8
    device: str = "cpu"
    seed: int = 0
    span: SpanCorruptionSpec = SpanCorruptionSpec()

    def __post_init__(self) -> None:
        if self.architecture not in ("causal", "span"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.prefix_length < 1:
            raise ValueError("prefix length must be >= 1")
        if self.suffix_length < 1:
            raise ValueError("suffix length must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
