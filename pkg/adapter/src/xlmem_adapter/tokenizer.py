"""Byte-level tokenizer for the bundled tiny models.

Token IDs 0..255 are raw UTF-8 bytes; 256/257 are PAD/EOS; 258..357 are the
span-corruption sentinels, highest-numbered first like T5's extra IDs.
"""

from __future__ import annotations

import hashlib

PAD_ID = 256
EOS_ID = 257
N_SENTINELS = 100
FIRST_SENTINEL_ID = 258
VOCAB_SIZE = FIRST_SENTINEL_ID + N_SENTINELS


class ByteTokenizer:
    vocab_size = VOCAB_SIZE
    pad_id = PAD_ID
    eos_id = EOS_ID

    def encode(self, text: str) -> list[int]:
        return list(text.encode("utf-8"))

    def decode(self, ids: list[int]) -> str:
        return bytes(i for i in ids if i < 256).decode("utf-8", errors="replace")

    @staticmethod
    def sentinel(k: int) -> int:
        if not 0 <= k < N_SENTINELS:
            raise ValueError(f"sentinel index {k} out of range")
        return FIRST_SENTINEL_ID + k

    @staticmethod
    def is_sentinel(token_id: int) -> bool:
        return FIRST_SENTINEL_ID <= token_id < FIRST_SENTINEL_ID + N_SENTINELS

    def fingerprint(self) -> str:
        spec = f"byte-tokenizer/v1 vocab={self.vocab_size} pad={PAD_ID} eos={EOS_ID} sentinels={N_SENTINELS}"
        return hashlib.sha256(spec.encode()).hexdigest()[:16]
