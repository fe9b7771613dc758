import random

import pytest
import torch

from xlmem_adapter.tinymodel import tiny_causal_model, tiny_span_model
from xlmem_adapter.tokenizer import ByteTokenizer

# threaded float32 kernels can differ between calls at the last few ulps;
# single-threaded execution makes repeated forwards bit-identical
torch.set_num_threads(1)

WORDS = ("hus", "skov", "vand", "lys", "morgen", "vinter", "vej", "tid", "dag", "nat")


def make_passages(n: int, languages=("da", "de", "zh", "ja"), words_per=60, seed=4):
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        lang = languages[i % len(languages)]
        text = " ".join(rng.choice(WORDS) for _ in range(words_per))
        rows.append(
            {
                "language": lang,
                "text": text,
                "lid_confidence": 0.97,
                "lid_proportion": 0.95,
                "source_id": f"{lang}-{i}",
            }
        )
    return rows


@pytest.fixture(scope="session")
def tokenizer():
    return ByteTokenizer()


@pytest.fixture(scope="session")
def causal_model():
    return tiny_causal_model(seed=0)


@pytest.fixture(scope="session")
def span_model():
    return tiny_span_model(seed=0)


@pytest.fixture(scope="session")
def passages20():
    return make_passages(20)
