"""Scoring memorization records: exact, relaxed, and likelihood metrics.

Records carry the model-tokenizer token IDs of a prompt/suffix split, the
greedy continuation, and the log-probabilities assigned to the true suffix.
"""

from xlmem import (
    MemorizationRecord,
    SpanSegment,
    bleu,
    em_rate,
    em_ratio,
    language_scores,
    pm_score,
    rouge_l,
)

# A causal record: the model reproduced the suffix exactly.
hit = MemorizationRecord(
    language="da",
    sample_id="da-0001",
    architecture="causal",
    prefix_tokens=tuple(range(100, 235)),          # 135-token prompt
    reference_tokens=(7, 21, 9, 4, 4, 30, 12, 9, 2, 17, 5, 11, 20, 8, 3),
    predicted_tokens=(7, 21, 9, 4, 4, 30, 12, 9, 2, 17, 5, 11, 20, 8, 3),
    reference_logprobs=(-0.02, -0.1, -0.4, -0.05, -0.3, -0.2, -0.1, -0.6,
                        -0.08, -0.12, -0.3, -0.2, -0.15, -0.1, -0.05),
)
# A near miss: the continuation diverges after four tokens.
miss = MemorizationRecord(
    language="da",
    sample_id="da-0002",
    architecture="causal",
    prefix_tokens=tuple(range(100, 235)),
    reference_tokens=(7, 21, 9, 4, 18, 30, 12, 9, 2, 17, 5, 11, 20, 8, 3),
    predicted_tokens=(7, 21, 9, 4, 1, 1, 2, 6, 6, 25, 25, 3, 3, 19, 19),
    reference_logprobs=(-0.5, -1.2, -2.4, -0.9, -3.3, -2.2, -1.8, -2.6,
                        -1.1, -2.0, -3.1, -2.9, -1.4, -2.2, -0.7),
)

print(f"prompt share of the sequence (n/(n+m)):  {em_ratio(hit):.3f}")
print(f"exact-match rate over the two records:   {em_rate([hit, miss])['da']:.2f}")
print(f"BLEU of the near miss:                   {bleu(miss.predicted_tokens, miss.reference_tokens):.4f}")
print(f"ROUGE-L of the near miss:                {rouge_l(miss.predicted_tokens, miss.reference_tokens):.4f}")
print(f"suffix log-likelihood (hit vs miss):     {pm_score(hit):.2f} vs {pm_score(miss):.2f}")

print("\nper-language table rows (RM on a 0-100 scale):")
for score in language_scores([hit, miss]):
    print(f"  {score.language}  {score.metric.value:<10s} {score.value:10.4f}  (n={score.sample_count})")

# Encoder-decoder runs use span-corruption records instead: a sample counts
# as memorized only when every masked span is reconstructed, and relaxed
# metrics are rejected because spans average about three tokens.
span_rec = MemorizationRecord(
    language="de",
    sample_id="de-0001",
    architecture="span",
    prefix_tokens=(5, 1, 250001, 8, 9, 250000, 4),  # corrupted input with sentinels
    spans=(
        SpanSegment(reference_tokens=(11, 12, 13), predicted_tokens=(11, 12, 13),
                    reference_logprobs=(-0.3, -0.2, -0.4)),
        SpanSegment(reference_tokens=(44, 45), predicted_tokens=(44, 45),
                    reference_logprobs=(-0.6, -0.1)),
    ),
)
print(f"\nspan record memorized: {em_rate([span_rec])['de'] == 1.0}, "
      f"PM = {pm_score(span_rec):.2f}")
