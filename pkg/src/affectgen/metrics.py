"""Corpus BLEU (1-4 grams, add-one smoothing above unigrams) and distinct-n."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

BLEU_MAX_ORDER = 4


@dataclass(frozen=True)
class EvalReport:
    bleu: float            # best candidate per prompt
    bleu_mean: float       # mean over candidates per prompt
    distinct1: float
    distinct2: float
    token_count: int

    def __post_init__(self):
        for name in ("bleu", "bleu_mean", "distinct1", "distinct2"):
            x = getattr(self, name)
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"{name} out of range: {x}")

    def to_dict(self) -> dict:
        return {
            "bleu": self.bleu,
            "bleu_mean": self.bleu_mean,
            "distinct1": self.distinct1,
            "distinct2": self.distinct2,
            "token_count": self.token_count,
        }


def _ngrams(seq: Sequence, n: int) -> Counter:
    return Counter(tuple(seq[i:i + n]) for i in range(len(seq) - n + 1))


def bleu(candidates: Sequence[Sequence], references: Sequence[Sequence]) -> float:
    """Corpus BLEU: geometric mean of modified n-gram precisions times the
    brevity penalty.  Orders above 1 get add-one smoothing so short
    desk-scale outputs do not zero out; zero unigram overlap still gives 0.
    """
    if not candidates or len(candidates) != len(references):
        raise ValueError("need equally many non-empty candidate and reference lists")
    matches = [0] * BLEU_MAX_ORDER
    totals = [0] * BLEU_MAX_ORDER
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, BLEU_MAX_ORDER + 1):
            cgrams = _ngrams(cand, n)
            rgrams = _ngrams(ref, n)
            totals[n - 1] += sum(cgrams.values())
            matches[n - 1] += sum(min(c, rgrams[g]) for g, c in cgrams.items())
    if cand_len == 0:
        return 0.0
    if matches[0] == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, BLEU_MAX_ORDER + 1):
        if n == 1:
            p = matches[0] / totals[0]
        else:
            p = (matches[n - 1] + 1.0) / (totals[n - 1] + 1.0)
        log_sum += math.log(p)
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_sum / BLEU_MAX_ORDER)


def distinct_n(responses: Sequence[Sequence], n: int) -> float:
    """Distinct n-grams across all responses over total generated tokens."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total_tokens = sum(len(r) for r in responses)
    if total_tokens == 0:
        raise ValueError("no generated tokens")
    grams = set()
    for r in responses:
        grams.update(tuple(r[i:i + n]) for i in range(len(r) - n + 1))
    return len(grams) / total_tokens
