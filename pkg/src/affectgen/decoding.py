"""Beam search with length normalization and bidirectional/affective re-ranking.

beam_search only needs the decoder protocol (start_decode / next_distribution
/ advance), so tests can drive it with hand-set next-token tables.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .corpus import EOS, Vocabulary
from .emotions import EmotionClassifier, EmotionDistribution
from .model import PROB_FLOOR

NEG_INF = float("-inf")


@dataclass(frozen=True)
class BeamConfig:
    beam_size: int = 10
    max_length: int = 20
    length_norm: bool = True

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")


@dataclass(frozen=True)
class RerankWeights:
    alpha: float = 50.0
    beta: float = 0.001
    gamma: float = 4.2


@dataclass
class Candidate:
    """A decoded sequence with its re-ranking score terms.

    ids ends with EOS when the sequence terminated before max_length; the
    emitted length (EOS included) is what length normalization and the
    length bonus count.
    """

    ids: tuple[int, ...]
    fwd_logprob: float
    rev_logprob: float | None = None
    emotion: EmotionDistribution | None = None
    emotion_distance: float | None = None
    final_score: float | None = None

    @property
    def length(self) -> int:
        return len(self.ids)

    @property
    def response_ids(self) -> tuple[int, ...]:
        return self.ids[:-1] if self.ids and self.ids[-1] == EOS else self.ids

    def normalized_score(self, length_norm: bool) -> float:
        return self.fwd_logprob / self.length if length_norm else self.fwd_logprob

    def to_record(self, vocab: Vocabulary | None = None) -> dict:
        rec = {
            "ids": list(self.ids),
            "fwd_logprob": self.fwd_logprob,
            "rev_logprob": self.rev_logprob,
            "length": self.length,
            "emotion_distance": self.emotion_distance,
            "final_score": self.final_score,
        }
        if vocab is not None:
            rec["text"] = " ".join(vocab.decode(self.ids))
        if self.emotion is not None:
            rec["emotion"] = list(self.emotion.p)
        return rec


@dataclass
class _Hypothesis:
    ids: tuple[int, ...]
    logprob: float
    state: object


def beam_search(model, prompt_ids, e0: EmotionDistribution, cfg: BeamConfig) -> list[Candidate]:
    """Expand B hypotheses over the model's next-token distribution.

    Pruning ranks extensions by cumulative log probability (token-id order
    breaks ties); the returned candidates are sorted by the normalized score.
    """
    start = model.start_decode(prompt_ids, e0)
    active = [_Hypothesis(ids=(), logprob=0.0, state=start)]
    finished: list[Candidate] = []
    for _ in range(cfg.max_length):
        if not active:
            break
        pool: list[tuple[float, tuple[int, ...], _Hypothesis, np.ndarray, int]] = []
        for hyp in active:
            probs, h_next = model.next_distribution(hyp.state, e0)
            valid = np.flatnonzero(probs >= PROB_FLOOR)  # zero-prob tokens never expand
            logp = np.log(probs[valid])
            if cfg.beam_size < valid.size:
                # stable sort keeps token-id order among equal log-probs
                keep = np.argsort(-logp, kind="stable")[:cfg.beam_size]
            else:
                keep = np.arange(valid.size)
            for j in keep:
                tok = int(valid[j])
                pool.append((hyp.logprob + logp[j], hyp.ids + (tok,), hyp, h_next, tok))
        pool.sort(key=lambda item: (-item[0], item[1]))
        active = []
        for score, ids, hyp, h_next, tok in pool[:cfg.beam_size]:
            if tok == EOS:
                finished.append(Candidate(ids=ids, fwd_logprob=score))
            else:
                active.append(_Hypothesis(ids=ids, logprob=score,
                                          state=model.advance(hyp.state, tok, h_next)))
    finished.extend(Candidate(ids=h.ids, fwd_logprob=h.logprob) for h in active)
    finished.sort(key=lambda c: (-c.normalized_score(cfg.length_norm), c.ids))
    return finished[:cfg.beam_size]


def greedy_decode(model, prompt_ids, e0: EmotionDistribution, max_length: int) -> tuple[int, ...]:
    """Repeated argmax decoding; equals beam_search with B=1."""
    state = model.start_decode(prompt_ids, e0)
    ids: list[int] = []
    for _ in range(max_length):
        probs, h_next = model.next_distribution(state, e0)
        tok = int(np.argmax(probs))
        ids.append(tok)
        if tok == EOS:
            break
        state = model.advance(state, tok, h_next)
    return tuple(ids)


def score_candidates(cands: list[Candidate], reverse_model, classifier: EmotionClassifier,
                     vocab: Vocabulary, prompt_ids, e0: EmotionDistribution,
                     weights: RerankWeights) -> list[Candidate]:
    """Attach the bidirectional and affective re-ranking terms.

    final = fwd + alpha*log p(prompt|cand) + beta*len - gamma*||E_cand - e0||.
    The two log probabilities stay length-unnormalized.
    """
    uniform = EmotionDistribution.uniform()
    scored = []
    for c in cands:
        resp = c.response_ids
        if reverse_model is not None and weights.alpha != 0.0:
            rev = (reverse_model.sequence_logprob(resp, prompt_ids, uniform)
                   if resp else NEG_INF)
        else:
            rev = 0.0
        emotion = classifier(vocab.decode(c.ids))
        dist = float(np.linalg.norm(emotion.as_array() - e0.as_array()))
        final = (c.fwd_logprob + weights.alpha * rev
                 + weights.beta * c.length - weights.gamma * dist)
        scored.append(replace(c, rev_logprob=rev, emotion=emotion,
                              emotion_distance=dist, final_score=final))
    return scored


def select_final(cands: list[Candidate]) -> Candidate:
    """Argmax of final_score; ties prefer shorter then lexicographic ids."""
    if not cands:
        raise ValueError("no candidates to select from")
    if any(c.final_score is None for c in cands):
        raise ValueError("candidates must be scored before selection")
    return min(cands, key=lambda c: (-c.final_score, len(c.ids), c.ids))
