"""Word-level affect machinery: emotion budgets, proximity scores, the
adaptive sampling mixture, and the affective regularizer.

Everything here is plain numpy; the training loop mirrors the same formulas
on the autodiff tape and the tests cross-check the two paths.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .corpus import Vocabulary
from .emotions import EMOTION_VAD_MAP, EmotionDistribution, VadLexicon


def vocab_vad_matrix(vocab: Vocabulary, lexicon: VadLexicon) -> np.ndarray:
    """(V, 3) matrix of VAD vectors for every vocabulary id.

    Specials and unknown words resolve through the lexicon's fuzzy lookup,
    so they land on the neutral point.
    """
    return np.array([lexicon.vad_array(vocab.word_of(i)) for i in range(len(vocab))])


def v_scores(e_t: np.ndarray, vad_matrix: np.ndarray) -> np.ndarray:
    """Per-word affinity to the remaining emotion budget: -||e_t - vad_w||."""
    return -np.linalg.norm(vad_matrix - np.asarray(e_t)[None, :], axis=1)


def softmax_np(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max()
    e = np.exp(shifted)
    return e / e.sum()


def effective_lambda(lam: float, emitted: int, max_length: int) -> float:
    """The mixture weight, forced to 1 once half the budget is spent."""
    return 1.0 if emitted >= max_length // 2 else lam


def we_mixture(lm_logits: np.ndarray, e_t: np.ndarray, vad_matrix: np.ndarray,
               lam: float) -> np.ndarray:
    """Next-token distribution: lam * softmax(logits) + (1-lam) * softmax(v)."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0,1], got {lam}")
    lm = softmax_np(lm_logits)
    if lam == 1.0:
        return lm
    affect = softmax_np(v_scores(e_t, vad_matrix))
    if lam == 0.0:
        return affect
    return lam * lm + (1.0 - lam) * affect


@dataclass(frozen=True)
class AffectiveGoal:
    """Total emotional content a response should carry, in VAD space."""

    e0_vad: np.ndarray
    origin: str  # "training" | "inference"


def init_affective_goal(mode: str, *, target_ids=None, vad_matrix=None,
                        e0: EmotionDistribution | None = None,
                        max_length: int | None = None) -> AffectiveGoal:
    """Training: sum of target-word VADs.  Inference: M_VAD e0 * max_length."""
    if mode == "training":
        if target_ids is None or vad_matrix is None:
            raise ValueError("training goal needs target_ids and vad_matrix")
        ids = np.asarray(list(target_ids), dtype=np.int64)
        total = vad_matrix[ids].sum(axis=0) if ids.size else np.zeros(3)
        return AffectiveGoal(e0_vad=total, origin="training")
    if mode == "inference":
        if e0 is None or max_length is None:
            raise ValueError("inference goal needs e0 and max_length")
        return AffectiveGoal(e0_vad=(EMOTION_VAD_MAP @ e0.as_array()) * max_length,
                             origin="inference")
    raise ValueError(f"unknown goal mode {mode!r}")


@dataclass(frozen=True)
class AffectiveState:
    """Remaining emotion budget while decoding: e_t = goal - emitted VADs."""

    e_t: np.ndarray
    step: int = 0
    lambda_param: float = 0.0  # unconstrained; logistic maps it into [0,1]

    def lambda_effective(self, max_length: int) -> float:
        lam = 1.0 / (1.0 + np.exp(-self.lambda_param))
        return effective_lambda(float(lam), self.step, max_length)


def start_affective_state(goal: AffectiveGoal, lambda_param: float = 0.0) -> AffectiveState:
    return AffectiveState(e_t=goal.e0_vad.copy(), step=0, lambda_param=lambda_param)


def update_affective_state(state: AffectiveState, emitted_word: str,
                           lexicon: VadLexicon) -> AffectiveState:
    return deplete_state(state, lexicon.vad_array(emitted_word))


def deplete_state(state: AffectiveState, emitted_vad: np.ndarray) -> AffectiveState:
    return replace(state, e_t=state.e_t - emitted_vad, step=state.step + 1)


def affective_regularizer(step_distributions, target_ids, vad_matrix: np.ndarray) -> float:
    """Distance between the mean expected VAD of the generated steps and the
    mean VAD of the target words."""
    dists = np.asarray(step_distributions)
    ids = np.asarray(list(target_ids), dtype=np.int64)
    gen_mean = (dists @ vad_matrix).mean(axis=0)
    tgt_mean = vad_matrix[ids].mean(axis=0)
    return float(np.linalg.norm(gen_mean - tgt_mean))


def total_loss(nll: float, reg: float, mu: float) -> float:
    return nll + mu * reg
