"""Simulate a human-in-the-loop gamma study end to end.

A synthetic annotator clicks AffectButton positions whose distance to the
requested emotion follows a parabola with its minimum at gamma = 4.2; the
records flow through the real store and curve fit.

Usage: python3 scripts/gamma_study.py [store.jsonl]
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from affectgen.annotations import (GAMMA_GRID, AnnotationStore,
                                   compute_gamma_curve, fit_gamma_opt,
                                   new_record)
from affectgen.emotions import EmotionDistribution, VadVector


def synthetic_click(target_emotion, distance, rng):
    """A VAD point at roughly `distance` from the target emotion, clipped to
    the cube (real clicks cannot leave it)."""
    from affectgen.emotions import EMOTION_VAD_MAP
    target = EMOTION_VAD_MAP @ target_emotion.as_array()
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    point = np.clip(target + direction * distance, 0.0, 1.0)
    return VadVector(*point)


def main() -> int:
    store_path = Path(sys.argv[1]) if len(sys.argv) > 1 else \
        Path(tempfile.mkdtemp()) / "annotations.jsonl"
    store = AnnotationStore(store_path)
    rng = np.random.default_rng(0)
    emotions = ["fear", "anger", "joy", "surprise"]  # the button's corners
    for gamma in GAMMA_GRID:
        for k in range(10):
            emotion = EmotionDistribution.one_hot(emotions[k % 4])
            distance = 0.04 * (gamma - 4.2) ** 2 + abs(rng.normal(0, 0.05))
            rec = new_record(prompt=f"prompt-{k}", response=f"response-{k}",
                             target_emotion=emotion, gamma_used=float(gamma),
                             annotated_vad=synthetic_click(emotion, distance, rng))
            store.append(rec)
    records = store.read_all()
    curve = compute_gamma_curve(records)
    print("gamma    mean dE  n")
    for g, m, c in zip(curve.grid, curve.mean_delta_e, curve.counts):
        print(f"{g:6.3f}  {m:8.4f}  {c}")
    print(f"gamma_opt = {fit_gamma_opt(curve):.3f}  (store: {store_path})")
    for emotion in emotions:
        sub = compute_gamma_curve(records, emotion=emotion)
        print(f"  per-emotion {emotion}: gamma_opt = {fit_gamma_opt(sub):.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
