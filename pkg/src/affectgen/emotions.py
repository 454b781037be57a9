"""Emotion representations and the VAD affect space.

Holds the categorical six-emotion distribution, the fixed emotion-to-VAD
mapping matrix, the VAD lexicon with fuzzy lookup and neutral fallback, and
a prototype-distance emotion classifier usable wherever a sentence needs an
emotion label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Final, Sequence

import numpy as np

EMOTIONS: Final[tuple[str, ...]] = (
    "anger", "surprise", "joy", "sadness", "fear", "disgust",
)

# Columns follow EMOTIONS order; rows are valence, arousal, dominance.
EMOTION_VAD_MAP: Final[np.ndarray] = np.array([
    [0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 1.0, 0.0, 1.0, 0.5],
    [1.0, 0.0, 1.0, 0.0, 0.0, 0.5],
])
EMOTION_VAD_MAP.setflags(write=False)

NEUTRAL_VAD: Final[np.ndarray] = np.array([0.5, 0.5, 0.5])
NEUTRAL_VAD.setflags(write=False)

DISTRIBUTION_TOL: Final[float] = 1e-9


@dataclass(frozen=True)
class EmotionDistribution:
    """Probability distribution over the six basic emotions."""

    p: tuple[float, float, float, float, float, float]

    def __post_init__(self):
        if len(self.p) != len(EMOTIONS):
            raise ValueError(f"expected {len(EMOTIONS)} probabilities, got {len(self.p)}")
        if any(not (0.0 <= x <= 1.0) for x in self.p):
            raise ValueError(f"probabilities must lie in [0,1]: {self.p}")
        if abs(sum(self.p) - 1.0) > DISTRIBUTION_TOL:
            raise ValueError(f"probabilities must sum to 1: sum={sum(self.p)}")

    @classmethod
    def from_array(cls, arr) -> "EmotionDistribution":
        return cls(tuple(float(x) for x in arr))

    @classmethod
    def one_hot(cls, emotion: str) -> "EmotionDistribution":
        if emotion not in EMOTIONS:
            raise ValueError(f"unknown emotion {emotion!r}; expected one of {EMOTIONS}")
        return cls(tuple(1.0 if e == emotion else 0.0 for e in EMOTIONS))

    @classmethod
    def uniform(cls) -> "EmotionDistribution":
        return cls(tuple(1.0 / len(EMOTIONS) for _ in EMOTIONS))

    def as_array(self) -> np.ndarray:
        return np.array(self.p)

    def argmax(self) -> str:
        return EMOTIONS[int(np.argmax(self.p))]


@dataclass(frozen=True)
class VadVector:
    """Point in valence-arousal-dominance space.

    Lexicon entries live in [0,1]^3; affective goal/state vectors are
    unbounded.
    """

    v: float
    a: float
    d: float

    def __post_init__(self):
        for x in (self.v, self.a, self.d):
            if not math.isfinite(x):
                raise ValueError(f"VAD components must be finite: {(self.v, self.a, self.d)}")

    @classmethod
    def from_array(cls, arr) -> "VadVector":
        v, a, d = (float(x) for x in arr)
        return cls(v, a, d)

    def as_array(self) -> np.ndarray:
        return np.array([self.v, self.a, self.d])

    def in_unit_cube(self) -> bool:
        return all(0.0 <= x <= 1.0 for x in (self.v, self.a, self.d))


NEUTRAL = VadVector(0.5, 0.5, 0.5)


def emotion_to_vad(e: EmotionDistribution) -> VadVector:
    """Map an emotion distribution to VAD space via the fixed matrix."""
    return VadVector.from_array(EMOTION_VAD_MAP @ e.as_array())


def vad_distance(x: VadVector, y: VadVector) -> float:
    """Euclidean distance between two VAD points."""
    return float(np.linalg.norm(x.as_array() - y.as_array()))


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def string_similarity(a: str, b: str) -> float:
    """Normalized edit similarity: 1 - lev(a,b)/max(|a|,|b|); 1 for two empties."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


@dataclass
class VadLexicon:
    """Word -> VAD mapping with fuzzy resolution and neutral fallback.

    Lookup never fails: an exact entry wins, otherwise the entry of the most
    similar word with similarity >= similarity_threshold (ties broken by the
    lexicographically smallest word), otherwise the neutral point.
    """

    entries: dict[str, VadVector] = field(default_factory=dict)
    neutral: VadVector = NEUTRAL
    similarity_threshold: float = 0.9
    _cache: dict[str, VadVector] = field(default_factory=dict, repr=False)
    _sorted_words: list[str] | None = field(default=None, repr=False)

    def __post_init__(self):
        for w, vec in self.entries.items():
            if not vec.in_unit_cube():
                raise ValueError(f"lexicon entry {w!r} outside [0,1]^3: {vec}")

    def lookup(self, word: str) -> VadVector:
        hit = self.entries.get(word)
        if hit is not None:
            return hit
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        result = self._fuzzy(word)
        self._cache[word] = result
        return result

    def _fuzzy(self, word: str) -> VadVector:
        if self._sorted_words is None:
            self._sorted_words = sorted(self.entries)
        best_sim = -1.0
        best_word: str | None = None
        for cand in self._sorted_words:
            sim = string_similarity(word, cand)
            if sim > best_sim:  # sorted order makes ties lexicographic
                best_sim = sim
                best_word = cand
        if best_word is not None and best_sim >= self.similarity_threshold:
            return self.entries[best_word]
        return self.neutral

    def vad_array(self, word: str) -> np.ndarray:
        return self.lookup(word).as_array()


def load_lexicon(path) -> VadLexicon:
    """Read a lexicon file: `word<TAB>V<TAB>A<TAB>D` per line, `#` comments."""
    entries: dict[str, VadVector] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected word<TAB>V<TAB>A<TAB>D, got {raw!r}")
            word, *vals = parts
            try:
                v, a, d = (float(x) for x in vals)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad VAD values {vals}") from exc
            vec = VadVector(v, a, d)
            if not vec.in_unit_cube():
                raise ValueError(f"{path}:{lineno}: VAD outside [0,1]^3: {vec}")
            entries[word] = vec
    return VadLexicon(entries=entries)


def save_lexicon(lex: VadLexicon, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(lex.entries):
            vec = lex.entries[word]
            fh.write(f"{word}\t{vec.v}\t{vec.a}\t{vec.d}\n")


@dataclass(frozen=True)
class ClassifierConfig:
    """Softmax sharpness for the prototype classifier."""

    temperature: float = 0.15

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")


# Any callable mapping word tokens to an EmotionDistribution can serve as
# the sentence classifier.
EmotionClassifier = Callable[[Sequence[str]], EmotionDistribution]


class VadPrototypeClassifier:
    """Nearest-VAD-prototype classifier.

    Averages the VAD vectors of the tokens and softmaxes the negative
    distances to the six emotion prototype columns.  Empty input returns the
    uniform distribution.
    """

    def __init__(self, lexicon: VadLexicon, config: ClassifierConfig | None = None):
        self.lexicon = lexicon
        self.config = config or ClassifierConfig()

    def __call__(self, tokens: Sequence[str]) -> EmotionDistribution:
        if not tokens:
            return EmotionDistribution.uniform()
        mean = np.mean([self.lexicon.vad_array(t) for t in tokens], axis=0)
        dists = np.linalg.norm(EMOTION_VAD_MAP - mean[:, None], axis=0)
        scores = -dists / self.config.temperature
        scores -= scores.max()
        e = np.exp(scores)
        return EmotionDistribution.from_array(e / e.sum())


def classify_emotion(cfg: ClassifierConfig, lex: VadLexicon,
                     tokens: Sequence[str]) -> EmotionDistribution:
    return VadPrototypeClassifier(lex, cfg)(tokens)
