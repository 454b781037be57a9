"""Tokenization, vocabulary with fuzzy mapping, and dialog-pair corpora."""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .emotions import EmotionClassifier, EmotionDistribution, string_similarity

PAD, SOS, EOS, OOV = 0, 1, 2, 3
SPECIAL_TOKENS = ("<pad>", "<sos>", "<eos>", "<oov>")

_PUNCT = set(string.punctuation)


def normalize_and_tokenize(text: str) -> list[str]:
    """Lowercase, strip non-ASCII, split on whitespace and punctuation."""
    cleaned = "".join(c for c in text.lower() if c.isascii())
    tokens: list[str] = []
    for chunk in cleaned.split():
        word = ""
        for c in chunk:
            if c in _PUNCT:
                if word:
                    tokens.append(word)
                    word = ""
                tokens.append(c)
            else:
                word += c
        if word:
            tokens.append(word)
    return tokens


@dataclass
class Vocabulary:
    """Fixed word list; ids 0..3 are PAD/SOS/EOS/OOV, stored words follow."""

    words: list[str]
    max_size: int = 42_000

    _index: dict[str, int] = field(init=False, repr=False)
    _fuzzy_cache: dict[str, int] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if len(set(self.words)) != len(self.words):
            raise ValueError("vocabulary words must be unique")
        for w in self.words:
            if w in SPECIAL_TOKENS:
                raise ValueError(f"{w!r} collides with a special token")
        self._index = {w: i + len(SPECIAL_TOKENS) for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(SPECIAL_TOKENS) + len(self.words)

    def id_of(self, word: str) -> int | None:
        return self._index.get(word)

    def word_of(self, idx: int) -> str:
        if idx < len(SPECIAL_TOKENS):
            return SPECIAL_TOKENS[idx]
        return self.words[idx - len(SPECIAL_TOKENS)]

    def map_token(self, word: str) -> int:
        """Exact id, else the most similar word with similarity > 0.9
        (lexicographic tie-break), else OOV."""
        exact = self._index.get(word)
        if exact is not None:
            return exact
        cached = self._fuzzy_cache.get(word)
        if cached is not None:
            return cached
        best_sim = -1.0
        best_id = OOV
        for cand in sorted(self.words):
            sim = string_similarity(word, cand)
            if sim > best_sim:
                best_sim = sim
                best_id = self._index[cand]
        result = best_id if best_sim > 0.9 else OOV
        self._fuzzy_cache[word] = result
        return result

    def encode(self, tokens: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.map_token(t) for t in tokens)

    def decode(self, ids: Sequence[int], skip_special: bool = True) -> list[str]:
        words = []
        for i in ids:
            if skip_special and i in (PAD, SOS, EOS):
                continue
            words.append(self.word_of(i))
        return words


def build_vocabulary(token_seqs: Iterable[Sequence[str]], max_size: int = 42_000) -> Vocabulary:
    """Most frequent words first (ties alphabetical), capped at max_size total."""
    counts: Counter[str] = Counter()
    for seq in token_seqs:
        counts.update(seq)
    ranked = sorted(counts, key=lambda w: (-counts[w], w))
    keep = max(0, max_size - len(SPECIAL_TOKENS))
    return Vocabulary(words=ranked[:keep], max_size=max_size)


def load_vocabulary(path, max_size: int = 42_000) -> Vocabulary:
    """One word per line; file order defines ids after the specials."""
    words: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            w = raw.strip()
            if w:
                words.append(w)
    return Vocabulary(words=words, max_size=max_size)


def save_vocabulary(vocab: Vocabulary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for w in vocab.words:
            fh.write(w + "\n")


@dataclass(frozen=True)
class DialogPair:
    """One prompt/response exchange, token ids plus the response emotion."""

    prompt: tuple[int, ...]
    response: tuple[int, ...]
    target_emotion: EmotionDistribution

    def __post_init__(self):
        if not self.prompt or not self.response:
            raise ValueError("prompt and response must be non-empty")


@dataclass
class Corpus:
    pairs: list[DialogPair]
    direction: str = "forward"  # "forward" | "reversed"

    def __len__(self) -> int:
        return len(self.pairs)


def reverse_corpus(c: Corpus) -> Corpus:
    """Swap prompt/response pairwise; an involution.  Relabel before training
    on the result, since target_emotion described the old response."""
    flipped = [
        DialogPair(prompt=p.response, response=p.prompt, target_emotion=p.target_emotion)
        for p in c.pairs
    ]
    direction = "reversed" if c.direction == "forward" else "forward"
    return Corpus(pairs=flipped, direction=direction)


def ingest_pairs(path, vocab: Vocabulary, max_length: int = 20) -> Corpus:
    """Read `prompt<TAB>response` lines into a forward corpus.

    Over-length sides are truncated to max_length tokens; emotions start
    uniform until label_corpus runs.
    """
    pairs: list[DialogPair] = []
    uniform = EmotionDistribution.uniform()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected prompt<TAB>response")
            prompt_text, response_text = line.split("\t", 1)
            prompt = vocab.encode(normalize_and_tokenize(prompt_text)[:max_length])
            response = vocab.encode(normalize_and_tokenize(response_text)[:max_length])
            if not prompt or not response:
                raise ValueError(f"{path}:{lineno}: empty prompt or response after tokenization")
            pairs.append(DialogPair(prompt=prompt, response=response, target_emotion=uniform))
    return Corpus(pairs=pairs)


def label_corpus(c: Corpus, classifier: EmotionClassifier, vocab: Vocabulary) -> Corpus:
    """Assign each pair the classifier's distribution for its response."""
    labeled = [
        replace(p, target_emotion=classifier(vocab.decode(p.response)))
        for p in c.pairs
    ]
    return Corpus(pairs=labeled, direction=c.direction)


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.94
    val_frac: float = 0.01
    test_frac: float = 0.05
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f < 0 for f in fracs):
            raise ValueError("fractions must be non-negative")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {sum(fracs)}")


def split_corpus(c: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Deterministic seeded shuffle, then contiguous cuts at floored
    cumulative fractions (so rounding remainders land in the test split)."""
    n = len(c.pairs)
    order = np.random.default_rng(spec.seed).permutation(n)
    cut1 = int(np.floor(n * spec.train_frac))
    cut2 = int(np.floor(n * (spec.train_frac + spec.val_frac)))
    shuffled = [c.pairs[i] for i in order]
    return (
        Corpus(pairs=shuffled[:cut1], direction=c.direction),
        Corpus(pairs=shuffled[cut1:cut2], direction=c.direction),
        Corpus(pairs=shuffled[cut2:], direction=c.direction),
    )


def oov_fraction(c: Corpus) -> float:
    total = 0
    oov = 0
    for p in c.pairs:
        for tok in p.prompt + p.response:
            total += 1
            oov += tok == OOV
    return oov / total if total else 0.0
