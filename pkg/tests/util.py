"""Shared builders and independent oracles for the test suite."""

import math
from collections import defaultdict

import numpy as np

from affectgen.affect_ops import vocab_vad_matrix
from affectgen.corpus import EOS, Corpus, DialogPair, Vocabulary
from affectgen.emotions import (ClassifierConfig, VadLexicon,
                                VadPrototypeClassifier, VadVector)
from affectgen.model import PROB_FLOOR, ModelConfig, ModelVariant, Seq2SeqModel


def toy_vocab_and_lexicon(n_words=12, seed=0):
    words = [f"w{chr(ord('a') + i)}" for i in range(n_words)]
    rng = np.random.default_rng(seed)
    lex = VadLexicon(entries={w: VadVector(*np.round(rng.random(3), 3)) for w in words})
    return Vocabulary(words=words, max_size=10_000), lex


def toy_model(variant=ModelVariant(), vocab=None, lexicon=None, embed=8, hidden=8,
              max_length=20, seed=0):
    if vocab is None:
        vocab, lexicon = toy_vocab_and_lexicon()
    cfg = ModelConfig(vocab_size=len(vocab), embed_dim=embed, hidden_dim=hidden,
                      max_length=max_length, variant=variant, seed=seed)
    vad = vocab_vad_matrix(vocab, lexicon) if lexicon is not None else None
    return Seq2SeqModel(cfg, vad_matrix=vad), vocab, lexicon


def classifier_for(lexicon, temperature=0.15):
    return VadPrototypeClassifier(lexicon, ClassifierConfig(temperature))


def synthetic_corpus(vocab, classifier, n_pairs=32, prompt_len=2, seed=0):
    """Deterministic prompt->response mapping over the non-special ids."""
    ids = list(range(4, len(vocab)))
    pairs = []
    combos = [(i, j) for i in ids for j in ids]
    for i, j in combos[:n_pairs]:
        prompt = (i, j)
        k = len(ids)
        resp = ((i * 7 + j * 3) % k + 4, (i * 5 + j * 11) % k + 4, (i + j) % k + 4)
        resp = resp[:2 + (i + j) % 2]
        emotion = classifier([vocab.word_of(t) for t in resp])
        pairs.append(DialogPair(prompt=prompt, response=resp, target_emotion=emotion))
    assert len(pairs) == n_pairs
    return Corpus(pairs=pairs)


def enumerate_all_candidates(model, prompt_ids, e0, max_length):
    """Brute-force walk of the model's step distributions.

    Mirrors beam semantics: EOS terminates, zero-probability tokens are
    impossible, sequences hitting max_length stop without EOS.
    """
    results = []

    def recurse(state, ids, lp):
        if len(ids) == max_length:
            results.append((ids, lp))
            return
        probs, h_next = model.next_distribution(state, e0)
        for tok in range(len(probs)):
            if probs[tok] < PROB_FLOOR:
                continue
            step_lp = lp + float(np.log(probs[tok]))
            if tok == EOS:
                results.append((ids + (tok,), step_lp))
            else:
                recurse(model.advance(state, tok, h_next), ids + (tok,), step_lp)

    recurse(model.start_decode(prompt_ids, e0), (), 0.0)
    return results


def rank_candidates(results, length_norm):
    def key(item):
        ids, lp = item
        score = lp / len(ids) if length_norm else lp
        return (-score, ids)

    return sorted(results, key=key)


def oracle_bleu(candidates, references):
    """Brute-force BLEU written independently: explicit n-gram dictionaries,
    clipped counts, add-one smoothing above unigrams, brevity penalty."""
    def count(seq, n):
        d = defaultdict(int)
        for i in range(len(seq) - n + 1):
            d[tuple(seq[i:i + n])] += 1
        return d

    c_total = sum(len(c) for c in candidates)
    r_total = sum(len(r) for r in references)
    if c_total == 0:
        return 0.0
    log_precisions = []
    for n in (1, 2, 3, 4):
        match = 0
        total = 0
        for cand, ref in zip(candidates, references):
            cc = count(cand, n)
            rc = count(ref, n)
            for gram, k in cc.items():
                match += min(k, rc.get(gram, 0))
                total += k
        if n == 1:
            if match == 0:
                return 0.0
            log_precisions.append(math.log(match / total))
        else:
            log_precisions.append(math.log((match + 1) / (total + 1)))
    geo = math.exp(sum(log_precisions) / 4)
    bp = 1.0 if c_total > r_total else math.exp(1 - r_total / c_total)
    return bp * geo


def oracle_distinct(responses, n):
    seen = set()
    tokens = 0
    for r in responses:
        tokens += len(r)
        for i in range(len(r) - n + 1):
            seen.add(tuple(r[i:i + n]))
    return len(seen) / tokens


def random_token_corpus(rng, n_pairs, vocab=6, max_len=8):
    cands, refs = [], []
    for _ in range(n_pairs):
        cands.append([int(x) for x in rng.integers(0, vocab, size=rng.integers(1, max_len))])
        refs.append([int(x) for x in rng.integers(0, vocab, size=rng.integers(1, max_len))])
    return cands, refs


class TableModel:
    """Decoder protocol driven by hand-set next-token tables.

    tables maps an emitted prefix (tuple of ids) to a probability row; a
    missing prefix falls back to the uniform row.
    """

    def __init__(self, vocab_size, tables=None):
        self.vocab_size = vocab_size
        self.tables = tables or {}

    def start_decode(self, prompt_ids, e0):
        return ()

    def next_distribution(self, state, e0):
        row = self.tables.get(state)
        if row is None:
            row = np.full(self.vocab_size, 1.0 / self.vocab_size)
        return np.asarray(row, dtype=np.float64), None

    def advance(self, state, token, h_next):
        return state + (int(token),)
