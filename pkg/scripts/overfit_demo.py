"""Overfit a WI+WE model on a 32-pair synthetic corpus and report how many
training responses greedy decoding reproduces.

Usage: python3 scripts/overfit_demo.py [epochs]
"""

import sys
import time

import numpy as np

from affectgen.affect_ops import vocab_vad_matrix
from affectgen.corpus import EOS, Corpus, DialogPair, Vocabulary
from affectgen.decoding import greedy_decode
from affectgen.emotions import (ClassifierConfig, VadLexicon,
                                VadPrototypeClassifier, VadVector)
from affectgen.model import ModelConfig, ModelVariant, Seq2SeqModel
from affectgen.training import TrainConfig, Trainer


def build_corpus(vocab, classifier, n_pairs=32):
    ids = list(range(4, len(vocab)))
    k = len(ids)
    pairs = []
    for i in ids:
        for j in ids:
            if len(pairs) >= n_pairs:
                break
            resp = ((i * 7 + j * 3) % k + 4, (i * 5 + j * 11) % k + 4,
                    (i + j) % k + 4)[:2 + (i + j) % 2]
            emotion = classifier([vocab.word_of(t) for t in resp])
            pairs.append(DialogPair(prompt=(i, j), response=resp,
                                    target_emotion=emotion))
    return Corpus(pairs=pairs)


def main() -> int:
    epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 500
    rng = np.random.default_rng(0)
    words = [f"w{chr(ord('a') + i)}" for i in range(12)]
    vocab = Vocabulary(words=words, max_size=100)
    lexicon = VadLexicon(entries={w: VadVector(*np.round(rng.random(3), 3))
                                  for w in words})
    classifier = VadPrototypeClassifier(lexicon, ClassifierConfig())
    corpus = build_corpus(vocab, classifier)

    model = Seq2SeqModel(
        ModelConfig(vocab_size=len(vocab), embed_dim=16, hidden_dim=32,
                    max_length=10, variant=ModelVariant(wi=True, we=True), seed=1),
        vad_matrix=vocab_vad_matrix(vocab, lexicon))
    trainer = Trainer(model, TrainConfig(mu=0.1, max_length=10, epochs=epochs,
                                         seed=0, dropout=0.0, batch_size=4))
    start = time.time()
    for epoch in range(epochs):
        report = trainer.train_epoch(corpus, epoch)
        if epoch % 50 == 0 or epoch == epochs - 1:
            print(f"epoch {epoch:4d}  loss {report.train_loss:.4f}  "
                  f"reg {report.train_reg:.4f}  lambda {model.lambda_value():.4f}")
    matches = 0
    for pair in corpus.pairs:
        out = greedy_decode(model, pair.prompt, pair.target_emotion, 10)
        resp = out[:-1] if out and out[-1] == EOS else out
        matches += resp == pair.response
    print(f"greedy reproduced {matches}/{len(corpus.pairs)} responses "
          f"in {time.time() - start:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
