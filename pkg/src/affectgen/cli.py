"""Command-line entry points: train, generate, evaluate, gamma-fit, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .affect_ops import vocab_vad_matrix
from .annotations import AnnotationStore, compute_gamma_curve, fit_gamma_opt
from .corpus import (SplitSpec, build_vocabulary, ingest_pairs, label_corpus,
                     load_vocabulary, normalize_and_tokenize, reverse_corpus,
                     save_vocabulary, split_corpus)
from .decoding import BeamConfig, beam_search
from .emotions import (ClassifierConfig, EmotionDistribution, VadLexicon,
                       VadPrototypeClassifier, load_lexicon)
from .metrics import EvalReport, bleu, distinct_n
from .model import ModelConfig, ModelVariant, Seq2SeqModel
from .service import GenerationEngine
from .training import LEARNING_RATE_REVERSE, TrainConfig, Trainer


def _read_pair_texts(path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if "\t" in line:
                prompt, response = line.split("\t", 1)
                yield normalize_and_tokenize(prompt), normalize_and_tokenize(response)


def cmd_train(args) -> int:
    lexicon = load_lexicon(args.lexicon) if args.lexicon else VadLexicon()
    if args.vocab:
        vocab = load_vocabulary(args.vocab, max_size=args.max_vocab)
    else:
        seqs = []
        for p, r in _read_pair_texts(args.corpus):
            seqs.append(p)
            seqs.append(r)
        vocab = build_vocabulary(seqs, max_size=args.max_vocab)
    corpus = ingest_pairs(args.corpus, vocab, max_length=args.max_length)
    if args.reverse:
        corpus = reverse_corpus(corpus)
    classifier = VadPrototypeClassifier(lexicon, ClassifierConfig())
    corpus = label_corpus(corpus, classifier, vocab)
    train, val, _test = split_corpus(corpus, SplitSpec(seed=args.seed))

    variant = ModelVariant.parse(args.variant)
    model_cfg = ModelConfig(vocab_size=len(vocab), embed_dim=args.embed_dim,
                            hidden_dim=args.hidden_dim, max_length=args.max_length,
                            variant=variant, seed=args.seed)
    model = Seq2SeqModel(model_cfg, vad_matrix=vocab_vad_matrix(vocab, lexicon))
    lr = LEARNING_RATE_REVERSE if args.reverse else args.learning_rate
    train_cfg = TrainConfig(mu=args.mu, max_length=args.max_length, epochs=args.epochs,
                            seed=args.seed, learning_rate=lr, dropout=args.dropout,
                            batch_size=args.batch_size)
    out_dir = Path(args.out)
    trainer = Trainer(model, train_cfg, run_dir=out_dir)
    save_vocabulary(vocab, out_dir / "vocab.txt")
    reports = trainer.fit(train, val)
    last = reports[-1]
    print(f"trained {len(reports)} epochs: train_loss={last.train_loss:.4f} "
          f"val_loss={last.val_loss:.4f} -> {out_dir}")
    return 0


def cmd_generate(args) -> int:
    engine = GenerationEngine.load(args.fwd, args.vocab, args.lexicon,
                                   rev_path=args.rev, default_beam=args.beam)
    result = engine.generate(args.prompt, args.emotion, gamma=args.gamma,
                             beam_size=args.beam)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            for rec in result.candidates:
                fh.write(json.dumps(rec) + "\n")
    print(result.response)
    return 0


def cmd_evaluate(args) -> int:
    engine = GenerationEngine.load(args.fwd, args.vocab, args.lexicon, rev_path=args.rev)
    corpus = ingest_pairs(args.corpus, engine.vocab, max_length=args.max_length)
    pairs = corpus.pairs[:args.limit] if args.limit else corpus.pairs
    cfg = BeamConfig(beam_size=args.beam, max_length=engine.forward.config.max_length)
    uniform = EmotionDistribution.uniform()
    best_cands, mean_refs, mean_cands, all_responses = [], [], [], []
    refs = []
    for pair in pairs:
        cands = beam_search(engine.forward, pair.prompt, uniform, cfg)
        ref = list(pair.response)
        per_cand = [list(c.response_ids) for c in cands]
        all_responses.extend(per_cand)
        scored = [(bleu([cand], [ref]) if cand else 0.0, cand) for cand in per_cand]
        best_cands.append(max(scored, key=lambda s: s[0])[1])
        refs.append(ref)
        for cand_bleu, cand in scored:
            mean_cands.append(cand)
            mean_refs.append(ref)
    report = EvalReport(
        bleu=bleu(best_cands, refs),
        bleu_mean=bleu(mean_cands, mean_refs),
        distinct1=distinct_n(all_responses, 1),
        distinct2=distinct_n(all_responses, 2),
        token_count=sum(len(r) for r in all_responses),
    )
    print(json.dumps(report.to_dict()))
    return 0


def cmd_gamma_fit(args) -> int:
    store = AnnotationStore(args.store)
    records = store.read_all()
    curve = compute_gamma_curve(records, emotion=args.emotion,
                                min_vad_norm=args.min_norm)
    result = curve.to_dict()
    result["gamma_opt"] = fit_gamma_opt(curve)
    print(json.dumps(result))
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    serve(port=args.port, fwd_path=args.fwd, rev_path=args.rev,
          vocab_path=args.vocab, lexicon_path=args.lexicon,
          store_path=args.store, ui_dir=args.ui)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affectgen",
                                     description="emotion-controlled dialog generation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a forward or reversed model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--variant", default="baseline", choices=list(ModelVariant.NAMES))
    p.add_argument("--reverse", action="store_true",
                   help="train on reversed pairs (response -> prompt)")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--vocab", default=None, help="existing vocabulary file")
    p.add_argument("--out", default="runs/latest")
    p.add_argument("--max-length", type=int, default=20)
    p.add_argument("--max-vocab", type=int, default=42_000)
    p.add_argument("--embed-dim", type=int, default=300)
    p.add_argument("--hidden-dim", type=int, default=256)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.001)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--mu", type=float, default=0.1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="generate one re-ranked response")
    p.add_argument("--prompt", required=True)
    p.add_argument("--emotion", required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--beam", type=int, default=10)
    p.add_argument("--fwd", required=True)
    p.add_argument("--rev", default=None)
    p.add_argument("--vocab", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--report", default=None, help="write per-candidate scores (jsonl)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="BLEU and distinct-n on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--fwd", required=True)
    p.add_argument("--rev", default=None)
    p.add_argument("--vocab", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--beam", type=int, default=10)
    p.add_argument("--max-length", type=int, default=20)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gamma-fit", help="fit gamma_opt from stored annotations")
    p.add_argument("--store", required=True)
    p.add_argument("--emotion", default=None)
    p.add_argument("--min-norm", type=float, default=None)
    p.set_defaults(func=cmd_gamma_fit)

    p = sub.add_parser("serve", help="run the generation/annotation service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--fwd", required=True)
    p.add_argument("--rev", default=None)
    p.add_argument("--vocab", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--store", default="annotations.jsonl")
    p.add_argument("--ui", default=None, help="static directory for the browser UI")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
