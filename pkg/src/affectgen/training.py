"""Teacher-forced training loop with clipping, ADAM and plateau scheduling."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .autodiff import no_grad
from .corpus import Corpus
from .model import Seq2SeqModel, save_checkpoint
from .optim import AdamState, PlateauScheduler, clip_global_norm

LEARNING_RATE_FORWARD = 0.001
LEARNING_RATE_REVERSE = 0.01  # the prompt-given-response model trains faster
MAX_LENGTH_SHORT = 20  # movie-dialog scale corpora
MAX_LENGTH_LONG = 30   # subtitle scale corpora


@dataclass
class TrainConfig:
    mu: float = 0.1  # affective regularizer weight
    max_length: int = MAX_LENGTH_SHORT
    epochs: int = 50
    seed: int = 0
    learning_rate: float = LEARNING_RATE_FORWARD
    clip_norm: float = 5.0
    weight_decay: float = 1e-5
    dropout: float = 0.2
    patience: int = 20
    lr_decay_factor: float = 0.5
    min_lr: float = 1e-6
    batch_size: int = 32
    teacher_forcing: bool = True  # decoder always consumes gold tokens

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.max_length < 2:
            raise ValueError("max_length must be >= 2")
        if not self.teacher_forcing:
            raise ValueError("only teacher-forced training is implemented")

    @classmethod
    def for_reverse(cls, **overrides) -> "TrainConfig":
        overrides.setdefault("learning_rate", LEARNING_RATE_REVERSE)
        return cls(**overrides)


@dataclass
class EpochReport:
    epoch: int
    train_loss: float
    train_reg: float
    val_loss: float | None = None
    lr: float | None = None


class Trainer:
    def __init__(self, model: Seq2SeqModel, cfg: TrainConfig, run_dir=None):
        self.model = model
        self.cfg = cfg
        self.optimizer = AdamState(lr=cfg.learning_rate, weight_decay=cfg.weight_decay)
        self.scheduler = PlateauScheduler(patience=cfg.patience,
                                          factor=cfg.lr_decay_factor, min_lr=cfg.min_lr)
        self.run_dir = Path(run_dir) if run_dir is not None else None
        if self.run_dir is not None:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            record = {"model": model.config.to_dict(), "train": asdict(cfg)}
            (self.run_dir / "config.json").write_text(json.dumps(record, indent=2))

    def _batches(self, corpus: Corpus, order) -> list[list]:
        pairs = [corpus.pairs[i] for i in order]
        size = self.cfg.batch_size
        return [pairs[i:i + size] for i in range(0, len(pairs), size)]

    def train_epoch(self, corpus: Corpus, epoch: int = 0) -> EpochReport:
        """One pass; the rng is derived from (seed, epoch) so a rerun of the
        same epoch on the same parameters reproduces its losses exactly."""
        cfg = self.cfg
        rng = np.random.default_rng((cfg.seed, epoch))
        order = rng.permutation(len(corpus.pairs))
        total_loss = 0.0
        total_reg = 0.0
        count = 0
        for i, pairs in enumerate(self._batches(corpus, order)):
            self.model.zero_grads()
            report = self.model.loss_on_batch(pairs, mu=cfg.mu,
                                              dropout_rate=cfg.dropout, rng=rng)
            loss_val = report.loss.item()
            if not np.isfinite(loss_val):
                raise FloatingPointError(
                    f"non-finite loss in epoch {epoch} batch {i}: "
                    f"nll={report.nll} reg={report.reg}")
            report.loss.backward()
            grads = clip_global_norm(self.model.grads(), cfg.clip_norm)
            self.optimizer.step(self.model.params(), grads)
            total_loss += loss_val * len(pairs)
            total_reg += report.reg * len(pairs)
            count += len(pairs)
        return EpochReport(epoch=epoch, train_loss=total_loss / count,
                           train_reg=total_reg / count, lr=self.optimizer.lr)

    def evaluate(self, corpus: Corpus) -> float:
        """Mean loss without dropout or gradients."""
        total = 0.0
        count = 0
        with no_grad():
            for pairs in self._batches(corpus, range(len(corpus.pairs))):
                report = self.model.loss_on_batch(pairs, mu=self.cfg.mu)
                total += report.loss.item() * len(pairs)
                count += len(pairs)
        return total / count

    def fit(self, train_corpus: Corpus, val_corpus: Corpus | None = None) -> list[EpochReport]:
        reports = []
        log_path = self.run_dir / "metrics.jsonl" if self.run_dir is not None else None
        for epoch in range(self.cfg.epochs):
            report = self.train_epoch(train_corpus, epoch)
            has_val = val_corpus is not None and len(val_corpus.pairs) > 0
            report.val_loss = self.evaluate(val_corpus) if has_val else report.train_loss
            improved = self.scheduler.step(report.val_loss, self.optimizer)
            report.lr = self.optimizer.lr
            reports.append(report)
            if log_path is not None:
                with open(log_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({
                        "epoch": report.epoch,
                        "train_loss": report.train_loss,
                        "val_loss": report.val_loss,
                        "reg": report.train_reg,
                        "lr": report.lr,
                    }) + "\n")
            if improved and self.run_dir is not None:
                save_checkpoint(self.run_dir / "checkpoint_best.npz", self.model)
        if self.run_dir is not None:
            save_checkpoint(self.run_dir / "checkpoint_final.npz", self.model)
        return reports
