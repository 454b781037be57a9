"""Emotion-conditioned GRU seq2seq.

One model class covers all variants through four flags:
  see - emotion embedding prepended to the encoder input,
  sed - emotion embedding concatenated to every decoder input,
  wi  - affective regularizer added to the NLL,
  we  - adaptive affective sampling mixture as the output distribution.

Encoder: two stacked bidirectional GRU layers; the concatenated final
forward/backward states of the top layer seed the single-layer decoder,
whose hidden size is therefore twice the encoder's.  The decoder input is
always embed_dim + 3 wide; the 3 emotion slots are zero when sed is off, so
parameter shapes do not depend on the variant flags.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import corpus as corpus_mod
from .affect_ops import softmax_np, v_scores, we_mixture
from .autodiff import (Tensor, add, add_many, concat, dropout, gather_rows,
                       l2norm_rows, log, matmul, mul, no_grad, parameter,
                       pick, sigmoid, softmax, sub, tsum)
from .corpus import EOS, PAD, SOS, DialogPair
from .emotions import EMOTION_VAD_MAP, EMOTIONS, EmotionDistribution
from .nn import GruParams, LinearParams, gru_cell_forward, gru_unroll, uniform_init

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class ModelVariant:
    see: bool = False
    sed: bool = False
    wi: bool = False
    we: bool = False

    NAMES = ("baseline", "see", "sed", "wi", "we", "wi+we")

    @classmethod
    def parse(cls, name: str) -> "ModelVariant":
        flags = {n: False for n in ("see", "sed", "wi", "we")}
        if name != "baseline":
            for part in name.split("+"):
                if part not in flags:
                    raise ValueError(f"unknown variant {name!r}; expected one of {cls.NAMES}")
                flags[part] = True
        return cls(**flags)

    @property
    def name(self) -> str:
        parts = [n for n in ("see", "sed", "wi", "we") if getattr(self, n)]
        return "+".join(parts) if parts else "baseline"


@dataclass
class ModelConfig:
    vocab_size: int
    embed_dim: int = 300
    hidden_dim: int = 256  # per encoder direction; decoder hidden is doubled
    max_length: int = 20
    variant: ModelVariant = field(default_factory=ModelVariant)
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = asdict(self.variant)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["variant"] = ModelVariant(**d["variant"])
        return cls(**d)


def nll_loss(step_probs, targets) -> float:
    """Mean over time of -log p(target_t); probabilities floored at 1e-12."""
    probs = [np.asarray(p) for p in step_probs]
    if len(probs) != len(targets):
        raise ValueError("one probability row per target required")
    total = 0.0
    for p, t in zip(probs, targets):
        total += -np.log(max(p[t], PROB_FLOOR))
    return total / len(targets)


@dataclass
class Batch:
    prompts: np.ndarray       # (B, Tp) ids
    prompt_mask: np.ndarray   # (B, Tp) 0/1
    dec_inputs: np.ndarray    # (B, Td) ids: SOS then gold tokens
    predict: np.ndarray       # (B, Td) ids: gold tokens then EOS
    loss_mask: np.ndarray     # (B, Td) 1 on real tokens and the EOS step
    resp_mask: np.ndarray     # (B, Td) 1 on real tokens only
    resp_lengths: np.ndarray  # (B,)
    responses: np.ndarray     # (B, Tr) ids padded
    e0: np.ndarray            # (B, 6)


def make_batch(pairs: list[DialogPair], max_length: int) -> Batch:
    if not pairs:
        raise ValueError("empty batch")
    for p in pairs:
        if len(p.prompt) > max_length or len(p.response) > max_length:
            raise ValueError("pair exceeds max_length")
    bsz = len(pairs)
    tp = max(len(p.prompt) for p in pairs)
    tr = max(len(p.response) for p in pairs)
    td = tr + 1  # one extra step to predict EOS
    prompts = np.full((bsz, tp), PAD, dtype=np.int64)
    prompt_mask = np.zeros((bsz, tp))
    dec_inputs = np.full((bsz, td), PAD, dtype=np.int64)
    predict = np.full((bsz, td), PAD, dtype=np.int64)
    loss_mask = np.zeros((bsz, td))
    resp_mask = np.zeros((bsz, td))
    responses = np.full((bsz, tr), PAD, dtype=np.int64)
    e0 = np.zeros((bsz, len(EMOTIONS)))
    lengths = np.zeros(bsz, dtype=np.int64)
    for i, pair in enumerate(pairs):
        lp, lr = len(pair.prompt), len(pair.response)
        prompts[i, :lp] = pair.prompt
        prompt_mask[i, :lp] = 1.0
        responses[i, :lr] = pair.response
        dec_inputs[i, 0] = SOS
        dec_inputs[i, 1:lr + 1] = pair.response
        predict[i, :lr] = pair.response
        predict[i, lr] = EOS
        loss_mask[i, :lr + 1] = 1.0
        resp_mask[i, :lr] = 1.0
        lengths[i] = lr
        e0[i] = pair.target_emotion.as_array()
    return Batch(prompts=prompts, prompt_mask=prompt_mask, dec_inputs=dec_inputs,
                 predict=predict, loss_mask=loss_mask, resp_mask=resp_mask,
                 resp_lengths=lengths, responses=responses, e0=e0)


@dataclass
class DecodeState:
    """Per-hypothesis decoding state: hidden before consuming prev_id, the
    remaining emotion budget, and the number of emitted tokens."""

    h: np.ndarray
    prev_id: int
    e_t: np.ndarray
    emitted: int


@dataclass
class LossReport:
    loss: Tensor
    nll: float
    reg: float


class Seq2SeqModel:
    def __init__(self, config: ModelConfig, vad_matrix: np.ndarray | None = None):
        self.config = config
        self.vad_matrix = None if vad_matrix is None else np.asarray(vad_matrix, dtype=np.float64)
        v, e, h = config.vocab_size, config.embed_dim, config.hidden_dim
        rng = np.random.default_rng(config.seed)
        self.embedding = uniform_init(rng, (v, e), 1.0 / np.sqrt(e))
        self.enc1f = GruParams.init(rng, e, h)
        self.enc1b = GruParams.init(rng, e, h)
        self.enc2f = GruParams.init(rng, 2 * h, h)
        self.enc2b = GruParams.init(rng, 2 * h, h)
        self.dec = GruParams.init(rng, e + 3, 2 * h)
        self.out = LinearParams.init(rng, 2 * h, v)
        self.a_see = uniform_init(rng, (len(EMOTIONS), 3), 0.5)
        self.see_proj = uniform_init(rng, (3, e), 1.0 / np.sqrt(3))
        self.a_sed = uniform_init(rng, (len(EMOTIONS), 3), 0.5)
        self.we_lambda = parameter(np.array(0.0))

    def params(self) -> dict[str, Tensor]:
        named: dict[str, Tensor] = {"embedding": self.embedding}
        named.update(self.enc1f.named("enc1f"))
        named.update(self.enc1b.named("enc1b"))
        named.update(self.enc2f.named("enc2f"))
        named.update(self.enc2b.named("enc2b"))
        named.update(self.dec.named("dec"))
        named.update(self.out.named("out"))
        named["a_see"] = self.a_see
        named["see_proj"] = self.see_proj
        named["a_sed"] = self.a_sed
        named["we_lambda"] = self.we_lambda
        return named

    def zero_grads(self) -> None:
        for p in self.params().values():
            p.zero_grad()

    def grads(self) -> dict[str, np.ndarray]:
        return {name: p.grad for name, p in self.params().items() if p.grad is not None}

    # -- emotion embeddings ------------------------------------------------

    def see_prefix(self, e0: np.ndarray) -> Tensor:
        """Encoder-side emotion embedding, projected to embedding width."""
        return matmul(matmul(Tensor(np.atleast_2d(e0)), self.a_see), self.see_proj)

    def sed_vector(self, e0: np.ndarray) -> Tensor:
        """Decoder-side emotion embedding (3 wide), zeros when sed is off."""
        e0 = np.atleast_2d(e0)
        if self.config.variant.sed:
            return matmul(Tensor(e0), self.a_sed)
        return Tensor(np.zeros((e0.shape[0], 3)))

    # -- encoder -----------------------------------------------------------

    def encode(self, prompts: np.ndarray, prompt_mask: np.ndarray, e0: np.ndarray,
               dropout_rate: float = 0.0, rng: np.random.Generator | None = None) -> Tensor:
        """Batched encoder; returns the decoder's initial hidden state (B, 2H)."""
        prompts = np.atleast_2d(prompts)
        if prompts.shape[1] == 0:
            raise ValueError("cannot encode an empty input sequence")
        bsz = prompts.shape[0]
        h = self.config.hidden_dim

        steps = [gather_rows(self.embedding, prompts[:, t]) for t in range(prompts.shape[1])]
        mask = np.asarray(prompt_mask, dtype=np.float64)
        if self.config.variant.see:
            steps.insert(0, self.see_prefix(e0))
            mask = np.concatenate([np.ones((bsz, 1)), mask], axis=1)
        if dropout_rate > 0.0:
            steps = [dropout(x, dropout_rate, rng) for x in steps]
        umask = None if mask.all() else mask
        rmask = None if umask is None else umask[:, ::-1]

        h0 = Tensor(np.zeros((bsz, h)))
        f1, _ = gru_unroll(self.enc1f, steps, h0, umask)
        b1_rev, _ = gru_unroll(self.enc1b, steps[::-1], h0, rmask)
        b1 = b1_rev[::-1]
        layer2 = [concat([f, b], axis=-1) for f, b in zip(f1, b1)]
        if dropout_rate > 0.0:
            layer2 = [dropout(x, dropout_rate, rng) for x in layer2]
        h0_2 = Tensor(np.zeros((bsz, h)))
        _, f2_last = gru_unroll(self.enc2f, layer2, h0_2, umask)
        _, b2_last = gru_unroll(self.enc2b, layer2[::-1], h0_2, rmask)
        return concat([f2_last, b2_last], axis=-1)

    # -- decoder -----------------------------------------------------------

    def decode_step(self, x: Tensor, h_prev: Tensor) -> tuple[Tensor, Tensor]:
        """One GRU step plus the output projection; logits are unnormalized."""
        h = gru_cell_forward(self.dec, x, h_prev)
        return h, self.out(h)

    def _we_step_constants(self, batch: Batch) -> np.ndarray:
        """Per-step softmax(v(E_t)) rows for teacher forcing: (Td, B, V)."""
        if self.vad_matrix is None:
            raise ValueError("WE variant requires a vocabulary VAD matrix")
        td, bsz = batch.dec_inputs.shape[1], batch.dec_inputs.shape[0]
        out = np.zeros((td, bsz, self.config.vocab_size))
        for i in range(bsz):
            length = batch.resp_lengths[i]
            vads = self.vad_matrix[batch.responses[i, :length]]
            goal = vads.sum(axis=0) if length else np.zeros(3)
            e_t = goal.copy()
            for t in range(td):
                out[t, i] = softmax_np(v_scores(e_t, self.vad_matrix))
                if t < length:
                    e_t = e_t - vads[t]
        return out

    def loss_on_batch(self, pairs: list[DialogPair], mu: float = 0.1,
                      dropout_rate: float = 0.0,
                      rng: np.random.Generator | None = None) -> LossReport:
        """Teacher-forced loss: per-sequence token-mean NLL averaged over the
        batch, plus mu times the batch-mean affective regularizer when wi."""
        variant = self.config.variant
        batch = make_batch(pairs, self.config.max_length)
        bsz, td = batch.dec_inputs.shape

        h = self.encode(batch.prompts, batch.prompt_mask, batch.e0, dropout_rate, rng)
        sed_vec = self.sed_vector(batch.e0)
        if variant.we:
            v_probs = self._we_step_constants(batch)
            lam = sigmoid(self.we_lambda)
            one_minus_lam = sub(1.0, lam)
        vad_const = Tensor(self.vad_matrix) if variant.wi else None

        logps: list[Tensor] = []
        expected_vads: list[Tensor] = []
        half = self.config.max_length // 2
        for t in range(td):
            prev_emb = gather_rows(self.embedding, batch.dec_inputs[:, t])
            if dropout_rate > 0.0:
                prev_emb = dropout(prev_emb, dropout_rate, rng)
            x = concat([prev_emb, sed_vec], axis=-1)
            h, logits = self.decode_step(x, h)
            lm_probs = softmax(logits)
            if variant.we and t < half:
                probs = add(mul(lm_probs, lam), mul(Tensor(v_probs[t]), one_minus_lam))
            else:
                probs = lm_probs
            picked = pick(probs, batch.predict[:, t])
            logps.append(mul(log(picked, floor=PROB_FLOOR), Tensor(batch.loss_mask[:, t])))
            if variant.wi:
                expected_vads.append(mul(matmul(probs, vad_const),
                                         Tensor(batch.resp_mask[:, t:t + 1])))

        per_seq_nll = mul(add_many(logps), Tensor(-1.0 / (batch.resp_lengths + 1.0)))
        nll = mul(tsum(per_seq_nll), 1.0 / bsz)

        if variant.wi:
            inv_len = 1.0 / batch.resp_lengths.astype(np.float64)
            gen_mean = mul(add_many(expected_vads), Tensor(inv_len[:, None]))
            tgt_mean = np.zeros((bsz, 3))
            for i in range(bsz):
                length = batch.resp_lengths[i]
                tgt_mean[i] = self.vad_matrix[batch.responses[i, :length]].mean(axis=0)
            reg_vec = l2norm_rows(sub(gen_mean, Tensor(tgt_mean)))
            reg = mul(tsum(reg_vec), 1.0 / bsz)
            loss = add(nll, mul(reg, mu))
            return LossReport(loss=loss, nll=nll.item(), reg=reg.item())
        return LossReport(loss=nll, nll=nll.item(), reg=0.0)

    # -- step-wise decoding (inference) --------------------------------------

    def lambda_value(self) -> float:
        return float(1.0 / (1.0 + np.exp(-self.we_lambda.data)))

    def start_decode(self, prompt_ids, e0: EmotionDistribution) -> DecodeState:
        prompt = np.asarray([list(prompt_ids)], dtype=np.int64)
        with no_grad():
            summary = self.encode(prompt, np.ones_like(prompt, dtype=np.float64),
                                  e0.as_array()[None, :])
        goal = (EMOTION_VAD_MAP @ e0.as_array()) * self.config.max_length
        return DecodeState(h=summary.data, prev_id=SOS, e_t=goal, emitted=0)

    def next_distribution(self, state: DecodeState, e0: EmotionDistribution) -> tuple[np.ndarray, np.ndarray]:
        """Next-token probabilities and the post-step hidden state."""
        with no_grad():
            prev_emb = gather_rows(self.embedding, np.array([state.prev_id]))
            x = concat([prev_emb, self.sed_vector(e0.as_array()[None, :])], axis=-1)
            h, logits = self.decode_step(x, Tensor(state.h))
        row = logits.data[0]
        if self.config.variant.we:
            lam = 1.0 if state.emitted >= self.config.max_length // 2 else self.lambda_value()
            probs = we_mixture(row, state.e_t, self.vad_matrix, lam)
        else:
            probs = softmax_np(row)
        return probs, h.data

    def advance(self, state: DecodeState, token: int, h_next: np.ndarray) -> DecodeState:
        e_t = state.e_t
        if self.vad_matrix is not None:
            e_t = e_t - self.vad_matrix[token]
        return DecodeState(h=h_next, prev_id=int(token), e_t=e_t, emitted=state.emitted + 1)

    def sequence_logprob(self, prompt_ids, target_ids, e0: EmotionDistribution) -> float:
        """Teacher-forced log p(target, EOS | prompt, e0); unnormalized sum."""
        state = self.start_decode(prompt_ids, e0)
        total = 0.0
        for tok in list(target_ids) + [EOS]:
            probs, h_next = self.next_distribution(state, e0)
            total += float(np.log(max(probs[tok], PROB_FLOOR)))
            state = self.advance(state, tok, h_next)
        return total


# -- checkpoints -------------------------------------------------------------

CHECKPOINT_FORMAT_VERSION = 1


def save_checkpoint(path, model: Seq2SeqModel) -> None:
    """Self-describing little-endian container: JSON meta + named tensors."""
    meta = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "has_vad_matrix": model.vad_matrix is not None,
    }
    arrays = {f"param:{name}": p.data.astype("<f8")  # keeps 0-d shapes intact
              for name, p in model.params().items()}
    if model.vad_matrix is not None:
        arrays["vad_matrix"] = model.vad_matrix.astype("<f8")
    arrays["__meta__"] = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
    np.savez(path, **arrays)


def load_checkpoint(path) -> Seq2SeqModel:
    with np.load(path) as npz:
        meta = json.loads(bytes(npz["__meta__"]).decode("utf-8"))
        if meta["format_version"] != CHECKPOINT_FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format {meta['format_version']}")
        config = ModelConfig.from_dict(meta["config"])
        vad = np.asarray(npz["vad_matrix"], dtype=np.float64) if meta["has_vad_matrix"] else None
        model = Seq2SeqModel(config, vad_matrix=vad)
        for name, p in model.params().items():
            key = f"param:{name}"
            if key not in npz:
                raise ValueError(f"checkpoint missing parameter {name}")
            stored = np.asarray(npz[key], dtype=np.float64)
            if stored.shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}: {stored.shape} vs {p.data.shape}")
            p.data = stored
    return model


def detokenize(vocab: corpus_mod.Vocabulary, ids) -> str:
    return " ".join(vocab.decode(ids))
