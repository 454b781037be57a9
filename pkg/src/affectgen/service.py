"""Generation engine and the HTTP annotation/generation service."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .annotations import AnnotationStore, compute_gamma_curve, new_record
from .corpus import Vocabulary, load_vocabulary, normalize_and_tokenize
from .decoding import (BeamConfig, RerankWeights, beam_search, score_candidates,
                       select_final)
from .emotions import (ClassifierConfig, EmotionClassifier, EmotionDistribution,
                       VadPrototypeClassifier, VadVector, load_lexicon)
from .model import Seq2SeqModel, load_checkpoint


def resolve_emotion(emotion) -> EmotionDistribution:
    """Emotion names become one-hot vectors; explicit 6-vectors pass through."""
    if isinstance(emotion, str):
        return EmotionDistribution.one_hot(emotion)
    return EmotionDistribution.from_array(emotion)


@dataclass
class GenerationResult:
    response: str
    emotion: EmotionDistribution
    gamma: float
    candidates: list[dict]


@dataclass
class GenerationEngine:
    forward: Seq2SeqModel
    reverse: Seq2SeqModel | None
    vocab: Vocabulary
    classifier: EmotionClassifier
    weights: RerankWeights
    default_beam: int = 10

    @classmethod
    def load(cls, fwd_path, vocab_path, lexicon_path, rev_path=None,
             weights: RerankWeights | None = None, default_beam: int = 10,
             temperature: float = ClassifierConfig.temperature) -> "GenerationEngine":
        lexicon = load_lexicon(lexicon_path)
        return cls(
            forward=load_checkpoint(fwd_path),
            reverse=load_checkpoint(rev_path) if rev_path else None,
            vocab=load_vocabulary(vocab_path),
            classifier=VadPrototypeClassifier(lexicon, ClassifierConfig(temperature)),
            weights=weights or RerankWeights(),
            default_beam=default_beam,
        )

    def generate(self, prompt: str, emotion, gamma: float | None = None,
                 beam_size: int | None = None) -> GenerationResult:
        e0 = resolve_emotion(emotion)
        ids = self.vocab.encode(normalize_and_tokenize(prompt))
        if not ids:
            raise ValueError("prompt tokenized to nothing")
        cfg = BeamConfig(beam_size=beam_size or self.default_beam,
                         max_length=self.forward.config.max_length)
        weights = self.weights if gamma is None else replace(self.weights, gamma=gamma)
        cands = beam_search(self.forward, ids, e0, cfg)
        scored = score_candidates(cands, self.reverse, self.classifier,
                                  self.vocab, ids, e0, weights)
        best = select_final(scored)
        ranked = sorted(scored, key=lambda c: (-c.final_score, len(c.ids), c.ids))
        return GenerationResult(
            response=" ".join(self.vocab.decode(best.response_ids)),
            emotion=e0,
            gamma=weights.gamma,
            candidates=[c.to_record(self.vocab) for c in ranked],
        )


class GenerateBody(BaseModel):
    prompt: str
    emotion: str | list[float]
    gamma: float | None = None
    beam_size: int | None = None


class AnnotationBody(BaseModel):
    id: str | None = None
    prompt: str
    response: str
    target_emotion: str | list[float]
    gamma_used: float
    annotated_vad: list[float]
    delta_e: float | None = None
    timestamp: str | None = None


def create_app(store: AnnotationStore, engine: GenerationEngine | None = None) -> FastAPI:
    app = FastAPI(title="affectgen service")

    @app.get("/health")
    def health():
        return {"status": "ok", "engine_loaded": engine is not None}

    @app.post("/generate")
    def generate(body: GenerateBody):
        if engine is None:
            raise HTTPException(status_code=503, detail="no models loaded")
        try:
            result = engine.generate(body.prompt, body.emotion,
                                     gamma=body.gamma, beam_size=body.beam_size)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "response": result.response,
            "emotion": list(result.emotion.p),
            "gamma": result.gamma,
            "candidates": result.candidates,
        }

    @app.post("/annotations")
    def post_annotation(body: AnnotationBody):
        try:
            vad = VadVector.from_array(body.annotated_vad)
            if not vad.in_unit_cube():
                raise ValueError(f"annotated_vad outside [0,1]^3: {body.annotated_vad}")
            rec = new_record(
                prompt=body.prompt,
                response=body.response,
                target_emotion=resolve_emotion(body.target_emotion),
                gamma_used=body.gamma_used,
                annotated_vad=vad,
                record_id=body.id,
                timestamp=body.timestamp,
                client_delta_e=body.delta_e,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        store.append(rec)
        return {"id": rec.id, "delta_e": rec.delta_e}

    @app.get("/annotations")
    def list_annotations():
        records = store.read_all()
        out = []
        for rec in records:
            out.append({
                "id": rec.id,
                "prompt": rec.prompt,
                "response": rec.response,
                "target_emotion": list(rec.target_emotion.p),
                "gamma_used": rec.gamma_used,
                "annotated_vad": [rec.annotated_vad.v, rec.annotated_vad.a, rec.annotated_vad.d],
                "delta_e": rec.delta_e,
                "timestamp": rec.timestamp,
            })
        return out

    @app.get("/gamma-curve")
    def gamma_curve(emotion: str | None = None, min_norm: float | None = None):
        records = store.read_all()
        if not records:
            raise HTTPException(status_code=404, detail="no annotations recorded")
        curve = compute_gamma_curve(records, emotion=emotion, min_vad_norm=min_norm)
        return curve.to_dict()

    return app


def serve(port: int, fwd_path, rev_path, vocab_path, lexicon_path,
          store_path, ui_dir=None) -> None:
    import uvicorn

    engine = GenerationEngine.load(fwd_path, vocab_path, lexicon_path, rev_path=rev_path)
    app = create_app(AnnotationStore(store_path), engine)
    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host="0.0.0.0", port=port)
