"""Affect-controlled dialog generation toolkit."""

from .emotions import (EMOTION_VAD_MAP, EMOTIONS, ClassifierConfig,
                       EmotionDistribution, VadLexicon, VadPrototypeClassifier,
                       VadVector, emotion_to_vad, string_similarity, vad_distance)
from .model import ModelConfig, ModelVariant, Seq2SeqModel, load_checkpoint, save_checkpoint
from .decoding import BeamConfig, Candidate, RerankWeights, beam_search, score_candidates, select_final
from .training import TrainConfig, Trainer

__all__ = [
    "EMOTIONS", "EMOTION_VAD_MAP", "ClassifierConfig", "EmotionDistribution",
    "VadLexicon", "VadPrototypeClassifier", "VadVector", "emotion_to_vad",
    "string_similarity", "vad_distance",
    "ModelConfig", "ModelVariant", "Seq2SeqModel", "load_checkpoint", "save_checkpoint",
    "BeamConfig", "Candidate", "RerankWeights", "beam_search", "score_candidates", "select_final",
    "TrainConfig", "Trainer",
]
