"""Append-only annotation store and the human-in-the-loop gamma curve.

Each record is one AffectButton judgment of a generated response; the mean
annotated-vs-target VAD distance per gamma bin locates the re-ranking weight
that best conveys the requested emotion.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .emotions import EMOTION_VAD_MAP, EmotionDistribution, VadVector

GAMMA_GRID_POINTS = 20
GAMMA_GRID = np.linspace(0.0, 10.0, GAMMA_GRID_POINTS)
GAMMA_GRID.setflags(write=False)

DELTA_E_TOL = 1e-6


def delta_e(annotated: VadVector, target_emotion: EmotionDistribution) -> float:
    """Distance between the face the annotator picked and the requested
    emotion's VAD point."""
    target = EMOTION_VAD_MAP @ target_emotion.as_array()
    return float(np.linalg.norm(annotated.as_array() - target))


@dataclass(frozen=True)
class AnnotationRecord:
    id: str
    prompt: str
    response: str
    target_emotion: EmotionDistribution
    gamma_used: float
    annotated_vad: VadVector
    delta_e: float
    timestamp: str

    def __post_init__(self):
        if not self.annotated_vad.in_unit_cube():
            raise ValueError(f"annotated VAD outside [0,1]^3: {self.annotated_vad}")
        expected = delta_e(self.annotated_vad, self.target_emotion)
        if abs(self.delta_e - expected) > DELTA_E_TOL:
            raise ValueError(f"delta_e {self.delta_e} inconsistent with VAD distance {expected}")

    def to_json(self) -> str:
        d = asdict(self)
        d["target_emotion"] = list(self.target_emotion.p)
        d["annotated_vad"] = [self.annotated_vad.v, self.annotated_vad.a, self.annotated_vad.d]
        return json.dumps(d)

    @classmethod
    def from_json(cls, line: str) -> "AnnotationRecord":
        d = json.loads(line)
        d["target_emotion"] = EmotionDistribution.from_array(d["target_emotion"])
        d["annotated_vad"] = VadVector.from_array(d["annotated_vad"])
        return cls(**d)


def new_record(prompt: str, response: str, target_emotion: EmotionDistribution,
               gamma_used: float, annotated_vad: VadVector,
               record_id: str | None = None, timestamp: str | None = None,
               client_delta_e: float | None = None) -> AnnotationRecord:
    """Build a validated record; the server recomputes delta_e and rejects a
    client-supplied value off by more than 1e-6."""
    expected = delta_e(annotated_vad, target_emotion)
    if client_delta_e is not None and abs(client_delta_e - expected) > DELTA_E_TOL:
        raise ValueError(f"client delta_e {client_delta_e} != server value {expected}")
    return AnnotationRecord(
        id=record_id or uuid.uuid4().hex,
        prompt=prompt,
        response=response,
        target_emotion=target_emotion,
        gamma_used=float(gamma_used),
        annotated_vad=annotated_vad,
        delta_e=expected,
        timestamp=timestamp or datetime.now(timezone.utc).isoformat(),
    )


class AnnotationStore:
    """Line-delimited JSON records, append-only; a single lock serializes
    writers so concurrent service handlers stay crash-safe."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, rec: AnnotationRecord) -> str:
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(rec.to_json() + "\n")
                fh.flush()
        return rec.id

    def read_all(self) -> list[AnnotationRecord]:
        if not self.path.exists():
            return []
        records = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(AnnotationRecord.from_json(line))
        return records


@dataclass
class GammaCurve:
    """Mean annotated emotion error per gamma grid point."""

    grid: np.ndarray = field(default_factory=lambda: GAMMA_GRID.copy())
    mean_delta_e: list[float | None] = field(default_factory=lambda: [None] * GAMMA_GRID_POINTS)
    counts: list[int] = field(default_factory=lambda: [0] * GAMMA_GRID_POINTS)

    def to_dict(self) -> dict:
        return {"grid": self.grid.tolist(), "mean_delta_e": self.mean_delta_e,
                "counts": self.counts}


def snap_to_grid(gamma: float) -> int:
    return int(np.argmin(np.abs(GAMMA_GRID - gamma)))


def compute_gamma_curve(records: list[AnnotationRecord],
                        emotion: str | None = None,
                        min_vad_norm: float | None = None) -> GammaCurve:
    """Group records by nearest grid gamma and average delta_e per bin.

    emotion filters to records whose target argmax matches; min_vad_norm
    drops weakly-expressive annotations (threshold scale is caller-defined).
    """
    if not records:
        raise ValueError("no annotations recorded")
    sums = np.zeros(GAMMA_GRID_POINTS)
    counts = np.zeros(GAMMA_GRID_POINTS, dtype=int)
    for rec in records:
        if emotion is not None and rec.target_emotion.argmax() != emotion:
            continue
        if min_vad_norm is not None:
            if np.linalg.norm(rec.annotated_vad.as_array()) <= min_vad_norm:
                continue
        b = snap_to_grid(rec.gamma_used)
        sums[b] += rec.delta_e
        counts[b] += 1
    curve = GammaCurve()
    curve.counts = counts.tolist()
    curve.mean_delta_e = [float(sums[i] / counts[i]) if counts[i] else None
                          for i in range(GAMMA_GRID_POINTS)]
    return curve


def fit_gamma_opt(curve: GammaCurve) -> float:
    """Grid gamma with the minimal mean delta_e; ties take the smaller gamma."""
    best_gamma: float | None = None
    best_mean = np.inf
    for g, m in zip(curve.grid, curve.mean_delta_e):
        if m is not None and m < best_mean:
            best_mean = m
            best_gamma = float(g)
    if best_gamma is None:
        raise ValueError("gamma curve has no populated bins")
    return best_gamma


class GammaScheduler:
    """Round-robin over the grid so desk-scale studies fill every bin."""

    def __init__(self, start: int = 0):
        self._next = start % GAMMA_GRID_POINTS
        self._lock = threading.Lock()

    def next_gamma(self) -> float:
        with self._lock:
            g = float(GAMMA_GRID[self._next])
            self._next = (self._next + 1) % GAMMA_GRID_POINTS
        return g
