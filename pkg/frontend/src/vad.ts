/*
Affect math shared by the widget and the annotation flow.

The button's pointer space is [-1,1]^2 with y pointing up. Valence grows
left to right, dominance bottom to top, and arousal with distance from the
center, so the four corners land exactly on the VAD points of joy
(upper right), anger (upper left), surprise (lower right) and fear
(lower left).
*/

export type Vad = { v: number; a: number; d: number };
export type Pointer = { x: number; y: number };
export type FaceParams = { mouthCurve: number; browAngle: number; eyeOpenness: number };

export const EMOTIONS = ["anger", "surprise", "joy", "sadness", "fear", "disgust"] as const;
export type EmotionName = (typeof EMOTIONS)[number];

/** Columns of the emotion-to-VAD matrix, in EMOTIONS order. */
export const EMOTION_VAD: Record<EmotionName, Vad> = {
  anger: { v: 0, a: 1, d: 1 },
  surprise: { v: 1, a: 1, d: 0 },
  joy: { v: 1, a: 1, d: 1 },
  sadness: { v: 0, a: 0, d: 0 },
  fear: { v: 0, a: 1, d: 0 },
  disgust: { v: 0, a: 0.5, d: 0.5 },
};

/** Pointer corners, mirroring EMOTION_VAD for the four corner emotions. */
export const CORNER_EMOTIONS: Record<string, EmotionName> = {
  "1,1": "joy",
  "-1,1": "anger",
  "1,-1": "surprise",
  "-1,-1": "fear",
};

function clamp(x: number, lo: number, hi: number): number {
  return Math.max(lo, Math.min(hi, x));
}

/** Map a pointer position to VAD; out-of-range coordinates are clamped. */
export function pointerToVad(x: number, y: number): Vad {
  const cx = clamp(x, -1, 1);
  const cy = clamp(y, -1, 1);
  return {
    v: (cx + 1) / 2,
    a: Math.min(1, Math.sqrt(cx * cx + cy * cy)),
    d: (cy + 1) / 2,
  };
}

/** Inverse-ish mapping used to seed the widget from a VAD point. */
export function vadToPointer(vad: Vad): Pointer {
  return { x: 2 * vad.v - 1, y: 2 * vad.d - 1 };
}

/** Continuous face parameters: smile, brow lift, and eye opening. */
export function vadToFace(vad: Vad): FaceParams {
  return {
    mouthCurve: 2 * vad.v - 1,
    browAngle: 2 * vad.d - 1,
    eyeOpenness: 2 * vad.a - 1,
  };
}

/** One-hot distribution over the six emotions. */
export function oneHot(name: EmotionName): number[] {
  return EMOTIONS.map((e) => (e === name ? 1 : 0));
}

/** VAD point of an emotion distribution (matrix-vector product). */
export function distributionToVad(p: number[]): Vad {
  let v = 0;
  let a = 0;
  let d = 0;
  EMOTIONS.forEach((name, i) => {
    v += EMOTION_VAD[name].v * p[i];
    a += EMOTION_VAD[name].a * p[i];
    d += EMOTION_VAD[name].d * p[i];
  });
  return { v, a, d };
}

/** Distance between an annotated face and the requested emotion. */
export function deltaE(annotated: Vad, targetEmotion: number[]): number {
  const t = distributionToVad(targetEmotion);
  const dv = annotated.v - t.v;
  const da = annotated.a - t.a;
  const dd = annotated.d - t.d;
  return Math.sqrt(dv * dv + da * da + dd * dd);
}

/** The 20-point gamma grid the study samples, uniform on [0,10]. */
export const GAMMA_GRID: number[] = Array.from({ length: 20 }, (_, i) => (10 * i) / 19);
