/* Typed client for the generation/annotation service. */

import { Vad } from "./vad.js";

export type CandidateRecord = {
  ids: number[];
  text?: string;
  fwd_logprob: number;
  rev_logprob: number | null;
  length: number;
  emotion_distance: number | null;
  final_score: number | null;
  emotion?: number[];
};

export type GenerateResponse = {
  response: string;
  emotion: number[];
  gamma: number;
  candidates: CandidateRecord[];
};

export type AnnotationBody = {
  prompt: string;
  response: string;
  target_emotion: number[];
  gamma_used: number;
  annotated_vad: [number, number, number];
  delta_e: number;
};

export type GammaCurve = {
  grid: number[];
  mean_delta_e: (number | null)[];
  counts: number[];
};

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) {
      throw new Error(`${path} failed (${res.status}): ${await res.text()}`);
    }
    return (await res.json()) as T;
  }

  async generate(prompt: string, emotion: number[] | string, gamma?: number,
                 beamSize?: number): Promise<GenerateResponse> {
    return this.post("/generate", {
      prompt,
      emotion,
      gamma: gamma ?? null,
      beam_size: beamSize ?? null,
    });
  }

  async submitAnnotation(body: AnnotationBody): Promise<{ id: string; delta_e: number }> {
    return this.post("/annotations", body);
  }

  async gammaCurve(emotion?: string): Promise<GammaCurve> {
    const query = emotion ? `?emotion=${encodeURIComponent(emotion)}` : "";
    const res = await this.fetchImpl(`${this.baseUrl}/gamma-curve${query}`);
    if (!res.ok) {
      throw new Error(`/gamma-curve failed (${res.status})`);
    }
    return (await res.json()) as GammaCurve;
  }
}

export function annotationFromClick(
  pointerVad: Vad,
  ctx: { prompt: string; response: string; targetEmotion: number[]; gamma: number },
  delta: number,
): AnnotationBody {
  return {
    prompt: ctx.prompt,
    response: ctx.response,
    target_emotion: ctx.targetEmotion,
    gamma_used: ctx.gamma,
    annotated_vad: [pointerVad.v, pointerVad.a, pointerVad.d],
    delta_e: delta,
  };
}
