/*
Annotation flow: one AffectButton click becomes exactly one POST.

The session owns the pending response being judged; a click maps the pointer
to VAD, computes delta_e client-side (the server recomputes and must agree
within 1e-6) and submits. Re-entrant clicks while a submit is in flight, or
after the judgment is recorded, are ignored.
*/

import { AnnotationBody, ApiClient, annotationFromClick } from "./api.js";
import { deltaE, pointerToVad } from "./vad.js";

export type PendingJudgment = {
  prompt: string;
  response: string;
  targetEmotion: number[];
  gamma: number;
};

export class AnnotationSession {
  private pending: PendingJudgment | null = null;
  private inFlight = false;

  constructor(private api: ApiClient,
              private onRecorded?: (id: string, deltaE: number) => void) {}

  /** Arm the session with the response the user is about to judge. */
  present(judgment: PendingJudgment): void {
    this.pending = judgment;
    this.inFlight = false;
  }

  get armed(): boolean {
    return this.pending !== null && !this.inFlight;
  }

  buildBody(x: number, y: number): AnnotationBody {
    if (this.pending === null) {
      throw new Error("no response is pending annotation");
    }
    const vad = pointerToVad(x, y);
    const delta = deltaE(vad, this.pending.targetEmotion);
    return annotationFromClick(vad, this.pending, delta);
  }

  /** Handle one click on the button face; resolves to the stored id or null
      when the click was ignored (nothing pending / already submitting). */
  async click(x: number, y: number): Promise<string | null> {
    if (!this.armed) {
      return null;
    }
    const body = this.buildBody(x, y);
    this.inFlight = true;
    try {
      const ack = await this.api.submitAnnotation(body);
      this.pending = null;
      this.onRecorded?.(ack.id, ack.delta_e);
      return ack.id;
    } finally {
      this.inFlight = false;
    }
  }
}
