/*
Canvas AffectButton: a continuous 2D facial-expression picker.

Moving the pointer morphs a parametric face (mouth curve from valence, brow
lift from dominance, eye opening from arousal); clicking commits the
position as a VAD judgment. Corner labels follow the emotion layout.
*/

import { FaceParams, Pointer, Vad, pointerToVad, vadToFace } from "./vad.js";

export type AffectButton = {
  getVad: () => Vad;
  setPointer: (x: number, y: number) => void;
  onHover: (cb: (vad: Vad) => void) => void;
  onCommit: (cb: (pointer: Pointer, vad: Vad) => void) => void;
  setEnabled: (on: boolean) => void;
  redraw: () => void;
};

export function createAffectButton(canvas: HTMLCanvasElement): AffectButton {
  const ctx = canvas.getContext("2d")!;
  let pos: Pointer = { x: 0, y: 0 };
  let enabled = true;
  let hoverCb: ((vad: Vad) => void) | null = null;
  let commitCb: ((pointer: Pointer, vad: Vad) => void) | null = null;

  function toPointer(ev: MouseEvent): Pointer {
    const rect = canvas.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * 2 - 1;
    const y = -(((ev.clientY - rect.top) / rect.height) * 2 - 1); // screen y is down
    return { x: Math.max(-1, Math.min(1, x)), y: Math.max(-1, Math.min(1, y)) };
  }

  function drawFace(face: FaceParams) {
    const w = canvas.width;
    const h = canvas.height;
    const cx = w / 2;
    const cy = h / 2;
    const r = Math.min(w, h) * 0.32;
    ctx.clearRect(0, 0, w, h);

    ctx.fillStyle = enabled ? "#fbf3d8" : "#eeeeee";
    ctx.strokeStyle = "#444";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(cx, cy, r, 0, Math.PI * 2);
    ctx.fill();
    ctx.stroke();

    // eyes: openness scales the vertical radius
    const eyeDx = r * 0.38;
    const eyeY = cy - r * 0.22;
    const eyeR = r * 0.1;
    const openness = 0.15 + 0.85 * (face.eyeOpenness + 1) / 2;
    for (const sx of [-1, 1]) {
      ctx.beginPath();
      ctx.ellipse(cx + sx * eyeDx, eyeY, eyeR, Math.max(0.5, eyeR * openness), 0, 0, Math.PI * 2);
      ctx.fillStyle = "#222";
      ctx.fill();
    }

    // brows: angle follows dominance
    ctx.strokeStyle = "#222";
    ctx.lineWidth = 3;
    const browY = eyeY - r * 0.22;
    const browLen = r * 0.28;
    const tilt = face.browAngle * 0.5;
    for (const sx of [-1, 1]) {
      ctx.beginPath();
      ctx.moveTo(cx + sx * (eyeDx - browLen / 2), browY + sx * tilt * browLen * 0.5);
      ctx.lineTo(cx + sx * (eyeDx + browLen / 2), browY - sx * tilt * browLen * 0.5);
      ctx.stroke();
    }

    // mouth: quadratic curve, smile up for positive valence
    const mouthY = cy + r * 0.42;
    const mouthW = r * 0.62;
    ctx.beginPath();
    ctx.moveTo(cx - mouthW, mouthY);
    ctx.quadraticCurveTo(cx, mouthY + face.mouthCurve * r * 0.55, cx + mouthW, mouthY);
    ctx.stroke();
  }

  function drawOverlay() {
    const w = canvas.width;
    const h = canvas.height;
    ctx.strokeStyle = "#bbb";
    ctx.lineWidth = 1;
    ctx.strokeRect(1, 1, w - 2, h - 2);
    ctx.fillStyle = "#888";
    ctx.font = "11px sans-serif";
    ctx.textBaseline = "top";
    ctx.textAlign = "left";
    ctx.fillText("anger", 6, 6);
    ctx.textAlign = "right";
    ctx.fillText("joy", w - 6, 6);
    ctx.textBaseline = "bottom";
    ctx.fillText("surprise", w - 6, h - 6);
    ctx.textAlign = "left";
    ctx.fillText("fear", 6, h - 6);

    const px = ((pos.x + 1) / 2) * w;
    const py = ((1 - (pos.y + 1) / 2)) * h;
    ctx.strokeStyle = "#d04040";
    ctx.beginPath();
    ctx.arc(px, py, 6, 0, Math.PI * 2);
    ctx.stroke();
  }

  function redraw() {
    drawFace(vadToFace(pointerToVad(pos.x, pos.y)));
    drawOverlay();
  }

  canvas.addEventListener("mousemove", (ev) => {
    if (!enabled) return;
    pos = toPointer(ev);
    redraw();
    hoverCb?.(pointerToVad(pos.x, pos.y));
  });

  canvas.addEventListener("click", (ev) => {
    if (!enabled) return;
    pos = toPointer(ev);
    redraw();
    commitCb?.(pos, pointerToVad(pos.x, pos.y));
  });

  redraw();
  return {
    getVad: () => pointerToVad(pos.x, pos.y),
    setPointer: (x, y) => {
      pos = { x, y };
      redraw();
    },
    onHover: (cb) => {
      hoverCb = cb;
    },
    onCommit: (cb) => {
      commitCb = cb;
    },
    setEnabled: (on) => {
      enabled = on;
      redraw();
    },
    redraw,
  };
}
