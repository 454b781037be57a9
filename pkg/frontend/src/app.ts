/*
App wiring: emotion-steered chat with a re-rank audit table, plus the
annotation loop feeding the gamma curve.

Annotate mode assigns gamma round-robin over the 20-point grid (instead of
the request default) so a desk-scale study fills every bin.
*/

import { createAffectButton } from "./affectButton.js";
import { AnnotationSession } from "./annotation.js";
import { ApiClient, CandidateRecord, GammaCurve } from "./api.js";
import { EMOTIONS, EmotionName, GAMMA_GRID, oneHot } from "./vad.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function renderCandidates(tbody: HTMLElement, candidates: CandidateRecord[]) {
  tbody.innerHTML = "";
  for (const c of candidates) {
    const row = document.createElement("tr");
    const cells = [
      c.text ?? c.ids.join(" "),
      c.fwd_logprob.toFixed(3),
      c.rev_logprob === null ? "-" : Number(c.rev_logprob).toFixed(3),
      String(c.length),
      c.emotion_distance === null ? "-" : Number(c.emotion_distance).toFixed(3),
      c.final_score === null ? "-" : Number(c.final_score).toFixed(3),
    ];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      row.appendChild(td);
    }
    tbody.appendChild(row);
  }
}

function renderCurve(canvas: HTMLCanvasElement, curve: GammaCurve) {
  const ctx = canvas.getContext("2d")!;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);
  const means = curve.mean_delta_e
    .map((m, i) => ({ m, g: curve.grid[i], n: curve.counts[i] }))
    .filter((p) => p.m !== null) as { m: number; g: number; n: number }[];
  if (!means.length) return;
  const maxM = Math.max(...means.map((p) => p.m), 0.01);
  ctx.fillStyle = "#2a6fb0";
  for (const p of means) {
    const x = (p.g / 10) * (w - 20) + 10;
    const y = h - 12 - (p.m / maxM) * (h - 24);
    ctx.beginPath();
    ctx.arc(x, y, 2 + Math.min(6, Math.sqrt(p.n)), 0, Math.PI * 2);
    ctx.fill();
  }
  const best = means.reduce((a, b) => (b.m < a.m ? b : a));
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  ctx.fillText(`gamma_opt = ${best.g.toFixed(2)}`, 10, 14);
}

export function startApp() {
  const api = new ApiClient("");
  const promptBox = el<HTMLInputElement>("prompt");
  const emotionSelect = el<HTMLSelectElement>("emotion");
  const annotateMode = el<HTMLInputElement>("annotate-mode");
  const generateBtn = el<HTMLButtonElement>("generate");
  const responseOut = el<HTMLElement>("response");
  const statusOut = el<HTMLElement>("status");
  const candidatesBody = el<HTMLElement>("candidates");
  const curveCanvas = el<HTMLCanvasElement>("curve");
  const buttonCanvas = el<HTMLCanvasElement>("affectbutton");

  for (const name of EMOTIONS) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    emotionSelect.appendChild(opt);
  }

  const widget = createAffectButton(buttonCanvas);
  widget.setEnabled(false);

  let gammaCursor = 0;
  const session = new AnnotationSession(api, (_id, delta) => {
    statusOut.textContent = `annotation recorded (dE = ${delta.toFixed(3)}); thanks!`;
    widget.setEnabled(false);
    void refreshCurve();
  });

  widget.onCommit((pos) => {
    void session.click(pos.x, pos.y).catch((err) => {
      statusOut.textContent = String(err);
    });
  });

  async function refreshCurve() {
    try {
      renderCurve(curveCanvas, await api.gammaCurve());
    } catch {
      // no annotations yet
    }
  }

  generateBtn.addEventListener("click", () => {
    void (async () => {
      const emotion = emotionSelect.value as EmotionName;
      const target = oneHot(emotion);
      const gamma = annotateMode.checked
        ? GAMMA_GRID[gammaCursor++ % GAMMA_GRID.length]
        : undefined;
      statusOut.textContent = "generating...";
      try {
        const result = await api.generate(promptBox.value, target, gamma);
        responseOut.textContent = result.response;
        renderCandidates(candidatesBody, result.candidates);
        if (annotateMode.checked) {
          session.present({
            prompt: promptBox.value,
            response: result.response,
            targetEmotion: target,
            gamma: result.gamma,
          });
          widget.setEnabled(true);
          statusOut.textContent =
            `gamma=${result.gamma.toFixed(2)}: click the face matching the response's emotion`;
        } else {
          statusOut.textContent = `gamma=${result.gamma.toFixed(2)}`;
        }
      } catch (err) {
        statusOut.textContent = String(err);
      }
    })();
  });

  void refreshCurve();
}

startApp();
