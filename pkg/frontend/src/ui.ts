/**
 * HTML renderers for the console.
 *
 * Pure string-in, string-out functions so they are testable without a
 * browser; main.ts assigns the output to innerHTML and wires events by
 * delegation.  All server-provided text passes through escapeHtml.
 */

import { ActiveCandidate, Turn, ViewState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Confidence meter: [-1, 1] maps linearly onto the bar, so the fill is
 * (cl + 1) / 2 of the width and the threshold tick sits at
 * (threshold + 1) / 2.
 */
export function renderMeter(confidence: number, threshold: number): string {
  const clamped = Math.max(-1, Math.min(1, confidence));
  const fill = ((clamped + 1) / 2) * 100;
  const tick = ((Math.max(-1, Math.min(1, threshold)) + 1) / 2) * 100;
  return (
    `<span class="meter" title="confidence ${confidence.toFixed(3)}">` +
    `<span class="meter-fill" style="width:${fill.toFixed(1)}%"></span>` +
    `<span class="meter-tick" style="left:${tick.toFixed(1)}%"></span>` +
    `</span>`
  );
}

export function renderTurn(turn: Turn, threshold: number): string {
  switch (turn.kind) {
    case "user":
      return `<div class="turn user">${escapeHtml(turn.text)}</div>`;
    case "answer": {
      const meter =
        turn.confidence === null ? "" : renderMeter(turn.confidence, threshold);
      return (
        `<div class="turn answer"><b>${escapeHtml(turn.class)}</b>` +
        (turn.confidence === null
          ? ""
          : ` <span class="cl">CL ${turn.confidence.toFixed(3)}</span>${meter}`) +
        `</div>`
      );
    }
    case "rejection":
      return (
        `<div class="turn rejection">no confident answer ` +
        `<span class="cl">best CL ${turn.bestConfidence.toFixed(3)}</span>` +
        renderMeter(turn.bestConfidence, threshold) +
        `</div>`
      );
    case "prompt":
      return (
        `<div class="turn prompt">did you mean one of these ${turn.count}? ` +
        `pick the closest:</div>`
      );
    case "error":
      return `<div class="turn error">${escapeHtml(turn.message)}</div>`;
  }
}

export function renderCandidates(candidates: ActiveCandidate[]): string {
  return candidates
    .map(
      (candidate, index) =>
        `<button type="button" class="candidate" data-index="${index}">` +
        `<b>${escapeHtml(candidate.class)}</b>` +
        `<span class="example">${escapeHtml(candidate.exampleQuery)}</span>` +
        `<span class="cl">CL ${candidate.confidence.toFixed(3)}</span>` +
        `</button>`,
    )
    .join("");
}

export function renderTranscript(state: ViewState, threshold: number): string {
  return state.transcript.map((turn) => renderTurn(turn, threshold)).join("");
}
