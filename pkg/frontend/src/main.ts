/**
 * Bootstrap: read the threshold from the service, wire the input form
 * and the candidate buttons, re-render on every state change.
 */

import { ApiClient } from "./api.js";
import { Console } from "./state.js";
import { renderCandidates, renderTranscript } from "./ui.js";

// Same-origin by default; `index.html?api=http://127.0.0.1:8000` points
// the console at a service running elsewhere.
const api = new ApiClient(new URLSearchParams(location.search).get("api") ?? "");

async function start(): Promise<void> {
  const transcriptEl = document.getElementById("transcript") as HTMLElement;
  const candidatesEl = document.getElementById("candidates") as HTMLElement;
  const form = document.getElementById("ask") as HTMLFormElement;
  const input = document.getElementById("query") as HTMLInputElement;
  const send = document.getElementById("send") as HTMLButtonElement;

  let threshold = 0.6;
  try {
    threshold = (await api.modelInfo()).threshold;
  } catch {
    transcriptEl.innerHTML =
      '<div class="turn error">service unreachable; is `ina serve` running?</div>';
  }

  const console_ = new Console(api, (state) => {
    transcriptEl.innerHTML = renderTranscript(state, threshold);
    candidatesEl.innerHTML = renderCandidates(state.activeCandidates);
    input.disabled = state.pending;
    send.disabled = state.pending;
    transcriptEl.scrollTop = transcriptEl.scrollHeight;
    if (!state.pending) {
      input.focus();
    }
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value;
    input.value = "";
    void console_.submitQuery(text);
  });

  candidatesEl.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("button.candidate");
    if (target instanceof HTMLElement && target.dataset.index !== undefined) {
      void console_.pickCandidate(Number(target.dataset.index));
    }
  });
}

void start();
