/** Browser wiring: prompt form, playback loop, timeline, view toggle. */

import { ApiError, SessionClient } from "./client.js";
import { drawFrame, type ViewName } from "./render.js";
import { ViewerSessionState } from "./state.js";
import type { MotionFile } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("viewer");
const ctx = canvas.getContext("2d")!;
const promptInput = el<HTMLInputElement>("prompt");
const durationInput = el<HTMLInputElement>("duration");
const submitButton = el<HTMLButtonElement>("submit");
const statusLine = el<HTMLDivElement>("status");
const timeline = el<HTMLDivElement>("timeline");
const scrubber = el<HTMLInputElement>("scrubber");
const viewToggle = el<HTMLButtonElement>("view-toggle");

const serverUrl =
  new URLSearchParams(window.location.search).get("server") ?? "http://127.0.0.1:7860";
const client = new SessionClient(serverUrl);
const state = new ViewerSessionState();
let motion: MotionFile | null = null;
let view: ViewName = "side";

function setStatus(text: string, isError = false): void {
  statusLine.textContent = text;
  statusLine.className = isError ? "error" : "";
}

function renderTimeline(): void {
  timeline.innerHTML = "";
  const total = state.totalFrames || 1;
  state.prompts.forEach((prompt, index) => {
    const chip = document.createElement("span");
    chip.className = "chip" + (state.spanIndexAt(state.cursor) === index ? " active" : "");
    chip.style.flexGrow = String(prompt.span.end - prompt.span.start);
    chip.title = `${prompt.text} [${prompt.span.start}, ${prompt.span.end})`;
    chip.textContent = prompt.text;
    chip.onclick = () => {
      state.clampCursor(prompt.span.start);
    };
    timeline.appendChild(chip);
  });
  scrubber.max = String(Math.max(total - 1, 0));
  scrubber.value = String(state.cursor);
}

function tick(): void {
  if (motion && state.totalFrames > 0) {
    if (state.playing) {
      if (state.cursor >= state.totalFrames - 1) state.playing = false;
      else state.advance(1);
    }
    drawFrame(ctx, motion, state.cursor, {
      view,
      scale: 120,
      progress: state.progressInSpan(state.cursor),
    });
    renderTimeline();
  }
  requestAnimationFrame(tick);
}

async function refreshMotion(): Promise<void> {
  if (!state.sessionId) return;
  motion = await client.getMotion(state.sessionId);
}

submitButton.onclick = async () => {
  const text = promptInput.value;
  const duration = parseFloat(durationInput.value || "2");
  if (!state.beginSubmit(text, duration)) {
    if (state.lastError) setStatus(state.lastError, true);
    return;
  }
  submitButton.disabled = true;
  setStatus("generating...");
  try {
    const response = await client.appendAction(state.sessionId!, text, duration);
    state.completeSubmit(response.span);
    await refreshMotion();
    promptInput.value = "";
    setStatus(`added [${response.span.start}, ${response.span.end})`);
  } catch (error) {
    const message =
      error instanceof ApiError
        ? `${error.status === 422 ? "invalid prompt" : "server error"}: ${error.detail}`
        : `network error: ${String(error)}`;
    state.failSubmit(message);
    if (state.restoredInput) {
      promptInput.value = state.restoredInput.text;
      durationInput.value = String(state.restoredInput.durationS);
    }
    setStatus(message, true);
  } finally {
    submitButton.disabled = false;
  }
};

scrubber.oninput = () => {
  state.playing = false;
  state.clampCursor(parseInt(scrubber.value, 10));
};

viewToggle.onclick = () => {
  view = view === "side" ? "front" : "side";
  viewToggle.textContent = view === "side" ? "side view" : "front view";
};

(async () => {
  try {
    const session = await client.createSession();
    state.attachSession(session.id);
    setStatus(`session ${session.id.slice(0, 8)} (seed ${session.seed}) on ${serverUrl}`);
  } catch (error) {
    setStatus(`cannot reach server at ${serverUrl}: ${String(error)}`, true);
  }
  tick();
})();
