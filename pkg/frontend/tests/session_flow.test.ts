import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, SessionClient } from "../src/client.js";
import { ViewerSessionState } from "../src/state.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("scripted session", () => {
  it("two prompts, then a rejected one: contiguous timeline, input preserved", async () => {
    const spans = [
      { start: 0, end: 60 },
      { start: 60, end: 90 },
    ];
    let appendCount = 0;
    vi.stubGlobal("fetch", async (url: string) => {
      if (url.endsWith("/sessions")) return jsonResponse(200, { id: "sess1", seed: 3 });
      if (url.endsWith("/actions")) {
        if (appendCount >= 2) return jsonResponse(422, { detail: "prompt text is empty" });
        return jsonResponse(200, { span: spans[appendCount++], frames: [] });
      }
      return jsonResponse(404, { detail: "unknown" });
    });

    const client = new SessionClient("http://example.test");
    const state = new ViewerSessionState();
    state.attachSession((await client.createSession(3)).id);

    async function submit(text: string, duration: number) {
      if (!state.beginSubmit(text, duration)) return;
      try {
        const response = await client.appendAction(state.sessionId!, text, duration);
        state.completeSubmit(response.span);
      } catch (error) {
        state.failSubmit(error instanceof ApiError ? error.detail : String(error));
      }
    }

    await submit("walk forward", 2.0);
    expect(state.cursor).toBe(0);
    await submit("sit down", 1.0);
    expect(state.cursor).toBe(60);

    expect(state.prompts.map((p) => p.span)).toEqual(spans);
    expect(state.timelineIsContiguous()).toBe(true);
    expect(state.totalFrames).toBe(90);

    // server rejects the third prompt: error surfaced, input kept, timeline intact
    await submit("!!!", 1.0);
    expect(state.lastError).toBe("prompt text is empty");
    expect(state.restoredInput).toEqual({ text: "!!!", durationS: 1.0 });
    expect(state.prompts.length).toBe(2);
    expect(state.timelineIsContiguous()).toBe(true);
  });
});
