import { describe, expect, it } from "vitest";

import { ViewerSessionState } from "../src/state.js";

function freshSession(): ViewerSessionState {
  const state = new ViewerSessionState();
  state.attachSession("abc123");
  return state;
}

describe("scripted two-prompt session", () => {
  it("keeps the span timeline contiguous and jumps playback", () => {
    const state = freshSession();

    expect(state.beginSubmit("walk forward", 2.0)).toBe(true);
    state.completeSubmit({ start: 0, end: 60 });
    expect(state.cursor).toBe(0);
    expect(state.totalFrames).toBe(60);

    expect(state.beginSubmit("sit down", 1.0)).toBe(true);
    state.completeSubmit({ start: 60, end: 90 });
    expect(state.cursor).toBe(60);
    expect(state.totalFrames).toBe(90);

    expect(state.timelineIsContiguous()).toBe(true);
    expect(state.spanIndexAt(0)).toBe(0);
    expect(state.spanIndexAt(59)).toBe(0);
    expect(state.spanIndexAt(60)).toBe(1);
    expect(state.spanIndexAt(89)).toBe(1);
    expect(state.spanIndexAt(90)).toBe(-1);
  });

  it("rejects non-contiguous spans", () => {
    const state = freshSession();
    state.beginSubmit("walk forward", 2.0);
    state.completeSubmit({ start: 0, end: 60 });
    state.beginSubmit("sit down", 1.0);
    expect(() => state.completeSubmit({ start: 61, end: 90 })).toThrow(/timeline/);
  });
});

describe("failed submits", () => {
  it("surfaces a 422 without losing the typed input", () => {
    const state = freshSession();
    expect(state.beginSubmit("   ", 2.0)).toBe(false); // local validation
    expect(state.lastError).toBeTruthy();

    expect(state.beginSubmit("walk forwrad", 2.0)).toBe(true);
    state.failSubmit("invalid prompt: no tokens");
    expect(state.pending).toBeNull();
    expect(state.lastError).toContain("invalid prompt");
    expect(state.restoredInput).toEqual({ text: "walk forwrad", durationS: 2.0 });
    // the session itself is untouched
    expect(state.totalFrames).toBe(0);
    expect(state.timelineIsContiguous()).toBe(true);
  });

  it("only one submit can be in flight", () => {
    const state = freshSession();
    expect(state.beginSubmit("walk forward", 2.0)).toBe(true);
    expect(state.beginSubmit("sit down", 1.0)).toBe(false);
    expect(state.busy).toBe(true);
  });
});

describe("cursor", () => {
  it("clamps to the motion bounds", () => {
    const state = freshSession();
    state.beginSubmit("walk forward", 2.0);
    state.completeSubmit({ start: 0, end: 60 });
    expect(state.clampCursor(-5)).toBe(0);
    expect(state.clampCursor(59)).toBe(59);
    expect(state.clampCursor(1000)).toBe(59);
  });

  it("reports progress within the active span", () => {
    const state = freshSession();
    state.beginSubmit("walk forward", 2.0);
    state.completeSubmit({ start: 0, end: 31 });
    expect(state.progressInSpan(0)).toBe(0);
    expect(state.progressInSpan(30)).toBe(1);
  });
});
