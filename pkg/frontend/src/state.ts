/**
 * Viewer session state: prompt list with spans, playback cursor, and the
 * single in-flight append. Submitting is optimistic: the prompt enters a
 * pending slot, lands as a span on success, and returns to the input box on
 * failure so the user can correct it.
 */

import type { Span } from "./types.js";

export interface PromptEntry {
  text: string;
  durationS: number;
  span: Span;
}

export class ViewerSessionState {
  sessionId: string | null = null;
  prompts: PromptEntry[] = [];
  cursor = 0;
  playbackSpeed = 1.0;
  playing = false;
  pending: { text: string; durationS: number } | null = null;
  lastError: string | null = null;
  /** Input restored after a failed submit so nothing the user typed is lost. */
  restoredInput: { text: string; durationS: number } | null = null;

  get totalFrames(): number {
    if (this.prompts.length === 0) return 0;
    return this.prompts[this.prompts.length - 1].span.end;
  }

  get busy(): boolean {
    return this.pending !== null;
  }

  attachSession(sessionId: string): void {
    this.sessionId = sessionId;
    this.prompts = [];
    this.cursor = 0;
    this.pending = null;
    this.lastError = null;
    this.restoredInput = null;
  }

  /** Start an append; returns false while another one is in flight. */
  beginSubmit(text: string, durationS: number): boolean {
    if (this.pending !== null || this.sessionId === null) return false;
    if (!text.trim() || durationS <= 0) {
      this.lastError = "prompt needs text and a positive duration";
      return false;
    }
    this.pending = { text, durationS };
    this.lastError = null;
    this.restoredInput = null;
    return true;
  }

  /** Append succeeded: record the span and jump playback to its start. */
  completeSubmit(span: Span): void {
    if (this.pending === null) throw new Error("no submit in flight");
    const previousEnd = this.totalFrames;
    if (span.start !== previousEnd) {
      throw new Error(`span timeline broken: got start ${span.start}, expected ${previousEnd}`);
    }
    this.prompts.push({
      text: this.pending.text,
      durationS: this.pending.durationS,
      span,
    });
    this.pending = null;
    this.cursor = span.start;
    this.playing = true;
  }

  /** Append failed: clear the pending slot but keep what the user typed. */
  failSubmit(message: string): void {
    if (this.pending !== null) {
      this.restoredInput = { ...this.pending };
    }
    this.pending = null;
    this.lastError = message;
  }

  clampCursor(frame: number): number {
    const max = Math.max(this.totalFrames - 1, 0);
    this.cursor = Math.min(Math.max(Math.round(frame), 0), max);
    return this.cursor;
  }

  advance(frames: number): number {
    return this.clampCursor(this.cursor + frames * this.playbackSpeed);
  }

  /** Index of the prompt whose span contains the frame, or -1. */
  spanIndexAt(frame: number): number {
    return this.prompts.findIndex((p) => frame >= p.span.start && frame < p.span.end);
  }

  /** 0..1 progress of the cursor within its active span (for saturation). */
  progressInSpan(frame: number): number {
    const index = this.spanIndexAt(frame);
    if (index < 0) return 0;
    const { start, end } = this.prompts[index].span;
    return end > start ? (frame - start) / (end - start - 1 || 1) : 0;
  }

  /** Spans must tile [0, totalFrames) exactly. */
  timelineIsContiguous(): boolean {
    let expected = 0;
    for (const prompt of this.prompts) {
      if (prompt.span.start !== expected || prompt.span.end <= prompt.span.start) {
        return false;
      }
      expected = prompt.span.end;
    }
    return expected === this.totalFrames;
  }
}
