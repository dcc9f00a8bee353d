/** REST client for the session service. */

import type { AppendResponse, MotionFile, SessionMetadata } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class SessionClient {
  constructor(private baseUrl: string = "http://127.0.0.1:7860") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  async createSession(seed?: number): Promise<{ id: string; seed: number }> {
    const response = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(seed === undefined ? {} : { seed }),
    });
    await raiseForStatus(response);
    return response.json();
  }

  async appendAction(
    sessionId: string,
    text: string,
    durationS: number,
    idempotencyKey?: string,
  ): Promise<AppendResponse> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/actions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        text,
        duration_s: durationS,
        idempotency_key: idempotencyKey,
      }),
    });
    await raiseForStatus(response);
    return response.json();
  }

  async getMetadata(sessionId: string): Promise<SessionMetadata> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}`);
    await raiseForStatus(response);
    return response.json();
  }

  async getMotion(sessionId: string): Promise<MotionFile> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/motion`);
    await raiseForStatus(response);
    return response.json();
  }

  async deleteSession(sessionId: string): Promise<void> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}`, {
      method: "DELETE",
    });
    await raiseForStatus(response);
  }
}
