"""HTTP session API: interactive prompt-by-prompt motion composition.

Each session accumulates one stitched motion. Appending a prompt generates
the next action conditioned on the previous one, aligns it to the end of the
accumulated motion, stitches, and returns the new frame span. Appends within
a session are serialized; sessions never block each other (the model is
read-only at serve time).
"""

from __future__ import annotations

import datetime
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .compose import DEFAULT_SLERP_FRAMES, align_second, slerp_stitch
from .model import SequenceGenerator
from .motion import Motion, canonicalize, motion_to_dict
from .text import EmptyTextError

CHECKPOINT_ENV = "MOTION_COMPOSE_CHECKPOINT"
PORT_ENV = "MOTION_COMPOSE_PORT"
DEFAULT_PORT = 7860


class CreateSessionRequest(BaseModel):
    seed: int | None = None


class AppendRequest(BaseModel):
    text: str
    duration_s: float
    idempotency_key: str | None = None


@dataclass
class Session:
    id: str
    rng_seed: int
    created_at: str
    prompt_history: list[tuple[str, float]] = field(default_factory=list)
    spans: list[tuple[int, int]] = field(default_factory=list)
    accumulated: Motion | None = None
    idempotency: dict[str, tuple[dict, dict]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _frames_payload(motion: Motion, start: int, end: int) -> list[dict]:
    return [
        {
            "root_t": motion.root_translation[f].tolist(),
            "rot6d": motion.rot6d[f].tolist(),
        }
        for f in range(start, end)
    ]


def create_app(
    generator: SequenceGenerator,
    slerp_frames: int = DEFAULT_SLERP_FRAMES,
    stitch_mode: str = "overwrite",
) -> FastAPI:
    app = FastAPI(title="motion-compose session service")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    server_rng = np.random.default_rng()

    def get_session(session_id: str) -> Session:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest | None = None):
        seed = req.seed if req is not None and req.seed is not None else int(server_rng.integers(0, 2**31 - 1))
        session = Session(
            id=uuid.uuid4().hex,
            rng_seed=int(seed),
            created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        )
        with registry_lock:
            sessions[session.id] = session
        return {"id": session.id, "seed": session.rng_seed}

    @app.post("/sessions/{session_id}/actions")
    def append_action(session_id: str, req: AppendRequest):
        session = get_session(session_id)
        payload = {"text": req.text, "duration_s": req.duration_s}
        if req.duration_s <= 0:
            raise HTTPException(status_code=422, detail="duration_s must be positive")
        if not req.text or not req.text.strip():
            raise HTTPException(status_code=422, detail="prompt text is empty")

        with session.lock:
            if req.idempotency_key is not None:
                stored = session.idempotency.get(req.idempotency_key)
                if stored is not None:
                    stored_payload, stored_response = stored
                    if stored_payload != payload:
                        raise HTTPException(
                            status_code=409,
                            detail="idempotency key reused with a different payload",
                        )
                    return stored_response

            step = len(session.prompt_history)
            step_seed = int(np.random.SeedSequence([session.rng_seed, step]).generate_state(1)[0])
            try:
                if session.accumulated is None:
                    new_action = generator.generate_next(
                        req.text, req.duration_s, past_motion=None,
                        mode="stochastic", seed=step_seed,
                    )
                    stitched = new_action
                    span = (0, new_action.num_frames)
                else:
                    # Condition on the previous prompt's span, re-expressed in
                    # its own canonical frame to match the training-time past
                    # distribution (alignment is quotiented out).
                    prev_start, prev_end = session.spans[-1]
                    prev_slice = canonicalize(session.accumulated.slice_frames(prev_start, prev_end))
                    new_action = generator.generate_next(
                        req.text, req.duration_s, past_motion=prev_slice,
                        mode="stochastic", seed=step_seed,
                    )
                    aligned = align_second(session.accumulated, new_action)
                    before = session.accumulated.num_frames
                    stitched = slerp_stitch(session.accumulated, aligned, slerp_frames, stitch_mode)
                    span = (before, stitched.num_frames)
            except EmptyTextError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc

            # commit only after successful generation
            session.accumulated = stitched
            session.prompt_history.append((req.text, req.duration_s))
            session.spans.append(span)
            response = {
                "span": {"start": span[0], "end": span[1]},
                "frames": _frames_payload(stitched, span[0], span[1]),
            }
            if req.idempotency_key is not None:
                session.idempotency[req.idempotency_key] = (payload, response)
            return response

    @app.get("/sessions/{session_id}")
    def session_metadata(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return {
                "id": session.id,
                "created_at": session.created_at,
                "seed": session.rng_seed,
                "prompts": [
                    {"text": t, "duration_s": d} for t, d in session.prompt_history
                ],
                "spans": [{"start": s, "end": e} for s, e in session.spans],
                "total_frames": 0 if session.accumulated is None else session.accumulated.num_frames,
                "fps": generator.fps,
            }

    @app.get("/sessions/{session_id}/motion")
    def session_motion(session_id: str):
        session = get_session(session_id)
        with session.lock:
            if session.accumulated is None:
                raise HTTPException(status_code=409, detail="session has no motion yet")
            labels = [
                {"text": t, "start_frame": s, "end_frame": e}
                for (t, _), (s, e) in zip(session.prompt_history, session.spans)
            ]
            return motion_to_dict(session.accumulated, labels)

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        with registry_lock:
            if session_id not in sessions:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
            del sessions[session_id]
        return {"deleted": session_id}

    return app
