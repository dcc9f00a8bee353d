"""Procedural kinematic action generators for the synthetic corpus.

Each generator emits quaternion joint rotations plus a root trajectory for
one action. Records carry persistent traits drawn once per sequence (arm
rest angle, torso pitch, seat depth) and a body state that threads through
the actions: sitting down leaves the body seated, upper-body actions then
run in the seated pose until standing up. Consecutive actions are aligned
at the junction and cross-blended late in the seeded overlap window, so
every record is continuous and fully label-covered.
"""

from __future__ import annotations

import numpy as np

from .motion import Motion, heading_angle
from .rotations import axis_angle_to_quat, quat_multiply, quat_to_rot6d, slerp, yaw_matrix
from .skeleton import Skeleton

# Joint indices in the default 22-joint skeleton.
PELVIS, SPINE1, SPINE2, CHEST, NECK, HEAD = 0, 1, 2, 3, 4, 5
L_SHOULDER, L_ELBOW, L_WRIST, L_HAND = 6, 7, 8, 9
R_SHOULDER, R_ELBOW, R_WRIST, R_HAND = 10, 11, 12, 13
L_HIP, L_KNEE, L_ANKLE, L_FOOT = 14, 15, 16, 17
R_HIP, R_KNEE, R_ANKLE, R_FOOT = 18, 19, 20, 21

X, Y, Z = np.eye(3)
STAND_HEIGHT = 0.95
ARM_DOWN = 1.4  # shoulder pitch that drops the arm from the lateral rest offset

# actions that can run while seated; everything else stands the body up
SEATED_CAPABLE = ("wave-right-hand", "raise-left-hand", "stand-up", "sit-down")


class UnknownActionError(ValueError):
    pass


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _default_style() -> dict:
    return {"arm": ARM_DOWN, "pitch": 0.0, "seat": 0.55, "flex": 1.0}


def _draw_style(rng) -> dict:
    """Per-record traits: persistent across all actions of one sequence."""
    return {
        "arm": float(rng.uniform(1.1, 1.7)),
        "pitch": float(rng.uniform(-0.06, 0.14)),
        "seat": float(rng.uniform(0.48, 0.64)),
        "flex": float(rng.uniform(0.85, 1.1)),
    }


def _base_quats(num_frames: int, style: dict) -> np.ndarray:
    q = np.zeros((num_frames, 22, 4))
    q[..., 0] = 1.0
    q[:, L_SHOULDER] = axis_angle_to_quat(Y, style["arm"])
    q[:, R_SHOULDER] = axis_angle_to_quat(Y, -style["arm"])
    q[:, SPINE1] = axis_angle_to_quat(X, style["pitch"])
    return q


def _standing_trans(num_frames: int) -> np.ndarray:
    t = np.zeros((num_frames, 3))
    t[:, 2] = STAND_HEIGHT
    return t


def _apply_seated_pose(q: np.ndarray, trans: np.ndarray, style: dict, prog=1.0) -> None:
    """Flex the legs and drop the root toward the record's seat depth."""
    hip = 1.45 * style["flex"] * prog
    knee = -1.55 * style["flex"] * prog
    for j in (L_HIP, R_HIP):
        q[:, j] = axis_angle_to_quat(X, hip)
    for j in (L_KNEE, R_KNEE):
        q[:, j] = axis_angle_to_quat(X, knee)
    trans[:, 2] = STAND_HEIGHT - (STAND_HEIGHT - style["seat"]) * prog


def _gen_walk_forward(F, fps, rng, style, seated):
    t = np.arange(F) / fps
    speed = rng.uniform(0.65, 0.95)
    amp = rng.uniform(0.35, 0.55)
    # seeded gait phase offset: instances start anywhere in the stride cycle
    phase = 2 * np.pi * rng.uniform(0.9, 1.2) * t + rng.uniform(0, 2 * np.pi)
    q = _base_quats(F, style)
    q[:, L_HIP] = axis_angle_to_quat(X, amp * np.sin(phase))
    q[:, R_HIP] = axis_angle_to_quat(X, -amp * np.sin(phase))
    q[:, L_KNEE] = axis_angle_to_quat(X, -0.5 * (0.5 - 0.5 * np.cos(phase)))
    q[:, R_KNEE] = axis_angle_to_quat(X, -0.5 * (0.5 + 0.5 * np.cos(phase)))
    q[:, L_SHOULDER] = quat_multiply(q[:, L_SHOULDER], axis_angle_to_quat(X, -0.25 * np.sin(phase)))
    q[:, R_SHOULDER] = quat_multiply(q[:, R_SHOULDER], axis_angle_to_quat(X, 0.25 * np.sin(phase)))
    trans = _standing_trans(F)
    trans[:, 1] = speed * t
    trans[:, 2] += 0.02 * (0.5 - 0.5 * np.cos(2 * phase))
    return q, trans, False


def _gen_turn(direction):
    def gen(F, fps, rng, style, seated):
        t = np.arange(F) / fps
        total = direction * rng.uniform(1.2, 1.75)
        yaw = total * _smoothstep(t / t[-1] if F > 1 else t + 1.0)
        q = _base_quats(F, style)
        q[:, PELVIS] = axis_angle_to_quat(Z, yaw)
        shuffle = 0.12 * np.sin(2 * np.pi * 1.6 * t + rng.uniform(0, 2 * np.pi))
        q[:, L_HIP] = axis_angle_to_quat(X, shuffle)
        q[:, R_HIP] = axis_angle_to_quat(X, -shuffle)
        return q, _standing_trans(F), False

    return gen


def _gen_wave_right_hand(F, fps, rng, style, seated):
    t = np.arange(F) / fps
    T = t[-1] if F > 1 else 1.0
    ramp = _smoothstep(t / min(0.6, max(T / 3, 1e-6)))
    lift = -style["arm"] + ramp * (style["arm"] + rng.uniform(0.6, 1.1))
    q = _base_quats(F, style)
    trans = _standing_trans(F)
    if seated:
        _apply_seated_pose(q, trans, style)
    q[:, R_SHOULDER] = axis_angle_to_quat(Y, lift)
    osc = rng.uniform(0.3, 0.5) * np.sin(
        2 * np.pi * rng.uniform(1.8, 2.6) * t + rng.uniform(0, 2 * np.pi)
    ) * ramp
    q[:, R_ELBOW] = axis_angle_to_quat(Y, osc)
    return q, trans, seated


def _gen_raise_left_hand(F, fps, rng, style, seated):
    t = np.arange(F) / fps
    T = t[-1] if F > 1 else 1.0
    ramp = _smoothstep(t / max(0.6 * T, 1e-6))
    lift = style["arm"] - ramp * (style["arm"] + rng.uniform(1.0, 1.3))
    q = _base_quats(F, style)
    trans = _standing_trans(F)
    if seated:
        _apply_seated_pose(q, trans, style)
    q[:, L_SHOULDER] = axis_angle_to_quat(Y, lift)
    return q, trans, seated


def _gen_sit_down(F, fps, rng, style, seated):
    t = np.arange(F) / fps
    q = _base_quats(F, style)
    trans = _standing_trans(F)
    if seated:
        # already seated: settle in place with a small sway
        _apply_seated_pose(q, trans, style)
        sway = 0.04 * np.sin(2 * np.pi * 0.8 * t)
        q[:, CHEST] = axis_angle_to_quat(X, 0.12 + sway)
        return q, trans, True
    prog = _smoothstep(t / t[-1]) if F > 1 else np.ones(F)
    _apply_seated_pose(q, trans, style, prog=prog)
    q[:, CHEST] = axis_angle_to_quat(X, rng.uniform(0.1, 0.25) * prog)
    trans[:, 1] -= 0.08 * prog
    return q, trans, True


def _gen_stand_up(F, fps, rng, style, seated):
    t = np.arange(F) / fps
    q = _base_quats(F, style)
    trans = _standing_trans(F)
    if not seated:
        # nothing to stand up from: a slight recovering bob
        bob = 0.05 * np.sin(np.pi * (t / t[-1] if F > 1 else t))
        trans[:, 2] -= bob
        return q, trans, False
    prog = 1.0 - (_smoothstep(t / t[-1]) if F > 1 else np.ones(F))
    _apply_seated_pose(q, trans, style, prog=prog)
    q[:, CHEST] = axis_angle_to_quat(X, rng.uniform(0.1, 0.25) * prog)
    return q, trans, False


def _gen_squat(F, fps, rng, style, seated):
    t = np.arange(F) / fps
    w = 0.5 - 0.5 * np.cos(2 * np.pi * (t / t[-1])) if F > 1 else np.zeros(F)
    depth = rng.uniform(0.25, 0.35)
    q = _base_quats(F, style)
    for j in (L_HIP, R_HIP):
        q[:, j] = axis_angle_to_quat(X, 1.1 * w)
    for j in (L_KNEE, R_KNEE):
        q[:, j] = axis_angle_to_quat(X, -1.9 * w)
    # arms swing forward for balance
    arm = rng.uniform(0.4, 0.8)
    q[:, L_SHOULDER] = quat_multiply(q[:, L_SHOULDER], axis_angle_to_quat(X, arm * w))
    q[:, R_SHOULDER] = quat_multiply(q[:, R_SHOULDER], axis_angle_to_quat(X, arm * w))
    trans = _standing_trans(F)
    trans[:, 2] -= depth * w
    return q, trans, False


def _gen_kick_left_foot(F, fps, rng, style, seated):
    t = np.arange(F) / fps
    u = t / t[-1] if F > 1 else np.zeros(F)
    bump = np.sin(np.pi * u) ** 3
    q = _base_quats(F, style)
    q[:, L_HIP] = axis_angle_to_quat(X, rng.uniform(1.0, 1.35) * bump)
    q[:, L_KNEE] = axis_angle_to_quat(X, -0.4 * np.sin(np.pi * u) ** 2 * (1 - bump))
    q[:, R_SHOULDER] = quat_multiply(q[:, R_SHOULDER], axis_angle_to_quat(X, 0.3 * bump))
    return q, _standing_trans(F), False


def _gen_step_right(F, fps, rng, style, seated):
    t = np.arange(F) / fps
    u = t / t[-1] if F > 1 else np.zeros(F)
    shift = rng.uniform(0.3, 0.5)
    q = _base_quats(F, style)
    swing = 0.45 * np.sin(np.pi * np.clip(2 * u, 0, 1)) ** 2
    plant = 0.45 * np.sin(np.pi * np.clip(2 * u - 1, 0, 1)) ** 2
    q[:, R_HIP] = axis_angle_to_quat(Y, swing)
    q[:, L_HIP] = axis_angle_to_quat(Y, plant)
    trans = _standing_trans(F)
    trans[:, 0] = -shift * _smoothstep(u)
    trans[:, 2] -= 0.02 * np.sin(np.pi * u) ** 2
    return q, trans, False


_GENERATORS = {
    "walk-forward": _gen_walk_forward,
    "turn-left": _gen_turn(+1.0),
    "turn-right": _gen_turn(-1.0),
    "wave-right-hand": _gen_wave_right_hand,
    "raise-left-hand": _gen_raise_left_hand,
    "sit-down": _gen_sit_down,
    "stand-up": _gen_stand_up,
    "squat": _gen_squat,
    "kick-left-foot": _gen_kick_left_foot,
    "step-right": _gen_step_right,
}

_PHRASINGS = {
    "walk-forward": ["walk forward", "walking forwards", "walk straight ahead"],
    "turn-left": ["turn left", "turn to the left", "turning left"],
    "turn-right": ["turn right", "turn to the right", "turning right"],
    "wave-right-hand": ["wave the right hand", "right hand wave", "waving with right hand"],
    "raise-left-hand": ["raise the left hand", "lift left hand up", "raising the left arm"],
    "sit-down": ["sit down", "sitting down", "sit down slowly"],
    "stand-up": ["stand up", "standing up", "get up"],
    "squat": ["squat", "do a squat", "squatting down and up"],
    "kick-left-foot": ["kick with the left foot", "left foot kick", "kicking with left leg"],
    "step-right": ["step to the right", "side step right", "stepping rightwards"],
}


def action_names() -> list[str]:
    return list(_GENERATORS)


def random_action_specs(
    rng,
    count: int,
    min_actions: int = 2,
    max_actions: int = 3,
    min_duration: float = 1.2,
    max_duration: float = 3.0,
) -> list[list[tuple[str, float]]]:
    """Seeded random record specs honoring the seated/standing state machine.

    While standing, any action but stand-up may follow (sitting down is
    weighted up so seated stretches are common); while seated, only the
    seated-capable actions are offered.
    """
    standing_pool = [n for n in _GENERATORS if n != "stand-up"]
    seated_pool = ["wave-right-hand", "raise-left-hand", "stand-up"]
    specs = []
    for _ in range(count):
        length = int(rng.integers(min_actions, max_actions + 1))
        spec = []
        seated = False
        prev = None
        for _ in range(length):
            if seated:
                pool = [n for n in seated_pool if n != prev] or seated_pool
                name = pool[int(rng.integers(0, len(pool)))]
            else:
                pool = [n for n in standing_pool if n != prev] or standing_pool
                weights = np.array([2.5 if n == "sit-down" else 1.0 for n in pool])
                name = pool[int(rng.choice(len(pool), p=weights / weights.sum()))]
            spec.append((name, float(rng.uniform(min_duration, max_duration))))
            seated = name == "sit-down" or (seated and name != "stand-up")
            prev = name
        specs.append(spec)
    return specs


def _heading_of(quat: np.ndarray) -> float:
    return float(heading_angle(quat_to_rot6d(quat)))


def generate_record(action_spec, seed: int, fps: float, skeleton: Skeleton):
    from .dataset import LabeledSegment, SequenceRecord

    if not action_spec:
        raise ValueError("action_spec must not be empty")
    rng = np.random.default_rng(seed)
    style = _draw_style(rng)

    parts = []
    seated = False
    for name, duration_s in action_spec:
        if name not in _GENERATORS:
            raise UnknownActionError(f"unknown action {name!r}; known: {sorted(_GENERATORS)}")
        if duration_s <= 0:
            raise ValueError("durations must be positive")
        F = max(2, int(round(duration_s * fps)))
        phrase = _PHRASINGS[name][int(rng.integers(0, 3))]
        quats, trans, seated = _GENERATORS[name](F, fps, rng, style, seated)
        parts.append((phrase, quats, trans))

    overlaps = []
    for k in range(len(parts) - 1):
        want = int(round(rng.uniform(0.2, 0.6) * fps))
        cap = min(parts[k][1].shape[0] - 1, parts[k + 1][1].shape[0] - 1)
        overlaps.append(max(1, min(want, cap)))

    comp_q, comp_t = parts[0][1].copy(), parts[0][2].copy()
    starts = [0]
    for k in range(1, len(parts)):
        _, q_next, t_next = parts[k]
        O = overlaps[k - 1]
        s = comp_q.shape[0] - O

        # Rigidly carry the next action to the junction pose (yaw + xy).
        yaw = _heading_of(comp_q[s, 0]) - _heading_of(q_next[0, 0])
        R = yaw_matrix(yaw)
        q_yaw = axis_angle_to_quat(Z, yaw)
        anchor = t_next[0] * np.array([1.0, 1.0, 0.0])
        target = comp_t[s] * np.array([1.0, 1.0, 0.0])
        t_next = (t_next - anchor) @ R.T + target
        q_next = q_next.copy()
        q_next[:, 0] = quat_multiply(q_yaw, q_next[:, 0])

        for f in range(O):
            u = (f + 1) / (O + 1)
            # the previous action holds its own state through most of the
            # overlap; the hand-off happens late, as in real annotated motion
            w = float(_smoothstep(np.asarray(max(0.0, (u - 0.55) / 0.45))))
            comp_q[s + f] = slerp(comp_q[s + f], q_next[f], w)
            comp_t[s + f] = (1 - w) * comp_t[s + f] + w * t_next[f]
        comp_q = np.concatenate([comp_q, q_next[O:]])
        comp_t = np.concatenate([comp_t, t_next[O:]])
        starts.append(s)

    motion = Motion(quat_to_rot6d(comp_q), comp_t, fps, skeleton)
    segments = tuple(
        LabeledSegment(parts[k][0], starts[k], starts[k] + parts[k][1].shape[0])
        for k in range(len(parts))
    )
    return SequenceRecord(motion, segments)
