"""Composition strategies plus alignment and slerp stitching.

Three ways to realize a prompt sequence: independent per-action generation
stitched together, a single joint decode of the comma-joined text, and
past-conditioned recursive generation (also stitched). Alignment applies one
yaw + horizontal translation to the whole second motion so its first frame
meets the first motion's last frame; stitching interpolates rotations along
per-joint quaternion geodesics with linearly interpolated root translation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import concat_motions
from .model import SequenceGenerator
from .motion import Motion, heading_angle, rigid_transform
from .rotations import quat_to_rot6d, rot6d_to_quat, slerp, yaw_matrix

STRATEGIES = ("independent", "joint", "teach")
STITCH_MODES = ("overwrite", "insert")
DEFAULT_SLERP_FRAMES = 8


@dataclass(frozen=True)
class CompositionRequest:
    prompts: tuple[tuple[str, float], ...]
    strategy: str = "teach"
    slerp_frames: int = DEFAULT_SLERP_FRAMES
    stitch_mode: str = "overwrite"
    mode: str = "deterministic"
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "prompts", tuple((str(t), float(d)) for t, d in self.prompts))
        if not self.prompts:
            raise ValueError("need at least one prompt")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.stitch_mode not in STITCH_MODES:
            raise ValueError(f"unknown stitch mode {self.stitch_mode!r}")
        if self.slerp_frames < 0:
            raise ValueError("slerp_frames must be >= 0")
        if self.mode not in ("deterministic", "stochastic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.strategy == "joint" and len(self.prompts) != 2:
            raise ValueError("joint strategy is restricted to exactly 2 prompts")


@dataclass(frozen=True)
class CompositionResult:
    motion: Motion
    spans: tuple[tuple[int, int], ...]  # per-prompt frame intervals
    actions: tuple[Motion, ...]  # raw per-action motions before stitching


def align_second(first: Motion, second: Motion) -> Motion:
    """Rigidly carry `second` so its first frame meets `first`'s last frame.

    One yaw rotation about the vertical axis plus a horizontal translation:
    afterwards second frame 0 has the same root xy and heading as first's
    last frame. Heights and all intra-motion geometry are untouched.
    """
    if first.skeleton != second.skeleton:
        raise ValueError("skeleton mismatch")
    yaw = float(heading_angle(first.rot6d[-1, 0]) - heading_angle(second.rot6d[0, 0]))
    target = first.root_translation[-1] * np.array([1.0, 1.0, 0.0])
    anchor = second.root_translation[0] * np.array([1.0, 1.0, 0.0])
    translation = target - yaw_matrix(yaw) @ anchor
    return rigid_transform(second, yaw, translation)


def _interp_frames(
    from_rot6d: np.ndarray,
    from_trans: np.ndarray,
    to_rot6d: np.ndarray,
    to_trans: np.ndarray,
    ts: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    q0 = rot6d_to_quat(from_rot6d)  # (J, 4)
    q1 = rot6d_to_quat(to_rot6d)
    rot = np.stack([quat_to_rot6d(slerp(q0, q1, t)) for t in ts])
    trans = (1 - ts)[:, None] * from_trans + ts[:, None] * to_trans
    return rot, trans


def slerp_stitch(first: Motion, second: Motion, n: int = DEFAULT_SLERP_FRAMES, mode: str = "overwrite") -> Motion:
    """Join two motions with an n-frame interpolated transition.

    overwrite: the second motion's first n frames are replaced by the
    interpolation from first's last pose toward second's frame n, keeping the
    total length len(first) + len(second). insert: n synthesized frames go
    between the two motions. Endpoint frames of both inputs are preserved.
    """
    if mode not in STITCH_MODES:
        raise ValueError(f"unknown stitch mode {mode!r}")
    if n < 0:
        raise ValueError("n must be >= 0")
    if first.skeleton != second.skeleton or first.fps != second.fps:
        raise ValueError("motions must share skeleton and fps")
    if n == 0:
        return concat_motions(first, second)

    from_rot, from_trans = first.rot6d[-1], first.root_translation[-1]
    if mode == "overwrite":
        if n > second.num_frames:
            raise ValueError(f"cannot overwrite {n} frames of a {second.num_frames}-frame motion")
        if n < second.num_frames:
            target, denom = n, n + 1
        else:
            # the whole second motion is the transition; land exactly on its last frame
            target, denom = n - 1, n
        ts = np.arange(1, n + 1) / denom
        rot, trans = _interp_frames(
            from_rot, from_trans, second.rot6d[target], second.root_translation[target], ts
        )
        rot6d = np.concatenate([first.rot6d, rot, second.rot6d[n:]])
        trans_all = np.concatenate([first.root_translation, trans, second.root_translation[n:]])
    else:
        ts = np.arange(1, n + 1) / (n + 1)
        rot, trans = _interp_frames(
            from_rot, from_trans, second.rot6d[0], second.root_translation[0], ts
        )
        rot6d = np.concatenate([first.rot6d, rot, second.rot6d])
        trans_all = np.concatenate([first.root_translation, trans, second.root_translation])
    return Motion(rot6d, trans_all, first.fps, first.skeleton)


def _per_prompt_seeds(seed: int | None, count: int) -> list[int | None]:
    if seed is None:
        return [None] * count
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def compose(
    request: CompositionRequest,
    generator: SequenceGenerator,
    single_action_generator: SequenceGenerator | None = None,
) -> CompositionResult:
    """Run one composition request and return the stitched motion with spans.

    independent: every action generated in isolation by the single-action
    model, then aligned and stitched pairwise left to right. joint: one
    decode of the comma-joined two prompts over the total duration, no
    stitching. teach: recursive past-conditioned generation, then the same
    align + stitch treatment.
    """
    prompts = list(request.prompts)
    if request.strategy == "joint":
        texts = [t for t, _ in prompts]
        total = sum(d for _, d in prompts)
        motion = generator.generate_joint(texts, total, mode=request.mode, seed=request.seed)
        split = int(round(prompts[0][1] * generator.fps))
        split = min(max(split, 1), motion.num_frames - 1)
        spans = ((0, split), (split, motion.num_frames))
        actions = (motion.slice_frames(0, split), motion.slice_frames(split, motion.num_frames))
        return CompositionResult(motion, spans, actions)

    if request.strategy == "independent":
        gen = single_action_generator or generator
        seeds = _per_prompt_seeds(request.seed, len(prompts))
        actions = tuple(
            gen.generate_single(text, dur, mode=request.mode, seed=s)
            for (text, dur), s in zip(prompts, seeds)
        )
    else:  # teach
        actions = tuple(
            generator.generate_sequence(prompts, mode=request.mode, seed=request.seed)
        )

    acc = actions[0]
    spans = [(0, acc.num_frames)]
    for nxt in actions[1:]:
        aligned = align_second(acc, nxt)
        before = acc.num_frames
        acc = slerp_stitch(acc, aligned, request.slerp_frames, request.stitch_mode)
        spans.append((before, acc.num_frames))
    return CompositionResult(acc, tuple(spans), actions)


def pair_composer(
    strategy: str,
    generator: SequenceGenerator,
    single_generator: SequenceGenerator | None = None,
    slerp_frames: int = DEFAULT_SLERP_FRAMES,
    mode: str = "stochastic",
):
    """Callable (texts, durations, seed) -> (actions, composed) for evaluation.

    Overwrite stitching keeps the composed frame count equal to the ground
    truth, so frame-wise metrics stay well defined; slerp_frames=0 gives the
    no-interpolation variant. Joint has no separate per-action motions.
    """

    def fn(texts: tuple[str, str], durations: tuple[float, float], seed: int):
        request = CompositionRequest(
            prompts=((texts[0], durations[0]), (texts[1], durations[1])),
            strategy=strategy,
            slerp_frames=slerp_frames,
            stitch_mode="overwrite",
            mode=mode,
            seed=seed,
        )
        result = compose(request, generator, single_generator)
        actions = None if strategy == "joint" else result.actions
        return actions, result.motion

    return fn
