"""Labeled-segment storage, action-pair extraction, and the synthetic corpus.

Sequences carry overlapping text-labeled frame intervals. Training pairs come
from two sources: directly overlapping action segments (shared frames split
at the overlap midpoint, extra frame to the first member) and action pairs
bridged by a "transition" segment (transition frames concatenated onto the
second member). Transitions and t-pose/a-pose labels never pair themselves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .motion import Motion, canonicalize, load_motion, save_motion, write_json_atomic
from .skeleton import Skeleton, default_skeleton
from . import synth as _synth

TRANSITION_LABEL = "transition"
EXCLUDED_LABELS = ("t-pose", "a-pose")


class InvalidRecordError(ValueError):
    """A sequence whose frames are not fully covered by segments."""


@dataclass(frozen=True)
class LabeledSegment:
    """Frame interval [start_frame, end_frame) with an action description."""

    text: str
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if not 0 <= self.start_frame < self.end_frame:
            raise ValueError(f"bad segment interval [{self.start_frame}, {self.end_frame})")

    @property
    def is_transition(self) -> bool:
        return self.text.strip().lower() == TRANSITION_LABEL

    @property
    def is_excluded_pose(self) -> bool:
        return self.text.strip().lower() in EXCLUDED_LABELS

    def overlaps(self, other: "LabeledSegment") -> bool:
        return self.start_frame < other.end_frame and other.start_frame < self.end_frame

    def contains(self, other: "LabeledSegment") -> bool:
        return self.start_frame <= other.start_frame and other.end_frame <= self.end_frame


@dataclass(frozen=True)
class SequenceRecord:
    motion: Motion
    segments: tuple[LabeledSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    def validate_coverage(self) -> None:
        """Every frame must belong to at least one segment."""
        F = self.motion.num_frames
        covered = np.zeros(F, dtype=bool)
        for seg in self.segments:
            covered[seg.start_frame : min(seg.end_frame, F)] = True
        if not covered.all():
            first = int(np.argmin(covered))
            raise InvalidRecordError(f"frame {first} of {F} is not covered by any segment")


@dataclass(frozen=True)
class ActionPair:
    """Two temporally contiguous labeled motions cut from one sequence."""

    motion_1: Motion
    text_1: str
    motion_2: Motion
    text_2: str
    source: str  # "overlap" | "transition-bridge"
    frame_span: tuple[int, int, int] = (0, 0, 0)  # (m1 start, split, m2 end) in the source

    @property
    def total_frames(self) -> int:
        return self.motion_1.num_frames + self.motion_2.num_frames


@dataclass(frozen=True)
class ActionSample:
    """Single labeled motion used by independent-baseline training."""

    motion: Motion
    text: str


def extract_pairs(record: SequenceRecord) -> list[ActionPair]:
    """All action pairs of a sequence, sorted by (first start, second start).

    Overlap pairs: segments that intersect without either containing the
    other (equal intervals excluded); shared frames split at the overlap
    midpoint, odd overlap giving the extra frame to the first member.
    Transition bridges: for each transition, the nearest non-transition
    predecessor/successor by start frame form a pair, with the transition
    frames folded into the second member. A bridged pair suppresses the
    direct-overlap pair of the same two segments.
    """
    record.validate_coverage()
    motion = record.motion

    actions = [
        (i, s)
        for i, s in enumerate(record.segments)
        if not s.is_transition and not s.is_excluded_pose
    ]
    transitions = [s for s in record.segments if s.is_transition]

    spans: list[tuple[int, int, tuple]] = []  # (first idx, second idx, payload)
    bridged_keys: set[tuple[int, int]] = set()
    for t in transitions:
        touching = [(i, a) for i, a in actions if a.overlaps(t)]
        preds = [(i, a) for i, a in touching if a.start_frame <= t.start_frame]
        succs = [(i, a) for i, a in touching if a.start_frame > t.start_frame]
        if not preds or not succs:
            continue
        pi, pred = max(preds, key=lambda ia: (ia[1].start_frame, ia[1].end_frame, ia[0]))
        si, succ = min(succs, key=lambda ia: (ia[1].start_frame, ia[1].end_frame, ia[0]))
        if pred.contains(succ) or succ.contains(pred) or succ.end_frame <= pred.end_frame:
            continue
        if (pi, si) in bridged_keys:
            continue
        bridged_keys.add((pi, si))
        spans.append(
            (pi, si, (pred.start_frame, pred.end_frame, succ.end_frame, pred.text, succ.text, "transition-bridge"))
        )
    for idx, (ia, a) in enumerate(actions):
        for ib, b in actions[idx + 1 :]:
            if not a.overlaps(b) or a.contains(b) or b.contains(a):
                continue
            (fi, first), (se, second) = ((ia, a), (ib, b)) if a.start_frame < b.start_frame else ((ib, b), (ia, a))
            if (fi, se) in bridged_keys:
                continue
            ov_len = first.end_frame - second.start_frame
            mid = second.start_frame + (ov_len + 1) // 2
            spans.append(
                (fi, se, (first.start_frame, mid, second.end_frame, first.text, second.text, "overlap"))
            )

    pairs = []
    for _, _, (m1_start, split, m2_end, text_1, text_2, source) in spans:
        pairs.append(
            ActionPair(
                motion_1=motion.slice_frames(m1_start, split),
                text_1=text_1,
                motion_2=motion.slice_frames(split, m2_end),
                text_2=text_2,
                source=source,
                frame_span=(m1_start, split, m2_end),
            )
        )
    pairs.sort(key=lambda p: (p.frame_span[0], p.frame_span[1]))
    return pairs


def filter_and_resample(
    motion: Motion,
    target_fps: float = 30.0,
    min_dur: float = 0.3,
    max_dur_pair: float = 25.0,
    max_dur_single: float = 5.0,
    crop_seed: int | None = None,
    role: str = "single",
) -> Motion | None:
    """Duration gate + fps normalization. Returns None for rejected motions.

    Pair candidates (role="pair") outside [min_dur, max_dur_pair] are
    rejected. Single segments (role="single") below min_dur are rejected and
    above max_dur_single are cropped to a seeded random window.
    """
    if role not in ("single", "pair"):
        raise ValueError(f"unknown role {role!r}")
    if motion.fps < target_fps - 1e-9:
        raise ValueError(f"cannot upsample {motion.fps} fps to {target_fps}")

    stride = int(round(motion.fps / target_fps))
    if abs(motion.fps / stride - target_fps) > 1e-6:
        raise ValueError(f"{motion.fps} fps is not an integer multiple of {target_fps}")
    if stride > 1:
        motion = Motion(
            motion.rot6d[::stride], motion.root_translation[::stride], target_fps, motion.skeleton
        )

    dur = motion.duration_seconds
    if dur < min_dur:
        return None
    if role == "pair":
        return None if dur > max_dur_pair else motion
    if dur > max_dur_single:
        window = int(round(max_dur_single * target_fps))
        rng = np.random.default_rng(crop_seed)
        start = int(rng.integers(0, motion.num_frames - window + 1))
        motion = motion.slice_frames(start, start + window)
    return motion


def synth_generate(
    action_spec: list[tuple[str, float]],
    seed: int,
    fps: float = 30.0,
    skeleton: Skeleton | None = None,
) -> SequenceRecord:
    """Procedural labeled sequence for the given (action name, seconds) list.

    Deterministic given the seed: consecutive actions are stitched with a
    seeded 0.2-0.6 s overlap and blended across it, and each segment gets a
    seeded phrasing of its action name.
    """
    return _synth.generate_record(action_spec, seed, fps, skeleton or default_skeleton())


def synth_action_names() -> list[str]:
    return _synth.action_names()


def batch_iterator(items: list, batch_size: int, shuffle_seed: int):
    """One epoch of batches over a seeded permutation; the tail batch may be short."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if not items:
        raise ValueError("empty dataset")
    order = np.random.default_rng(shuffle_seed).permutation(len(items))
    for i in range(0, len(items), batch_size):
        yield [items[j] for j in order[i : i + batch_size]]


# ---------------------------------------------------------------------------
# Corpus on disk


@dataclass(frozen=True)
class CorpusManifest:
    fps: float
    entries: tuple[tuple[str, str], ...]  # (path, split)

    def __post_init__(self):
        for _, split in self.entries:
            if split not in ("train", "val"):
                raise ValueError(f"unknown split {split!r}")

    def paths(self, split: str) -> list[str]:
        return [p for p, s in self.entries if s == split]


def save_manifest(manifest: CorpusManifest, path: str) -> None:
    write_json_atomic(
        path,
        {"fps": manifest.fps, "entries": [{"path": p, "split": s} for p, s in manifest.entries]},
    )


def load_manifest(path: str) -> CorpusManifest:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return CorpusManifest(
        fps=float(doc["fps"]),
        entries=tuple((e["path"], e["split"]) for e in doc["entries"]),
    )


def load_record(path: str) -> SequenceRecord:
    motion, labels = load_motion(path)
    if not labels:
        raise InvalidRecordError(f"{path} has no labels")
    segments = tuple(
        LabeledSegment(l["text"], int(l["start_frame"]), int(l["end_frame"])) for l in labels
    )
    return SequenceRecord(motion, segments)


def save_record(record: SequenceRecord, path: str) -> None:
    labels = [
        {"text": s.text, "start_frame": s.start_frame, "end_frame": s.end_frame}
        for s in record.segments
    ]
    save_motion(record.motion, path, labels)


def load_corpus(manifest: CorpusManifest, base_dir: str = "") -> dict[str, list[SequenceRecord]]:
    import os

    out: dict[str, list[SequenceRecord]] = {"train": [], "val": []}
    for path, split in manifest.entries:
        full = path if os.path.isabs(path) or not base_dir else os.path.join(base_dir, path)
        out[split].append(load_record(full))
    return out


def generate_corpus(
    out_dir: str,
    seed: int,
    num_records: int | None = None,
    action_specs: list[list[tuple[str, float]]] | None = None,
    fps: float = 30.0,
    val_fraction: float = 0.2,
    min_actions: int = 2,
    max_actions: int = 3,
    min_duration: float = 1.2,
    max_duration: float = 3.0,
) -> str:
    """Write a synthetic corpus (motion files + manifest.json) and return the manifest path.

    Either an explicit list of per-record action specs or a record count for
    seeded random specs drawn from the built-in action vocabulary.
    """
    import os

    if (num_records is None) == (action_specs is None):
        raise ValueError("pass exactly one of num_records or action_specs")
    rng = np.random.default_rng(seed)
    if action_specs is None:
        action_specs = _synth.random_action_specs(
            rng, num_records, min_actions, max_actions, min_duration, max_duration
        )

    os.makedirs(out_dir, exist_ok=True)
    entries = []
    if val_fraction <= 0 or len(action_specs) <= 1:
        n_val = 0
    else:
        n_val = max(1, int(round(len(action_specs) * val_fraction)))
    for i, spec in enumerate(action_specs):
        record = synth_generate(spec, seed=int(rng.integers(0, 2**31 - 1)), fps=fps)
        name = f"record_{i:05d}.json"
        save_record(record, os.path.join(out_dir, name))
        split = "val" if i >= len(action_specs) - n_val else "train"
        entries.append((name, split))
    manifest = CorpusManifest(fps=fps, entries=tuple(entries))
    manifest_path = os.path.join(out_dir, "manifest.json")
    save_manifest(manifest, manifest_path)
    return manifest_path


# ---------------------------------------------------------------------------
# Training-set preparation


def prepare_pairs(
    records: list[SequenceRecord],
    target_fps: float = 30.0,
    min_dur: float = 0.3,
    max_dur_pair: float = 25.0,
    canonical: bool = True,
) -> list[ActionPair]:
    """Extract, duration-filter, and canonicalize training pairs.

    Each surviving pair is canonicalized as one contiguous motion anchored at
    the first frame of its first member, then split back at the original
    boundary, so the second member stays expressed relative to the first.
    """
    out = []
    for record in records:
        for pair in extract_pairs(record):
            combined = concat_motions(pair.motion_1, pair.motion_2)
            kept = filter_and_resample(
                combined, target_fps=target_fps, min_dur=min_dur,
                max_dur_pair=max_dur_pair, role="pair",
            )
            if kept is None:
                continue
            if canonical:
                kept = canonicalize(kept)
            split = pair.motion_1.num_frames
            out.append(
                ActionPair(
                    motion_1=kept.slice_frames(0, split),
                    text_1=pair.text_1,
                    motion_2=kept.slice_frames(split, kept.num_frames),
                    text_2=pair.text_2,
                    source=pair.source,
                    frame_span=pair.frame_span,
                )
            )
    return out


def prepare_singles(
    records: list[SequenceRecord],
    target_fps: float = 30.0,
    min_dur: float = 0.3,
    max_dur_single: float = 5.0,
    crop_seed: int = 0,
    canonical: bool = True,
) -> list[ActionSample]:
    """Per-segment training items for the independent baseline, each canonicalized alone."""
    out = []
    for ri, record in enumerate(records):
        for si, seg in enumerate(record.segments):
            if seg.is_transition or seg.is_excluded_pose:
                continue
            end = min(seg.end_frame, record.motion.num_frames)
            sliced = record.motion.slice_frames(seg.start_frame, end)
            item_seed = int(np.random.SeedSequence([crop_seed, ri, si]).generate_state(1)[0])
            kept = filter_and_resample(
                sliced, target_fps=target_fps, min_dur=min_dur,
                max_dur_single=max_dur_single, crop_seed=item_seed, role="single",
            )
            if kept is None:
                continue
            if canonical:
                kept = canonicalize(kept)
            out.append(ActionSample(motion=kept, text=seg.text))
    return out


def concat_motions(a: Motion, b: Motion) -> Motion:
    if a.skeleton != b.skeleton or a.fps != b.fps:
        raise ValueError("cannot concatenate motions with different skeletons or fps")
    return Motion(
        np.concatenate([a.rot6d, b.rot6d]),
        np.concatenate([a.root_translation, b.root_translation]),
        a.fps,
        a.skeleton,
    )
