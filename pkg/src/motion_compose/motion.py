"""Motion container, canonicalization, and feature transforms.

A Motion is a timed sequence of poses over a fixed skeleton. Pose rotations
are stored in 6D form, root translation absolutely in the canonical frame
(z-up, forward +y). The flat feature layout is
[rot6d joint 0, ..., rot6d joint J-1, root xyz], width J*6 + 3.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .rotations import yaw_matrix
from .skeleton import Skeleton, forward_kinematics

STD_FLOOR = 1e-6


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Pose:
    """Single frame: per-joint 6D rotations plus root translation (meters)."""

    rot6d: np.ndarray  # (J, 6)
    root_translation: np.ndarray  # (3,)

    def __post_init__(self):
        object.__setattr__(self, "rot6d", _frozen(np.atleast_2d(self.rot6d)))
        object.__setattr__(self, "root_translation", _frozen(np.asarray(self.root_translation).reshape(3)))


class Motion:
    """Frame sequence with fps and skeleton reference. Immutable."""

    def __init__(self, rot6d: np.ndarray, root_translation: np.ndarray, fps: float, skeleton: Skeleton):
        rot6d = np.asarray(rot6d, dtype=np.float64)
        root_translation = np.asarray(root_translation, dtype=np.float64)
        if rot6d.ndim != 3 or rot6d.shape[-1] != 6:
            raise ValueError(f"rot6d must be (F, J, 6), got {rot6d.shape}")
        if rot6d.shape[0] == 0:
            raise ValueError("motion must have at least one frame")
        if root_translation.shape != (rot6d.shape[0], 3):
            raise ValueError("root_translation must be (F, 3) matching rot6d")
        if rot6d.shape[1] != skeleton.joint_count:
            raise ValueError(
                f"pose has {rot6d.shape[1]} joints, skeleton has {skeleton.joint_count}"
            )
        if fps <= 0:
            raise ValueError("fps must be positive")
        self.rot6d = _frozen(rot6d)
        self.root_translation = _frozen(root_translation)
        self.fps = float(fps)
        self.skeleton = skeleton

    def __len__(self) -> int:
        return self.rot6d.shape[0]

    @property
    def num_frames(self) -> int:
        return self.rot6d.shape[0]

    @property
    def duration_seconds(self) -> float:
        return self.num_frames / self.fps

    def pose(self, i: int) -> Pose:
        return Pose(self.rot6d[i], self.root_translation[i])

    @property
    def frames(self) -> list[Pose]:
        return [self.pose(i) for i in range(self.num_frames)]

    @classmethod
    def from_poses(cls, poses: list[Pose], fps: float, skeleton: Skeleton) -> "Motion":
        rot6d = np.stack([p.rot6d for p in poses])
        trans = np.stack([p.root_translation for p in poses])
        return cls(rot6d, trans, fps, skeleton)

    def slice_frames(self, start: int, end: int) -> "Motion":
        """Frames [start, end) as a new Motion (same fps and skeleton)."""
        if not 0 <= start < end <= self.num_frames:
            raise ValueError(f"invalid frame range [{start}, {end}) for {self.num_frames} frames")
        return Motion(self.rot6d[start:end], self.root_translation[start:end], self.fps, self.skeleton)

    def joint_positions(self) -> np.ndarray:
        """(F, J, 3) global joint positions via forward kinematics."""
        return forward_kinematics(self.rot6d, self.root_translation, self.skeleton)


def heading_angle(root_rot6d: np.ndarray) -> np.ndarray:
    """Yaw of a root rotation: angle of the body-forward axis in the xy plane.

    Zero means facing canonical forward (+y). Falls back to the body-left
    axis when forward points near vertical.
    """
    from .rotations import rot6d_to_matrix

    m = rot6d_to_matrix(root_rot6d)
    fwd = m[..., :, 1]  # body +y axis in world coordinates
    horiz = np.hypot(fwd[..., 0], fwd[..., 1])
    primary = np.arctan2(-fwd[..., 0], fwd[..., 1])
    left = m[..., :, 0]
    fallback = np.arctan2(left[..., 1], left[..., 0])
    return np.where(horiz < 1e-8, fallback, primary)


def rigid_transform(motion: Motion, yaw: float, translation: np.ndarray) -> Motion:
    """Apply one rigid transform p -> Rz(yaw) p + translation to every frame.

    Root rotations are premultiplied by the yaw rotation; non-root joint
    rotations are local and unaffected.
    """
    R = yaw_matrix(yaw)
    translation = np.asarray(translation, dtype=np.float64).reshape(3)
    new_trans = motion.root_translation @ R.T + translation
    new_rot6d = np.array(motion.rot6d)
    root_mats = R @ _root_matrices(motion)
    new_rot6d[:, 0, :3] = root_mats[:, :, 0]
    new_rot6d[:, 0, 3:] = root_mats[:, :, 1]
    return Motion(new_rot6d, new_trans, motion.fps, motion.skeleton)


def _root_matrices(motion: Motion) -> np.ndarray:
    from .rotations import rot6d_to_matrix

    return rot6d_to_matrix(motion.rot6d[:, 0, :])


def canonicalize(motion: Motion) -> Motion:
    """Rigidly move a motion so frame 0 starts at the origin facing forward.

    Frame 0's root lands at x=y=0 (height preserved) with zero heading;
    all relative frame-to-frame geometry is untouched.
    """
    theta = float(heading_angle(motion.rot6d[0, 0]))
    yaw = -theta
    t0 = motion.root_translation[0]
    R = yaw_matrix(yaw)
    translation = -R @ np.array([t0[0], t0[1], 0.0])
    return rigid_transform(motion, yaw, translation)


# ---------------------------------------------------------------------------
# Flat features and standardization


def pose_features(pose: Pose) -> np.ndarray:
    return np.concatenate([pose.rot6d.reshape(-1), pose.root_translation])


def features_to_pose(vec: np.ndarray, skeleton: Skeleton) -> Pose:
    vec = np.asarray(vec, dtype=np.float64).reshape(-1)
    if vec.shape[0] != skeleton.feature_dim:
        raise ValueError(f"expected {skeleton.feature_dim} features, got {vec.shape[0]}")
    J = skeleton.joint_count
    return Pose(vec[: J * 6].reshape(J, 6), vec[J * 6 :])


def motion_features(motion: Motion) -> np.ndarray:
    """(F, D) flat features for a whole motion."""
    F, J = motion.num_frames, motion.skeleton.joint_count
    return np.concatenate(
        [motion.rot6d.reshape(F, J * 6), motion.root_translation], axis=1
    )


def features_to_motion(feats: np.ndarray, fps: float, skeleton: Skeleton) -> Motion:
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != skeleton.feature_dim:
        raise ValueError(f"expected (F, {skeleton.feature_dim}) features, got {feats.shape}")
    J = skeleton.joint_count
    return Motion(feats[:, : J * 6].reshape(-1, J, 6), feats[:, J * 6 :], fps, skeleton)


@dataclass(frozen=True)
class FeatureStats:
    """Per-coordinate mean/std over the flat feature layout."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(np.asarray(self.mean).reshape(-1)))
        std = np.maximum(np.asarray(self.std, dtype=np.float64).reshape(-1), STD_FLOOR)
        object.__setattr__(self, "std", _frozen(std))
        if self.mean.shape != self.std.shape:
            raise ValueError("mean and std must have the same shape")

    @classmethod
    def identity(cls, dim: int) -> "FeatureStats":
        return cls(np.zeros(dim), np.ones(dim))

    @classmethod
    def from_features(cls, feats: np.ndarray) -> "FeatureStats":
        feats = np.asarray(feats, dtype=np.float64)
        return cls(feats.mean(axis=0), feats.std(axis=0))

    def apply(self, feats: np.ndarray) -> np.ndarray:
        return (np.asarray(feats, dtype=np.float64) - self.mean) / self.std

    def invert(self, feats: np.ndarray) -> np.ndarray:
        return np.asarray(feats, dtype=np.float64) * self.std + self.mean

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureStats":
        return cls(np.array(data["mean"]), np.array(data["std"]))


# ---------------------------------------------------------------------------
# Motion file format (JSON, UTF-8)


def motion_to_dict(motion: Motion, labels: list[dict] | None = None) -> dict:
    doc = {
        "fps": motion.fps,
        "skeleton": motion.skeleton.to_dict(),
        "frames": [
            {
                "root_t": motion.root_translation[f].tolist(),
                "rot6d": motion.rot6d[f].tolist(),
            }
            for f in range(motion.num_frames)
        ],
    }
    if labels is not None:
        doc["labels"] = labels
    return doc


def motion_from_dict(doc: dict) -> tuple[Motion, list[dict] | None]:
    skeleton = Skeleton.from_dict(doc["skeleton"])
    rot6d = np.array([f["rot6d"] for f in doc["frames"]], dtype=np.float64)
    trans = np.array([f["root_t"] for f in doc["frames"]], dtype=np.float64)
    motion = Motion(rot6d, trans, float(doc["fps"]), skeleton)
    return motion, doc.get("labels")


def write_json_atomic(path: str, obj: dict) -> None:
    """Write JSON via a temp file + rename so readers never see partial files."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(obj, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_motion(motion: Motion, path: str, labels: list[dict] | None = None) -> None:
    write_json_atomic(path, motion_to_dict(motion, labels))


def load_motion(path: str) -> tuple[Motion, list[dict] | None]:
    with open(path, encoding="utf-8") as fh:
        return motion_from_dict(json.load(fh))
