"""Skeleton definition and forward kinematics.

Coordinate convention used throughout the package: z is up, the canonical
forward direction is +y, and +x is the character's left. Offsets are meters
from the parent joint in the parent's local frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rotations import rot6d_to_matrix


@dataclass(frozen=True)
class Joint:
    name: str
    parent: int | None
    offset: tuple[float, float, float]


@dataclass(frozen=True)
class Skeleton:
    """Joint hierarchy in topological order (parent index < joint index)."""

    joints: tuple[Joint, ...]
    _offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.joints) < 2:
            raise ValueError("skeleton needs at least 2 joints")
        if self.joints[0].parent is not None:
            raise ValueError("joint 0 must be the root (no parent)")
        for j, joint in enumerate(self.joints[1:], start=1):
            if joint.parent is None:
                raise ValueError(f"joint {j} ({joint.name}): only the root may lack a parent")
            if not 0 <= joint.parent < j:
                raise ValueError(f"joint {j} ({joint.name}): parent index must precede it")
        offsets = np.array([j.offset for j in self.joints], dtype=np.float64)
        offsets.flags.writeable = False
        object.__setattr__(self, "_offsets", offsets)

    @property
    def joint_count(self) -> int:
        return len(self.joints)

    @property
    def names(self) -> list[str]:
        return [j.name for j in self.joints]

    @property
    def parents(self) -> list[int | None]:
        return [j.parent for j in self.joints]

    @property
    def offsets(self) -> np.ndarray:
        """(J, 3) offsets in meters."""
        return self._offsets

    @property
    def feature_dim(self) -> int:
        """Width of the flat pose feature vector: 6 per joint + root xyz."""
        return self.joint_count * 6 + 3

    def index(self, name: str) -> int:
        return self.names.index(name)

    def rest_positions(self) -> np.ndarray:
        """(J, 3) joint positions with identity rotations and root at origin."""
        pos = np.zeros((self.joint_count, 3))
        for j, joint in enumerate(self.joints):
            if joint.parent is not None:
                pos[j] = pos[joint.parent] + self._offsets[j]
        return pos

    def to_dict(self) -> dict:
        return {
            "joints": [
                {"name": j.name, "parent": j.parent, "offset": list(j.offset)}
                for j in self.joints
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Skeleton":
        joints = tuple(
            Joint(j["name"], j["parent"], tuple(float(v) for v in j["offset"]))
            for j in data["joints"]
        )
        return cls(joints)


def default_skeleton() -> Skeleton:
    """Fixed 22-joint humanoid (~1.7 m tall) used by the synthetic corpus."""
    j = [
        ("pelvis", None, (0.0, 0.0, 0.95)),
        ("spine1", 0, (0.0, 0.0, 0.10)),
        ("spine2", 1, (0.0, 0.0, 0.12)),
        ("chest", 2, (0.0, 0.0, 0.12)),
        ("neck", 3, (0.0, 0.0, 0.10)),
        ("head", 4, (0.0, 0.0, 0.15)),
        ("left_shoulder", 3, (0.18, 0.0, 0.05)),
        ("left_elbow", 6, (0.28, 0.0, 0.0)),
        ("left_wrist", 7, (0.25, 0.0, 0.0)),
        ("left_hand", 8, (0.09, 0.0, 0.0)),
        ("right_shoulder", 3, (-0.18, 0.0, 0.05)),
        ("right_elbow", 10, (-0.28, 0.0, 0.0)),
        ("right_wrist", 11, (-0.25, 0.0, 0.0)),
        ("right_hand", 12, (-0.09, 0.0, 0.0)),
        ("left_hip", 0, (0.10, 0.0, -0.05)),
        ("left_knee", 14, (0.0, 0.0, -0.42)),
        ("left_ankle", 15, (0.0, 0.0, -0.42)),
        ("left_foot", 16, (0.0, 0.14, -0.06)),
        ("right_hip", 0, (-0.10, 0.0, -0.05)),
        ("right_knee", 18, (0.0, 0.0, -0.42)),
        ("right_ankle", 19, (0.0, 0.0, -0.42)),
        ("right_foot", 20, (0.0, 0.14, -0.06)),
    ]
    return Skeleton(tuple(Joint(name, parent, offset) for name, parent, offset in j))


def forward_kinematics(
    rot6d: np.ndarray, root_translation: np.ndarray, skeleton: Skeleton
) -> np.ndarray:
    """Global joint positions from local 6D rotations.

    Each joint sits at its parent's position plus the parent's global
    rotation applied to the joint offset; the root sits at root_translation.

    Args:
        rot6d: (..., J, 6) local joint rotations.
        root_translation: (..., 3) root position in meters.
        skeleton: hierarchy providing parents and offsets.

    Returns:
        (..., J, 3) global joint positions.
    """
    rot6d = np.asarray(rot6d, dtype=np.float64)
    root_translation = np.asarray(root_translation, dtype=np.float64)
    J = skeleton.joint_count
    if rot6d.shape[-2] != J:
        raise ValueError(f"pose has {rot6d.shape[-2]} joints, skeleton has {J}")

    local = rot6d_to_matrix(rot6d)  # (..., J, 3, 3)
    offsets = skeleton.offsets

    global_rot = np.empty_like(local)
    positions = np.empty(rot6d.shape[:-1] + (3,), dtype=np.float64)
    global_rot[..., 0, :, :] = local[..., 0, :, :]
    positions[..., 0, :] = root_translation
    for j in range(1, J):
        p = skeleton.joints[j].parent
        parent_rot = global_rot[..., p, :, :]
        global_rot[..., j, :, :] = parent_rot @ local[..., j, :, :]
        positions[..., j, :] = positions[..., p, :] + np.einsum(
            "...ij,j->...i", parent_rot, offsets[j]
        )
    return positions
