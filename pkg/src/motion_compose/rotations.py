"""Rotation representations and interpolation.

Conversions among the 6D continuous representation (first two columns of a
rotation matrix), 3x3 matrices, and unit quaternions (w, x, y, z), plus
quaternion slerp. Everything is vectorized over leading dimensions and
computed in float64.
"""

from __future__ import annotations

import numpy as np

# Gram-Schmidt rejects 6D inputs whose columns collapse below this norm.
DEGENERATE_EPS = 1e-8


class DegenerateRotationError(ValueError):
    """Raised when a 6D input cannot be orthonormalized."""


def rot6d_to_matrix(r6: np.ndarray) -> np.ndarray:
    """Reconstruct rotation matrices from 6D vectors via Gram-Schmidt.

    Args:
        r6: array of shape (..., 6), the first two matrix columns stacked.

    Returns:
        Rotation matrices of shape (..., 3, 3) with columns (x, y, x cross y).

    Raises:
        DegenerateRotationError: first column near zero, or second column
            near-parallel to the first.
    """
    r6 = np.asarray(r6, dtype=np.float64)
    if r6.shape[-1] != 6:
        raise ValueError(f"expected trailing dim 6, got {r6.shape}")
    a = r6[..., :3]
    b = r6[..., 3:]

    a_norm = np.linalg.norm(a, axis=-1)
    if np.any(a_norm < DEGENERATE_EPS):
        raise DegenerateRotationError("6D first column has near-zero norm")
    x = a / a_norm[..., None]

    b_proj = b - np.sum(x * b, axis=-1, keepdims=True) * x
    b_norm = np.linalg.norm(b_proj, axis=-1)
    if np.any(b_norm < DEGENERATE_EPS):
        raise DegenerateRotationError("6D columns are near-parallel")
    y = b_proj / b_norm[..., None]

    z = np.cross(x, y)
    return np.stack([x, y, z], axis=-1)


def matrix_to_rot6d(m: np.ndarray) -> np.ndarray:
    """First two columns of rotation matrices, flattened to (..., 6)."""
    m = np.asarray(m, dtype=np.float64)
    return np.concatenate([m[..., :, 0], m[..., :, 1]], axis=-1)


def identity_rot6d(num: int | None = None) -> np.ndarray:
    """6D encoding of the identity rotation, optionally tiled to (num, 6)."""
    r = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    if num is None:
        return r
    return np.tile(r, (num, 1))


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) to rotation matrix, shape (..., 3, 3)."""
    q = np.asarray(q, dtype=np.float64)
    norm = np.linalg.norm(q, axis=-1)
    if np.any(norm < DEGENERATE_EPS):
        raise DegenerateRotationError("quaternion has near-zero norm")
    q = q / norm[..., None]
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3), dtype=np.float64)
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - w * z)
    m[..., 0, 2] = 2 * (x * z + w * y)
    m[..., 1, 0] = 2 * (x * y + w * z)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - w * x)
    m[..., 2, 0] = 2 * (x * z - w * y)
    m[..., 2, 1] = 2 * (y * z + w * x)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def matrix_to_quat(m: np.ndarray) -> np.ndarray:
    """Rotation matrix to unit quaternion (w, x, y, z) with w >= 0."""
    m = np.asarray(m, dtype=np.float64)
    batch = m.shape[:-2]
    m00, m01, m02 = m[..., 0, 0], m[..., 0, 1], m[..., 0, 2]
    m10, m11, m12 = m[..., 1, 0], m[..., 1, 1], m[..., 1, 2]
    m20, m21, m22 = m[..., 2, 0], m[..., 2, 1], m[..., 2, 2]

    # Largest of the four squared components picks the numerically stable
    # reconstruction branch.
    qw2 = 1.0 + m00 + m11 + m22
    qx2 = 1.0 + m00 - m11 - m22
    qy2 = 1.0 - m00 + m11 - m22
    qz2 = 1.0 - m00 - m11 + m22
    choice = np.argmax(np.stack([qw2, qx2, qy2, qz2], axis=-1), axis=-1)

    q = np.empty(batch + (4,), dtype=np.float64)

    sw = 2.0 * np.sqrt(np.maximum(qw2, 1e-12))
    cand_w = np.stack([sw / 4, (m21 - m12) / sw, (m02 - m20) / sw, (m10 - m01) / sw], axis=-1)
    sx = 2.0 * np.sqrt(np.maximum(qx2, 1e-12))
    cand_x = np.stack([(m21 - m12) / sx, sx / 4, (m01 + m10) / sx, (m02 + m20) / sx], axis=-1)
    sy = 2.0 * np.sqrt(np.maximum(qy2, 1e-12))
    cand_y = np.stack([(m02 - m20) / sy, (m01 + m10) / sy, sy / 4, (m12 + m21) / sy], axis=-1)
    sz = 2.0 * np.sqrt(np.maximum(qz2, 1e-12))
    cand_z = np.stack([(m10 - m01) / sz, (m02 + m20) / sz, (m12 + m21) / sz, sz / 4], axis=-1)

    for idx, cand in enumerate([cand_w, cand_x, cand_y, cand_z]):
        mask = choice == idx
        q[mask] = cand[mask]

    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    # Canonical sign: non-negative scalar part.
    flip = q[..., 0] < 0
    q[flip] = -q[flip]
    return q


def rot6d_to_quat(r6: np.ndarray) -> np.ndarray:
    return matrix_to_quat(rot6d_to_matrix(r6))


def quat_to_rot6d(q: np.ndarray) -> np.ndarray:
    return matrix_to_rot6d(quat_to_matrix(q))


_CONVERTERS = {
    ("rot6d", "matrix"): rot6d_to_matrix,
    ("matrix", "rot6d"): matrix_to_rot6d,
    ("quat", "matrix"): quat_to_matrix,
    ("matrix", "quat"): matrix_to_quat,
    ("rot6d", "quat"): rot6d_to_quat,
    ("quat", "rot6d"): quat_to_rot6d,
}


def rotation_convert(value: np.ndarray, from_repr: str, to_repr: str) -> np.ndarray:
    """Convert a rotation between representations.

    Supported names: "rot6d", "matrix", "quat". Identity conversions pass the
    value through a matrix roundtrip so the output is always well-formed.
    """
    for name in (from_repr, to_repr):
        if name not in ("rot6d", "matrix", "quat"):
            raise ValueError(f"unknown rotation representation: {name!r}")
    if from_repr == to_repr:
        mat = rotation_convert(value, from_repr, "matrix") if from_repr != "matrix" else np.asarray(value, dtype=np.float64)
        return rotation_convert(mat, "matrix", to_repr) if to_repr != "matrix" else mat
    return _CONVERTERS[(from_repr, to_repr)](value)


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Hamilton product q1 * q2 in (w, x, y, z) order."""
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    w1, x1, y1, z1 = q1[..., 0], q1[..., 1], q1[..., 2], q1[..., 3]
    w2, x2, y2, z2 = q2[..., 0], q2[..., 1], q2[..., 2], q2[..., 3]
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def axis_angle_to_quat(axis: np.ndarray, angle: float | np.ndarray) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    angle = np.asarray(angle, dtype=np.float64)
    half = angle / 2.0
    return np.concatenate(
        [np.cos(half)[..., None], np.sin(half)[..., None] * axis], axis=-1
    )


def quat_to_axis_angle(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decompose unit quaternions into (axis, angle) with angle in [0, pi]."""
    q = np.asarray(q, dtype=np.float64)
    flip = q[..., 0] < 0
    q = np.where(flip[..., None], -q, q)
    v = q[..., 1:]
    v_norm = np.linalg.norm(v, axis=-1)
    angle = 2.0 * np.arctan2(v_norm, q[..., 0])
    safe = np.maximum(v_norm, 1e-12)
    axis = v / safe[..., None]
    # Zero rotation has no axis; pick x for determinism.
    axis = np.where(v_norm[..., None] < 1e-12, np.array([1.0, 0.0, 0.0]), axis)
    return axis, angle


def quat_angle(q0: np.ndarray, q1: np.ndarray) -> np.ndarray:
    """Geodesic angle between two unit quaternions (double cover resolved)."""
    dot = np.abs(np.sum(np.asarray(q0) * np.asarray(q1), axis=-1))
    return 2.0 * np.arccos(np.clip(dot, -1.0, 1.0))


def slerp(q0: np.ndarray, q1: np.ndarray, t: float | np.ndarray) -> np.ndarray:
    """Spherical linear interpolation along the shortest geodesic.

    Args:
        q0, q1: unit quaternions (..., 4).
        t: interpolation parameter in [0, 1], broadcastable.

    Returns:
        Unit quaternion at parameter t; equals q0 at t=0 and q1 (up to sign)
        at t=1, with constant angular velocity along the path.
    """
    q0 = np.asarray(q0, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)

    dot = np.sum(q0 * q1, axis=-1)
    # Double cover: interpolate toward the closer of +-q1.
    q1 = np.where(dot[..., None] < 0, -q1, q1)
    dot = np.abs(dot)
    dot = np.clip(dot, -1.0, 1.0)

    theta = np.arccos(dot)
    sin_theta = np.sin(theta)

    # Nearly parallel inputs: fall back to normalized lerp.
    near = sin_theta < 1e-9
    safe_sin = np.where(near, 1.0, sin_theta)
    w0 = np.where(near, 1.0 - t, np.sin((1.0 - t) * theta) / safe_sin)
    w1 = np.where(near, t, np.sin(t * theta) / safe_sin)

    out = w0[..., None] * q0 + w1[..., None] * q1
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def yaw_matrix(angle: float | np.ndarray) -> np.ndarray:
    """Rotation about the vertical (z) axis, shape (..., 3, 3)."""
    angle = np.asarray(angle, dtype=np.float64)
    c, s = np.cos(angle), np.sin(angle)
    m = np.zeros(angle.shape + (3, 3), dtype=np.float64)
    m[..., 0, 0] = c
    m[..., 0, 1] = -s
    m[..., 1, 0] = s
    m[..., 1, 1] = c
    m[..., 2, 2] = 1.0
    return m
