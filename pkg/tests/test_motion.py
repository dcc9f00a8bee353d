import numpy as np
import pytest

from motion_compose.motion import (
    FeatureStats,
    Motion,
    canonicalize,
    features_to_motion,
    features_to_pose,
    heading_angle,
    load_motion,
    motion_features,
    pose_features,
    rigid_transform,
    save_motion,
)
from motion_compose.rotations import axis_angle_to_quat, identity_rot6d, quat_to_rot6d
from motion_compose.skeleton import default_skeleton


def make_motion(num_frames=5, seed=0, fps=30.0):
    sk = default_skeleton()
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(num_frames, 22, 4))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    rot6d = quat_to_rot6d(q)
    trans = rng.normal(size=(num_frames, 3))
    return Motion(rot6d, trans, fps, sk)


def rest_motion(num_frames=4, fps=30.0):
    sk = default_skeleton()
    rot = np.stack([identity_rot6d(22)] * num_frames)
    trans = np.zeros((num_frames, 3))
    trans[:, 2] = 0.95
    return Motion(rot, trans, fps, sk)


class TestMotionBasics:
    def test_duration(self):
        m = make_motion(num_frames=60, fps=30.0)
        assert len(m) == 60
        assert m.duration_seconds == pytest.approx(2.0)

    def test_empty_rejected(self):
        sk = default_skeleton()
        with pytest.raises(ValueError):
            Motion(np.zeros((0, 22, 6)), np.zeros((0, 3)), 30.0, sk)

    def test_joint_mismatch_rejected(self):
        sk = default_skeleton()
        with pytest.raises(ValueError):
            Motion(np.tile(identity_rot6d(3), (4, 1, 1)), np.zeros((4, 3)), 30.0, sk)

    def test_immutable(self):
        m = make_motion()
        with pytest.raises(ValueError):
            m.rot6d[0, 0, 0] = 2.0

    def test_slice(self):
        m = make_motion(num_frames=10)
        s = m.slice_frames(2, 7)
        assert len(s) == 5
        np.testing.assert_array_equal(s.rot6d, m.rot6d[2:7])

    def test_from_poses_roundtrip(self):
        m = make_motion(num_frames=3)
        again = Motion.from_poses(m.frames, m.fps, m.skeleton)
        np.testing.assert_array_equal(again.rot6d, m.rot6d)


class TestHeading:
    def test_identity_faces_forward(self):
        assert heading_angle(identity_rot6d()) == pytest.approx(0.0)

    def test_yaw_extraction(self):
        for theta in (-2.5, -0.5, 0.3, 1.2, 3.0):
            r6 = quat_to_rot6d(axis_angle_to_quat([0, 0, 1], theta))
            got = float(heading_angle(r6))
            assert np.angle(np.exp(1j * (got - theta))) == pytest.approx(0.0, abs=1e-9)

    def test_forward_near_vertical_fallback(self):
        # pitch the body forward axis straight up, then yaw; heading survives
        q_pitch = axis_angle_to_quat([1, 0, 0], -np.pi / 2)
        from motion_compose.rotations import quat_multiply

        for theta in (0.0, 0.9):
            q = quat_multiply(axis_angle_to_quat([0, 0, 1], theta), q_pitch)
            got = float(heading_angle(quat_to_rot6d(q)))
            assert np.angle(np.exp(1j * (got - theta))) == pytest.approx(0.0, abs=1e-9)


class TestCanonicalize:
    def test_already_canonical_unchanged(self):
        m = rest_motion()
        out = canonicalize(m)
        np.testing.assert_allclose(out.rot6d, m.rot6d, atol=1e-9)
        np.testing.assert_allclose(out.root_translation, m.root_translation, atol=1e-9)

    def test_recovers_known_transform(self):
        m = canonicalize(make_motion(num_frames=8, seed=3))
        moved = rigid_transform(m, 1.1, np.array([2.0, -1.0, 0.0]))
        recovered = canonicalize(moved)
        np.testing.assert_allclose(recovered.rot6d, m.rot6d, atol=1e-9)
        np.testing.assert_allclose(recovered.root_translation, m.root_translation, atol=1e-9)

    def test_zeroes_xy_keeps_z(self):
        m = make_motion(num_frames=4, seed=9)
        trans = np.array(m.root_translation)
        trans[0] = [5.0, 5.0, 1.0]
        m = Motion(m.rot6d, trans, m.fps, m.skeleton)
        out = canonicalize(m)
        np.testing.assert_allclose(out.root_translation[0], [0.0, 0.0, 1.0], atol=1e-12)

    def test_idempotent(self):
        m = make_motion(num_frames=6, seed=4)
        once = canonicalize(m)
        twice = canonicalize(once)
        np.testing.assert_allclose(once.rot6d, twice.rot6d, atol=1e-9)
        np.testing.assert_allclose(once.root_translation, twice.root_translation, atol=1e-9)

    def test_preserves_relative_geometry(self):
        m = make_motion(num_frames=5, seed=11)
        out = canonicalize(m)
        pos_before = m.joint_positions()
        pos_after = out.joint_positions()
        # pairwise within-frame joint distances are rigid-invariant
        d_before = np.linalg.norm(pos_before[:, :, None] - pos_before[:, None], axis=-1)
        d_after = np.linalg.norm(pos_after[:, :, None] - pos_after[:, None], axis=-1)
        np.testing.assert_allclose(d_before, d_after, atol=1e-9)


class TestFeatures:
    def test_pose_roundtrip(self):
        m = make_motion(num_frames=1, seed=5)
        p = m.pose(0)
        vec = pose_features(p)
        assert vec.shape == (22 * 6 + 3,)
        back = features_to_pose(vec, m.skeleton)
        np.testing.assert_array_equal(back.rot6d, p.rot6d)
        np.testing.assert_array_equal(back.root_translation, p.root_translation)

    def test_motion_roundtrip(self):
        m = make_motion(num_frames=7, seed=6)
        feats = motion_features(m)
        back = features_to_motion(feats, m.fps, m.skeleton)
        np.testing.assert_array_equal(back.rot6d, m.rot6d)
        np.testing.assert_array_equal(back.root_translation, m.root_translation)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            features_to_pose(np.zeros(10), default_skeleton())


class TestFeatureStats:
    def test_identity_stats(self):
        stats = FeatureStats.identity(5)
        x = np.arange(5, dtype=float)
        np.testing.assert_array_equal(stats.apply(x), x)

    def test_inverse_pair(self):
        rng = np.random.default_rng(2)
        feats = rng.normal(size=(20, 9)) * 3 + 1
        stats = FeatureStats.from_features(feats)
        x = rng.normal(size=(4, 9))
        np.testing.assert_allclose(stats.invert(stats.apply(x)), x, atol=1e-9)

    def test_matches_direct_formula(self):
        feats = np.array([[1.0, 2.0], [3.0, 2.0], [5.0, 8.0]])
        stats = FeatureStats.from_features(feats)
        np.testing.assert_allclose(stats.mean, [3.0, 4.0])
        np.testing.assert_allclose(
            stats.std,
            [np.sqrt(((1 - 3) ** 2 + 0 + (5 - 3) ** 2) / 3), np.sqrt((4 + 4 + 16) / 3)],
        )

    def test_std_floor(self):
        feats = np.ones((10, 3))
        stats = FeatureStats.from_features(feats)
        assert np.all(stats.std >= 1e-6)
        np.testing.assert_allclose(stats.invert(stats.apply(feats)), feats, atol=1e-9)


class TestMotionFile:
    def test_save_load_roundtrip(self, tmp_path):
        m = make_motion(num_frames=6, seed=8)
        labels = [{"text": "walk forward", "start_frame": 0, "end_frame": 6}]
        path = str(tmp_path / "motion.json")
        save_motion(m, path, labels)
        loaded, got_labels = load_motion(path)
        np.testing.assert_array_equal(loaded.rot6d, m.rot6d)
        np.testing.assert_array_equal(loaded.root_translation, m.root_translation)
        assert loaded.fps == m.fps
        assert loaded.skeleton == m.skeleton
        assert got_labels == labels

    def test_labels_optional(self, tmp_path):
        m = rest_motion()
        path = str(tmp_path / "m.json")
        save_motion(m, path)
        _, labels = load_motion(path)
        assert labels is None
