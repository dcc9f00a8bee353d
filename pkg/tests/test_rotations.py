import numpy as np
import pytest

from motion_compose.rotations import (
    DegenerateRotationError,
    axis_angle_to_quat,
    matrix_to_quat,
    matrix_to_rot6d,
    quat_angle,
    quat_to_matrix,
    rot6d_to_matrix,
    rotation_convert,
    slerp,
    yaw_matrix,
)

from oracles import gram_schmidt_matrix, slerp_via_axis_angle


def random_quats(n, seed):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return q


def random_matrices(n, seed):
    return quat_to_matrix(random_quats(n, seed))


class TestRot6d:
    def test_identity(self):
        r6 = np.array([1.0, 0, 0, 0, 1, 0])
        np.testing.assert_allclose(rot6d_to_matrix(r6), np.eye(3), atol=1e-12)

    def test_analytic_gram_schmidt(self):
        # second column (1,1,0) projects to e2 after removing the e1 component
        r6 = np.array([1.0, 0, 0, 1, 1, 0])
        np.testing.assert_allclose(rot6d_to_matrix(r6), np.eye(3), atol=1e-12)

    def test_roundtrip_matches_direct_oracle(self):
        mats = random_matrices(100, seed=1234)
        r6 = matrix_to_rot6d(mats)
        back = rot6d_to_matrix(r6)
        for i in range(100):
            expected = gram_schmidt_matrix(r6[i])
            np.testing.assert_allclose(back[i], expected, atol=1e-12)
            np.testing.assert_allclose(back[i], mats[i], atol=1e-6)

    def test_reconstruction_is_rotation(self):
        rng = np.random.default_rng(7)
        r6 = rng.normal(size=(500, 6))
        m = rot6d_to_matrix(r6)
        eye = np.einsum("nij,nik->njk", m, m)
        np.testing.assert_allclose(eye, np.tile(np.eye(3), (500, 1, 1)), atol=1e-6)
        np.testing.assert_allclose(np.linalg.det(m), 1.0, atol=1e-6)

    def test_idempotent_after_one_pass(self):
        rng = np.random.default_rng(8)
        r6 = rng.normal(size=(50, 6))
        once = matrix_to_rot6d(rot6d_to_matrix(r6))
        twice = matrix_to_rot6d(rot6d_to_matrix(once))
        np.testing.assert_allclose(once, twice, atol=1e-12)

    def test_degenerate_first_column(self):
        with pytest.raises(DegenerateRotationError):
            rot6d_to_matrix(np.array([0.0, 0, 0, 0, 1, 0]))

    def test_degenerate_parallel_columns(self):
        with pytest.raises(DegenerateRotationError):
            rot6d_to_matrix(np.array([1.0, 0, 0, 2.0, 0, 0]))


class TestQuaternions:
    def test_matrix_roundtrip(self):
        q = random_quats(200, seed=5)
        m = quat_to_matrix(q)
        q_back = matrix_to_quat(m)
        # same rotation up to sign; outputs carry w >= 0
        assert np.all(q_back[:, 0] >= 0)
        dots = np.abs(np.sum(q * q_back, axis=1))
        np.testing.assert_allclose(dots, 1.0, atol=1e-9)

    def test_unit_norm_output(self):
        m = random_matrices(100, seed=11)
        q = matrix_to_quat(m)
        np.testing.assert_allclose(np.linalg.norm(q, axis=1), 1.0, atol=1e-12)

    def test_180_degree_rotations(self):
        # trace = -1 exercises the non-w reconstruction branches
        for axis in (np.eye(3)):
            q = axis_angle_to_quat(axis, np.pi)
            m = quat_to_matrix(q)
            q_back = matrix_to_quat(m)
            np.testing.assert_allclose(quat_to_matrix(q_back), m, atol=1e-9)

    def test_zero_quaternion_rejected(self):
        with pytest.raises(DegenerateRotationError):
            quat_to_matrix(np.zeros(4))


class TestRotationConvert:
    def test_dispatch_all_routes(self):
        m = random_matrices(10, seed=3)
        for from_repr, value in [("matrix", m), ("rot6d", matrix_to_rot6d(m)), ("quat", matrix_to_quat(m))]:
            for to_repr in ("matrix", "rot6d", "quat"):
                out = rotation_convert(value, from_repr, to_repr)
                back = rotation_convert(out, to_repr, "matrix")
                np.testing.assert_allclose(back, m, atol=1e-9)

    def test_unknown_repr(self):
        with pytest.raises(ValueError):
            rotation_convert(np.eye(3), "matrix", "euler")


class TestSlerp:
    def test_same_quaternion(self):
        q = random_quats(1, seed=2)[0]
        np.testing.assert_allclose(slerp(q, q, 0.5), q, atol=1e-12)

    def test_halfway_constant_axis(self):
        q0 = axis_angle_to_quat([0, 0, 1], 0.0)
        q1 = axis_angle_to_quat([0, 0, 1], np.pi / 2)
        expected = axis_angle_to_quat([0, 0, 1], np.pi / 4)
        np.testing.assert_allclose(slerp(q0, q1, 0.5), expected, atol=1e-12)

    def test_endpoints(self):
        q0, q1 = random_quats(2, seed=9)
        np.testing.assert_allclose(slerp(q0, q1, 0.0), q0, atol=1e-12)
        out = slerp(q0, q1, 1.0)
        assert min(np.linalg.norm(out - q1), np.linalg.norm(out + q1)) < 1e-9

    def test_matches_axis_angle_oracle(self):
        qs = random_quats(40, seed=21)
        for i in range(0, 40, 2):
            q0, q1 = qs[i], qs[i + 1]
            got = slerp(q0, q1, 0.25)
            expected = slerp_via_axis_angle(q0, q1, 0.25)
            assert min(np.linalg.norm(got - expected), np.linalg.norm(got + expected)) < 1e-6

    def test_antipodal_shortest_path(self):
        q0 = axis_angle_to_quat([0, 0, 1], 0.1)
        q1 = -axis_angle_to_quat([0, 0, 1], 0.2)  # same rotation, flipped sign
        out = slerp(q0, q1, 0.5)
        expected = axis_angle_to_quat([0, 0, 1], 0.15)
        assert min(np.linalg.norm(out - expected), np.linalg.norm(out + expected)) < 1e-9

    def test_geodesic_property(self):
        q = random_quats(2000, seed=33)
        q0, q1 = q[:1000], q[1000:]
        rng = np.random.default_rng(34)
        t = rng.uniform(0, 1, size=1000)
        qt = slerp(q0, q1, t)
        total = quat_angle(q0, q1)
        np.testing.assert_allclose(quat_angle(q0, qt), t * total, atol=1e-6)

    def test_unit_norm(self):
        q = random_quats(200, seed=12)
        out = slerp(q[:100], q[100:], 0.3)
        np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)


def test_yaw_matrix():
    m = yaw_matrix(np.pi / 2)
    np.testing.assert_allclose(m @ np.array([0, 1, 0]), [-1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(m[2, 2], 1.0)
