import numpy as np
import pytest

from teleoqp.dq import Q_K, Q_ONE, DualQuaternion, Quaternion, pose_from_rt, vec3, vec4
from teleoqp.kinematics import (
    PRISMATIC,
    REVOLUTE,
    DHJoint,
    JointState,
    RobotModel,
    fkm,
    line_jacobian,
    point_jacobian,
    pose_jacobian,
    rotation_jacobian,
    translation_jacobian,
)

from .oracles import fd_jacobian


def one_revolute():
    return RobotModel("1r", [DHJoint(0, 0, 0, 0, REVOLUTE)])


def planar_2r():
    return RobotModel("2r", [DHJoint(0, 0, 1.0, 0, REVOLUTE), DHJoint(0, 0, 1.0, 0, REVOLUTE)])


def one_prismatic():
    return RobotModel("1p", [DHJoint(0, 0, 0, 0, PRISMATIC)])


def mixed_6dof():
    """RRPRRR chain with nonzero offsets, used for randomized oracle checks."""
    return RobotModel(
        "rrprrr",
        [
            DHJoint(0.1, 0.3, 0.0, -np.pi / 2, REVOLUTE),
            DHJoint(-np.pi / 2, 0.0, 0.2, np.pi / 2, REVOLUTE),
            DHJoint(0.0, 0.1, 0.0, 0.0, PRISMATIC),
            DHJoint(0.2, 0.15, 0.0, -np.pi / 2, REVOLUTE),
            DHJoint(-0.3, 0.0, 0.05, np.pi / 2, REVOLUTE),
            DHJoint(0.0, 0.08, 0.02, 0.0, REVOLUTE),
        ],
        base=pose_from_rt(Quaternion.rotation(0.3, [0, 0, 1]), Quaternion.pure([0.1, -0.2, 0.05])),
        effector=pose_from_rt(Quaternion.rotation(-0.2, [1, 0, 0]), Quaternion.pure([0, 0, 0.04])),
    )


class TestForwardKinematics:
    def test_single_revolute_zero_is_identity(self):
        x = fkm(one_revolute(), np.zeros(1))
        assert np.allclose(x.vec8(), [1, 0, 0, 0, 0, 0, 0, 0], atol=1e-15)

    def test_planar_2r_stretched(self):
        r, t = fkm(planar_2r(), np.zeros(2)).rt()
        assert np.allclose(vec4(r), [1, 0, 0, 0], atol=1e-15)
        assert np.allclose(vec3(t), [2, 0, 0], atol=1e-15)

    def test_planar_2r_first_joint_quarter_turn(self):
        r, t = fkm(planar_2r(), [np.pi / 2, 0.0]).rt()
        assert np.allclose(vec3(t), [0, 2, 0], atol=1e-12)
        expected_r = Quaternion.rotation(np.pi / 2, [0, 0, 1])
        assert np.allclose(vec4(r), vec4(expected_r), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fkm(planar_2r(), np.zeros(3))

    def test_unit_output_random(self):
        rng = np.random.default_rng(11)
        model = mixed_6dof()
        for _ in range(100):
            q = rng.uniform(-1.5, 1.5, size=model.n)
            assert fkm(model, q).is_unit(1e-9)


class TestPoseJacobian:
    def test_single_revolute_column(self):
        jac = pose_jacobian(one_revolute(), np.zeros(1))
        assert np.allclose(jac[:, 0], [0, 0, 0, 0.5, 0, 0, 0, 0], atol=1e-15)

    def test_prismatic_rotation_rows_zero(self):
        jac = pose_jacobian(one_prismatic(), np.zeros(1))
        assert np.allclose(jac[:4, :], 0.0, atol=1e-15)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(12)
        for model in (one_revolute(), planar_2r(), one_prismatic(), mixed_6dof()):
            for _ in range(20):
                q = rng.uniform(-1.2, 1.2, size=model.n)
                jac = pose_jacobian(model, q)
                ref = fd_jacobian(lambda qq: fkm(model, qq).vec8(), q)
                assert np.max(np.abs(jac - ref)) < 1e-6


class TestDerivedJacobians:
    def test_rotation_jacobian_prismatic_only(self):
        model = RobotModel("2p", [DHJoint(0, 0, 0, 0, PRISMATIC), DHJoint(0, 0, 0.1, np.pi / 4, PRISMATIC)])
        jac = rotation_jacobian(pose_jacobian(model, np.zeros(2)))
        assert np.allclose(jac, 0.0, atol=1e-15)

    def test_planar_2r_translation_jacobian(self):
        model = planar_2r()
        q = np.zeros(2)
        jt = translation_jacobian(model, q, pose_jacobian(model, q))
        assert np.allclose(jt, [[0, 0], [2, 1], [0, 0]], atol=1e-12)

    def test_translation_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        model = mixed_6dof()
        for _ in range(50):
            q = rng.uniform(-1.2, 1.2, size=model.n)
            jt = translation_jacobian(model, q, pose_jacobian(model, q))
            ref = fd_jacobian(lambda qq: vec3(fkm(model, qq).translation()), q)
            assert np.max(np.abs(jt - ref)) < 1e-6

    def test_pure_wrist_translation_jacobian_zero(self):
        # Rotations about a fixed center cannot translate that center.
        wrist = RobotModel(
            "wrist",
            [
                DHJoint(0, 0, 0, -np.pi / 2, REVOLUTE),
                DHJoint(0, 0, 0, np.pi / 2, REVOLUTE),
                DHJoint(0, 0, 0, 0, REVOLUTE),
            ],
        )
        rng = np.random.default_rng(14)
        for _ in range(20):
            q = rng.uniform(-1.0, 1.0, size=3)
            jt = translation_jacobian(wrist, q, pose_jacobian(wrist, q))
            assert np.max(np.abs(jt)) < 1e-12


class TestLineAndPoint:
    def test_identity_pose_axis_line(self):
        line, _ = line_jacobian(one_revolute(), np.zeros(1), Q_K)
        assert np.allclose(vec3(line.l), [0, 0, 1], atol=1e-15)
        assert np.allclose(vec3(line.m), [0, 0, 0], atol=1e-15)

    def test_line_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(15)
        model = mixed_6dof()

        def line8(qq):
            ln, _ = line_jacobian(model, qq, Q_K)
            return ln.vec8()

        for _ in range(50):
            q = rng.uniform(-1.2, 1.2, size=model.n)
            _, jac = line_jacobian(model, q, Q_K)
            ref = fd_jacobian(line8, q)
            assert np.max(np.abs(jac - ref)) < 1e-6

    def test_base_translation_shifts_moment(self):
        model = mixed_6dof()
        q = np.full(model.n, 0.2)
        line, _ = line_jacobian(model, q, Q_K)
        p = np.array([0.3, -0.4, 0.25])
        shifted = RobotModel(
            model.name,
            model.joints,
            base=(DualQuaternion.from_translation(p) * model.base).normalized(),
            effector=model.effector,
        )
        line2, _ = line_jacobian(shifted, q, Q_K)
        assert np.allclose(vec3(line2.l), vec3(line.l), atol=1e-12)
        expected_m = vec3(line.m) + np.cross(p, vec3(line.l))
        assert np.allclose(vec3(line2.m), expected_m, atol=1e-12)

    def test_non_unit_axis_rejected(self):
        with pytest.raises(ValueError):
            line_jacobian(one_revolute(), np.zeros(1), Quaternion(0, 0, 0, 2.0))

    def test_point_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(16)
        model = mixed_6dof()
        offset = Quaternion.pure([0.02, -0.01, 0.05])
        for link in (None, 3):
            for _ in range(20):
                q = rng.uniform(-1.2, 1.2, size=model.n)
                _, jac = point_jacobian(model, q, offset=offset, link=link)

                def pof(qq):
                    p, _ = point_jacobian(model, qq, offset=offset, link=link)
                    return vec3(p)

                ref = fd_jacobian(pof, q)
                assert np.max(np.abs(jac - ref)) < 1e-6

    def test_point_jacobian_zero_columns_past_link(self):
        model = mixed_6dof()
        _, jac = point_jacobian(model, np.full(model.n, 0.3), link=2)
        assert np.allclose(jac[:, 2:], 0.0, atol=1e-15)


class TestJointState:
    def test_limits_validation(self):
        with pytest.raises(ValueError):
            JointState(q=[0.0], q_min=[1.0], q_max=[-1.0], qd_max=[1.0])

    def test_inside_limits(self):
        s = JointState(q=[0.0, 0.5], q_min=[-1, -1], q_max=[1, 1], qd_max=[1, 1])
        assert s.inside_limits()
        s.q = np.array([2.0, 0.0])
        assert not s.inside_limits()
