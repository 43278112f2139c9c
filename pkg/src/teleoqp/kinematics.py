"""Serial-chain forward kinematics and task Jacobians.

Robots are described by classic Denavit-Hartenberg rows
(theta offset, d, a, alpha) per joint; each joint transform is
RotZ(theta) TransZ(d) TransX(a) RotX(alpha), with the joint value added to
theta for revolute joints and to d for prismatic ones. All poses are unit
dual quaternions; Jacobians are built analytically column by column and are
checked against central finite differences in the tests.

A :class:`ChainCache` shares one forward pass over the chain between the
pose, translation, line, and point Jacobians evaluated within a control
tick.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dq import C4, DualQuaternion, Quaternion, hamilton_minus4, hamilton_minus8, hamilton_plus4
from .geometry import PluckerLine, cross_matrix

REVOLUTE = "revolute"
PRISMATIC = "prismatic"

_HALF_K = Quaternion(0.0, 0.0, 0.0, 0.5)
_ZERO_Q = Quaternion()


@dataclass(frozen=True)
class DHJoint:
    theta: float
    d: float
    a: float
    alpha: float
    kind: str = REVOLUTE

    def __post_init__(self):
        if self.kind not in (REVOLUTE, PRISMATIC):
            raise ValueError(f"unknown joint kind {self.kind!r}")
        for v in (self.theta, self.d, self.a, self.alpha):
            if not math.isfinite(v):
                raise ValueError("DH parameters must be finite")


@dataclass
class RobotModel:
    """Serial chain with base and effector (tool) transforms."""

    name: str
    joints: list[DHJoint]
    base: DualQuaternion = field(default_factory=DualQuaternion.identity)
    effector: DualQuaternion = field(default_factory=DualQuaternion.identity)

    def __post_init__(self):
        if len(self.joints) < 1:
            raise ValueError("a robot needs at least one joint")
        if not self.base.is_unit() or not self.effector.is_unit():
            raise ValueError("base and effector poses must be unit dual quaternions")

    @property
    def n(self) -> int:
        return len(self.joints)

    def joint_pose(self, i: int, qi: float) -> DualQuaternion:
        """Dual quaternion transform of joint i at joint value qi.

        Closed form of RotZ(theta) TransZ(d) TransX(a) RotX(alpha): primary
        cz*cx + i cz*sx + j sz*sx + k sz*cx, dual as expanded below.
        """
        j = self.joints[i]
        if j.kind == REVOLUTE:
            theta, d = j.theta + qi, j.d
        else:
            theta, d = j.theta, j.d + qi
        a = j.a
        cz = math.cos(0.5 * theta)
        sz = math.sin(0.5 * theta)
        cx = math.cos(0.5 * j.alpha)
        sx = math.sin(0.5 * j.alpha)
        primary = Quaternion(cz * cx, cz * sx, sz * sx, sz * cx)
        dual = Quaternion(
            -0.5 * (a * sx * cz + d * sz * cx),
            0.5 * (a * cx * cz - d * sz * sx),
            0.5 * (a * cx * sz + d * sx * cz),
            0.5 * (d * cx * cz - a * sx * sz),
        )
        return DualQuaternion(primary, dual)

    # -- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dh": [[j.theta, j.d, j.a, j.alpha, j.kind] for j in self.joints],
            "base": self.base.vec8().tolist(),
            "effector": self.effector.vec8().tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RobotModel":
        joints = [DHJoint(t, d, a, al, kind) for t, d, a, al, kind in data["dh"]]
        base = DualQuaternion.from_vec8(data.get("base", [1, 0, 0, 0, 0, 0, 0, 0]))
        eff = DualQuaternion.from_vec8(data.get("effector", [1, 0, 0, 0, 0, 0, 0, 0]))
        return cls(data["name"], joints, base, eff)


@dataclass
class JointState:
    """Joint values with limits; loaded scenarios must start inside the box."""

    q: np.ndarray
    q_min: np.ndarray
    q_max: np.ndarray
    qd_max: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.q_min = np.asarray(self.q_min, dtype=float)
        self.q_max = np.asarray(self.q_max, dtype=float)
        self.qd_max = np.asarray(self.qd_max, dtype=float)
        n = self.q.shape[0]
        for arr in (self.q_min, self.q_max, self.qd_max):
            if arr.shape != (n,):
                raise ValueError("joint state vectors must share one length")
        if not np.all(self.q_min < self.q_max):
            raise ValueError("q_min must be strictly below q_max")

    def inside_limits(self) -> bool:
        return bool(np.all(self.q >= self.q_min) and np.all(self.q <= self.q_max))


def load_robot(path) -> tuple[RobotModel, JointState]:
    """Read a robot JSON file: model plus joint limits (q starts at zero)."""
    with open(path) as f:
        data = json.load(f)
    model = RobotModel.from_dict(data)
    state = JointState(
        q=np.zeros(model.n),
        q_min=np.asarray(data["q_min"], dtype=float),
        q_max=np.asarray(data["q_max"], dtype=float),
        qd_max=np.asarray(data["qd_max"], dtype=float),
    )
    return model, state


class ChainCache:
    """Forward pass at one (model, q), reused across Jacobian evaluations.

    Column i of any (partial) chain Jacobian is vec8(T_i * tail), where
    T_i = P_i xi_i P_i^(-1) is joint i's twist seen from the base and `tail`
    is the raw chained pose of the requested frame; both are computed once.
    """

    def __init__(self, model: RobotModel, q: np.ndarray):
        q = np.asarray(q, dtype=float)
        if q.shape != (model.n,):
            raise ValueError(f"expected {model.n} joint values, got {q.shape}")
        self.model = model
        self.q = q
        prefixes = [model.base]
        for i in range(model.n):
            prefixes.append(prefixes[-1] * model.joint_pose(i, q[i]))
        self._prefixes = prefixes
        self._twists: list[DualQuaternion] | None = None
        self._jacobians: dict[int | None, np.ndarray] = {}
        self._poses: dict[int | None, DualQuaternion] = {}
        self._points: dict = {}
        self._lines: dict = {}

    def raw_pose(self, upto: int | None = None) -> DualQuaternion:
        if upto is None:
            return self._prefixes[self.model.n] * self.model.effector
        return self._prefixes[upto]

    def pose(self, upto: int | None = None) -> DualQuaternion:
        if upto not in self._poses:
            self._poses[upto] = self.raw_pose(upto).normalized()
        return self._poses[upto]

    def _base_twists(self) -> list[DualQuaternion]:
        if self._twists is None:
            twists = []
            for i, joint in enumerate(self.model.joints):
                xi = DualQuaternion(_HALF_K, _ZERO_Q) if joint.kind == REVOLUTE else DualQuaternion(_ZERO_Q, _HALF_K)
                p = self._prefixes[i]
                twists.append(p * xi * p.conj())
            self._twists = twists
        return self._twists

    def jacobian(self, upto: int | None = None) -> np.ndarray:
        if upto not in self._jacobians:
            n = self.model.n
            k = n if upto is None else upto
            tail = self.raw_pose(upto)
            twists = self._base_twists()
            jac = np.zeros((8, n))
            for i in range(k):
                jac[:, i] = (twists[i] * tail).vec8()
            self._jacobians[upto] = jac
        return self._jacobians[upto]

    def point(self, offset: Quaternion | None, link: int | None):
        key = (link, None if offset is None else (offset.x, offset.y, offset.z))
        if key not in self._points:
            self._points[key] = point_jacobian(self.model, self.q, offset=offset, link=link, cache=self)
        return self._points[key]

    def line(self, axis: Quaternion, link: int | None):
        key = (link, axis.x, axis.y, axis.z)
        if key not in self._lines:
            self._lines[key] = line_jacobian(self.model, self.q, axis, link=link, cache=self)
        return self._lines[key]


def fkm(model: RobotModel, q: np.ndarray, upto: int | None = None) -> DualQuaternion:
    """End-effector pose at configuration q.

    With `upto` = k only the first k joints are chained (base included,
    effector transform applied only for the full chain).
    """
    return ChainCache(model, q).pose(upto)


def pose_jacobian(model: RobotModel, q: np.ndarray, upto: int | None = None) -> np.ndarray:
    """8xn Jacobian with vec8(x_dot) = J @ q_dot.

    The twist is (1/2)k for revolute joints and eps*(1/2)k for prismatic
    ones, both expressed in the joint's own frame.
    """
    return ChainCache(model, q).jacobian(upto)


def rotation_jacobian(jac_pose: np.ndarray) -> np.ndarray:
    """4xn rotation Jacobian: the primary-part rows of the pose Jacobian."""
    return jac_pose[:4, :]


def translation_jacobian(
    model: RobotModel,
    q: np.ndarray,
    jac_pose: np.ndarray,
    pose: DualQuaternion | None = None,
) -> np.ndarray:
    """3xn translation Jacobian: vec3(t_dot) = J_t @ q_dot for t = 2*D(x)*P(x)^*."""
    x = fkm(model, q) if pose is None else pose
    jt4 = translation_jacobian_from_pose(x, jac_pose)
    return jt4[1:4, :]


def translation_jacobian_from_pose(x: DualQuaternion, jac_pose: np.ndarray) -> np.ndarray:
    # t = 2 D P*  =>  t_dot = 2 (D_dot P* + D P*_dot); the w row stays ~0.
    hp = hamilton_plus4(x.dual)
    hm = hamilton_minus4(x.primary.conj())
    return 2.0 * (hm @ jac_pose[4:, :] + hp @ (C4 @ jac_pose[:4, :]))


def line_jacobian(
    model: RobotModel,
    q: np.ndarray,
    axis: Quaternion,
    link: int | None = None,
    cache: ChainCache | None = None,
) -> tuple[PluckerLine, np.ndarray]:
    """Plucker line of a tool axis and the 8xn Jacobian of [vec4 l; vec4 m].

    `axis` is a unit pure quaternion fixed in the carrying frame; the line
    passes through that frame's origin along the rotated axis. By default the
    carrying frame is the end effector; pass `link` = k to attach the line to
    the frame after the first k joints instead (e.g. a tool shaft proximal of
    the wrist).
    """
    if not axis.is_unit() or not axis.is_pure():
        raise ValueError("line axis must be a unit pure quaternion")
    if cache is None:
        cache = ChainCache(model, q)
    x = cache.pose(link)
    jac = cache.jacobian(link)

    r, t = x.rt()
    l = r.rotate(axis)
    l = Quaternion(0.0, l.x, l.y, l.z)
    m = Quaternion(
        0.0,
        t.y * l.z - t.z * l.y,
        t.z * l.x - t.x * l.z,
        t.x * l.y - t.y * l.x,
    )

    jac_r = jac[:4, :]
    jac_l4 = (hamilton_minus4(axis * r.conj()) + hamilton_plus4(r * axis) @ C4) @ jac_r
    jt4 = translation_jacobian_from_pose(x, jac)
    jac_t3 = jt4[1:4, :]
    jac_l3 = jac_l4[1:4, :]
    # m = t x l  =>  m_dot = t_dot x l + t x l_dot
    jac_m3 = -cross_matrix(l) @ jac_t3 + cross_matrix(t) @ jac_l3

    out = np.zeros((8, model.n))
    out[:4, :] = jac_l4
    out[5:8, :] = jac_m3
    return PluckerLine(l, m), out


def point_jacobian(
    model: RobotModel,
    q: np.ndarray,
    offset: Quaternion | None = None,
    link: int | None = None,
    cache: ChainCache | None = None,
) -> tuple[Quaternion, np.ndarray]:
    """World position and 3xn Jacobian of a point rigidly attached to a link.

    `offset` is expressed in the frame of `link` (defaults to the end-effector
    frame, offset zero: the tool tip). Columns for joints beyond the link are
    zero.
    """
    if offset is not None and not offset.is_pure():
        raise ValueError("point offset must be a pure quaternion")
    if cache is None:
        cache = ChainCache(model, q)
    x = cache.pose(link)
    jac = cache.jacobian(link)
    if offset is not None:
        # chain rule through the constant offset: vec8((x*c)') = H8-(c) vec8(x')
        carrier = DualQuaternion.from_rt(Quaternion(1.0), offset)
        jac = hamilton_minus8(carrier) @ jac
        x = (x * carrier).normalized()
    jt4 = translation_jacobian_from_pose(x, jac)
    return x.translation(), jt4[1:4, :]
