"""Geometric primitives and signed distance functions.

Every distance operation returns a :class:`DistanceResult` bundling the
distance d, its row Jacobian with respect to the joint values that move the
robot-held primitive, and the residual zeta capturing scene motion, so that
d_dot = J_d @ q_dot + zeta along any trajectory. The Jacobians here are
chain-rule compositions over the pose/line/point Jacobians supplied by the
kinematics layer and are validated against finite differences in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dq import DualQuaternion, Quaternion, qcross

DEGENERATE_TOL = 1e-9
PARALLEL_TOL = 1e-8


def cross_matrix(v) -> np.ndarray:
    """3x3 matrix S with S @ u = v x u."""
    if isinstance(v, Quaternion):
        x, y, z = v.x, v.y, v.z
    else:
        x, y, z = v
    return np.array(
        [
            [0.0, -z, y],
            [z, 0.0, -x],
            [-y, x, 0.0],
        ]
    )


@dataclass
class PluckerLine:
    """Line as unit direction l and moment m = p x l for any point p on the line."""

    l: Quaternion
    m: Quaternion

    def __post_init__(self):
        if not self.l.is_unit():
            raise ValueError("line direction must be a unit quaternion")
        if not self.l.is_pure() or not self.m.is_pure():
            raise ValueError("line direction and moment must be pure quaternions")
        if abs(self.l.dot(self.m)) > 1e-9:
            raise ValueError("line moment must be orthogonal to its direction")

    @classmethod
    def from_point_direction(cls, point: Quaternion, direction: Quaternion) -> "PluckerLine":
        return cls(direction, qcross(point, direction))

    def closest_point_to_origin(self) -> Quaternion:
        return qcross(self.l, self.m)

    def vec8(self) -> np.ndarray:
        return np.concatenate([self.l.vec4(), self.m.vec4()])


@dataclass
class Plane:
    """Plane {p : <p, n> = delta} with unit normal n."""

    n: Quaternion
    delta: float

    def __post_init__(self):
        if not self.n.is_unit():
            raise ValueError("plane normal must be a unit quaternion")
        if not self.n.is_pure():
            raise ValueError("plane normal must be a pure quaternion")
        self._nv = self.n.vec3()


@dataclass
class Sphere:
    center: Quaternion
    radius: float

    def __post_init__(self):
        if self.radius < 0.0:
            raise ValueError("sphere radius must be nonnegative")


@dataclass
class DistanceResult:
    """Distance d with row Jacobian and residual: d_dot = jacobian @ q_dot + zeta."""

    d: float
    jacobian: np.ndarray
    zeta: float = 0.0
    degenerate: bool = False


_ZERO3 = np.zeros(3)


def _cross3(a, b) -> np.ndarray:
    # np.cross has high call overhead for single 3-vectors
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def dist_point_point(
    p: Quaternion,
    jac_p: np.ndarray,
    target: Quaternion,
    target_velocity: np.ndarray | None = None,
) -> DistanceResult:
    """Euclidean distance between a robot point p(q) and a (possibly moving) point."""
    e = (p - target).vec3()
    d = float(np.linalg.norm(e))
    if d < DEGENERATE_TOL:
        return DistanceResult(0.0, np.zeros(jac_p.shape[1]), 0.0, degenerate=True)
    v2 = _ZERO3 if target_velocity is None else np.asarray(target_velocity, dtype=float)
    jac = (e @ jac_p) / d
    zeta = float(-(e @ v2) / d)
    return DistanceResult(d, jac, zeta)


def dist_line_point(
    line: PluckerLine,
    jac_line: np.ndarray,
    target: Quaternion,
    target_velocity: np.ndarray | None = None,
) -> DistanceResult:
    """Distance from a (possibly moving) point to a robot-held line.

    For unit direction l the distance is ||p x l - m||; jac_line is the 8xn
    Jacobian of [vec4 l; vec4 m].
    """
    n = jac_line.shape[1]
    pv = target.vec3()
    lv = line.l.vec3()
    e = _cross3(pv, lv) - line.m.vec3()
    d = float(np.sqrt(e @ e))
    if d < DEGENERATE_TOL:
        return DistanceResult(0.0, np.zeros(n), 0.0, degenerate=True)
    jac_l3 = jac_line[1:4, :]
    jac_m3 = jac_line[5:8, :]
    de_dq = cross_matrix(pv) @ jac_l3 - jac_m3
    jac = (e @ de_dq) / d
    if target_velocity is None:
        zeta = 0.0
    else:
        v2 = np.asarray(target_velocity, dtype=float)
        zeta = float(e @ _cross3(v2, lv) / d)
    return DistanceResult(d, jac, zeta)


def dist_line_line(
    line1: PluckerLine,
    jac_line1: np.ndarray,
    line2: PluckerLine,
    jac_line2: np.ndarray,
) -> DistanceResult:
    """Shortest distance between two robot-held lines.

    The returned Jacobian spans the concatenated joint vector [q1; q2]. Both
    lines are joint-driven, so the residual is zero. Skew lines use the
    reciprocal-product formula; (near-)parallel pairs fall back to
    point-to-line distance.
    """
    n1 = jac_line1.shape[1]
    n2 = jac_line2.shape[1]
    l1 = line1.l.vec3()
    m1 = line1.m.vec3()
    l2 = line2.l.vec3()
    m2 = line2.m.vec3()

    jl1 = jac_line1[1:4, :]
    jm1 = jac_line1[5:8, :]
    jl2 = jac_line2[1:4, :]
    jm2 = jac_line2[5:8, :]

    normal = np.cross(l1, l2)
    s = float(np.linalg.norm(normal))

    if s < PARALLEL_TOL:
        # Parallel: distance from a point of line2 to line1. p2 = l2 x m2 is
        # the point of line2 closest to the origin.
        p2 = np.cross(l2, m2)
        e = np.cross(p2, l1) - m1
        d = float(np.linalg.norm(e))
        if d < DEGENERATE_TOL:
            return DistanceResult(0.0, np.zeros(n1 + n2), 0.0, degenerate=True)
        dp2 = -cross_matrix(m2) @ jl2 + cross_matrix(l2) @ jm2
        de1 = cross_matrix(p2) @ jl1 - jm1
        de2 = -cross_matrix(l1) @ dp2
        jac = np.concatenate([(e @ de1) / d, (e @ de2) / d])
        return DistanceResult(d, jac)

    c = float(l1 @ m2 + l2 @ m1)
    d = abs(c) / s
    if d < DEGENERATE_TOL:
        return DistanceResult(0.0, np.zeros(n1 + n2), 0.0, degenerate=True)

    dc1 = m2 @ jl1 + l2 @ jm1
    dc2 = m1 @ jl2 + l1 @ jm2
    ns = normal / s
    ds1 = ns @ (-cross_matrix(l2) @ jl1)
    ds2 = ns @ (cross_matrix(l1) @ jl2)
    sgn = 1.0 if c >= 0.0 else -1.0
    jac = np.concatenate(
        [
            sgn * dc1 / s - d * ds1 / s,
            sgn * dc2 / s - d * ds2 / s,
        ]
    )
    return DistanceResult(d, jac)


def dist_plane_point(
    plane: Plane,
    p: Quaternion,
    jac_p: np.ndarray,
    normal_rate: np.ndarray | None = None,
    offset_rate: float = 0.0,
) -> DistanceResult:
    """Signed distance <p, n> - delta from a robot point to a plane.

    Positive on the side the normal points to. A moving plane contributes
    zeta = <p, n_dot> - delta_dot.
    """
    nv = plane._nv
    d = plane.n.x * p.x + plane.n.y * p.y + plane.n.z * p.z - plane.delta
    jac = nv @ jac_p
    zeta = -float(offset_rate)
    if normal_rate is not None:
        zeta += float(p.vec3() @ np.asarray(normal_rate, dtype=float))
    return DistanceResult(d, jac, zeta)


def cuboid_planes(pose: DualQuaternion, extents) -> list[Plane]:
    """Six inward-normal planes whose nonnegative-signed-distance set is the cuboid.

    `pose` places the cuboid center; `extents` are the full side lengths along
    the cuboid's local axes. A point is inside iff its signed distance to all
    six planes is >= 0.
    """
    ex, ey, ez = (float(v) for v in extents)
    if ex <= 0.0 or ey <= 0.0 or ez <= 0.0:
        raise ValueError("cuboid extents must be positive")
    r, t = pose.rt()
    axes = [Quaternion(0, 1, 0, 0), Quaternion(0, 0, 1, 0), Quaternion(0, 0, 0, 1)]
    half = [ex / 2.0, ey / 2.0, ez / 2.0]
    planes = []
    for axis, h in zip(axes, half):
        world_axis = r.rotate(axis)
        for sign in (1.0, -1.0):
            # Face at +-h along axis; inward normal points against the face.
            n = -sign * world_axis
            face_point = (t + sign * h * world_axis).vec3()
            delta = float(face_point @ n.vec3())
            planes.append(Plane(Quaternion(0.0, n.x, n.y, n.z), delta))
    return planes
