"""Velocity-damper inequality rows for virtual fixtures and joint limits.

Each geometric constraint bounds the approach rate toward a zone boundary:
restricted zones keep a distance above d_safe, safe zones keep it below.
Rows are expressed over the joints that move the constrained primitives and
assembled into the stacked system W q_dot <= w with zero padding for
uninvolved joints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dq import Quaternion
from .geometry import (
    DistanceResult,
    Plane,
    dist_line_line,
    dist_line_point,
    dist_plane_point,
    dist_point_point,
)
from .kinematics import JointState, line_jacobian, point_jacobian

RESTRICTED = "restricted"
SAFE = "safe"


@dataclass
class ConstraintSpec:
    """One primitive pair bound: zone type, safe distance, and damper gain."""

    zone: str
    d_safe: float
    eta_d: float
    d_safe_rate: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.zone not in (RESTRICTED, SAFE):
            raise ValueError(f"unknown zone {self.zone!r}")
        if self.d_safe < 0.0:
            raise ValueError("d_safe must be nonnegative")
        if self.eta_d < 0.0:
            raise ValueError("eta_d must be nonnegative")


@dataclass
class ConstraintRow:
    """coeffs @ q_dot <= bound over some subset of the stacked joint vector."""

    coeffs: np.ndarray
    bound: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        # one reduction instead of elementwise isfinite; NaN/inf propagate
        if not math.isfinite(float(self.coeffs.sum()) + self.bound):
            raise ValueError("constraint row entries must be finite")


def restricted_zone_row(res: DistanceResult, spec: ConstraintSpec) -> ConstraintRow:
    """Keep d >= d_safe:  -J_d q_dot <= eta_d (d - d_safe) + zeta_safe."""
    d_err = res.d - spec.d_safe
    zeta_safe = res.zeta - spec.d_safe_rate
    return ConstraintRow(-res.jacobian, spec.eta_d * d_err + zeta_safe)


def safe_zone_row(res: DistanceResult, spec: ConstraintSpec) -> ConstraintRow:
    """Keep d <= d_safe:  J_d q_dot <= eta_d (d_safe - d) - zeta_safe."""
    d_err = spec.d_safe - res.d
    zeta_safe = res.zeta - spec.d_safe_rate
    return ConstraintRow(res.jacobian, spec.eta_d * d_err - zeta_safe)


def zone_row(res: DistanceResult, spec: ConstraintSpec) -> ConstraintRow:
    if spec.zone == RESTRICTED:
        return restricted_zone_row(res, spec)
    return safe_zone_row(res, spec)


def joint_limit_rows(state: JointState, eta_q: float) -> list[ConstraintRow]:
    """Damper rows toward both joint bounds plus hard velocity caps.

    Outside the box the damper bounds go negative, forcing motion back in.
    The velocity-cap rows are an extension beyond the damper formulation;
    hardware tables require them.
    """
    n = state.q.shape[0]
    rows = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(ConstraintRow(-e, eta_q * (state.q[i] - state.q_min[i])))
        rows.append(ConstraintRow(e, eta_q * (state.q_max[i] - state.q[i])))
        rows.append(ConstraintRow(e, state.qd_max[i]))
        rows.append(ConstraintRow(-e, state.qd_max[i]))
    return rows


def joint_limit_block(state: JointState, eta_q: float) -> tuple[np.ndarray, np.ndarray]:
    """Same rows as :func:`joint_limit_rows`, stacked as one (4n x n) block.

    Row order per joint i: lower damper, upper damper, +cap, -cap; rows are
    grouped by kind to keep the assembly vectorized.
    """
    n = state.q.shape[0]
    eye = np.eye(n)
    W = np.vstack([-eye, eye, eye, -eye])
    w = np.concatenate(
        [
            eta_q * (state.q - state.q_min),
            eta_q * (state.q_max - state.q),
            state.qd_max,
            state.qd_max,
        ]
    )
    return W, w


@dataclass
class WorldPoint:
    """World-frame point, optionally drifting at a constant velocity."""

    position: np.ndarray
    velocity: np.ndarray | None = None

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        if self.velocity is not None:
            self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)

    def at(self, t: float) -> tuple[Quaternion, np.ndarray | None]:
        if self.velocity is None:
            return Quaternion.pure(self.position), None
        return Quaternion.pure(self.position + t * self.velocity), self.velocity


@dataclass
class RobotLine:
    """Line rigidly attached to a robot link (default: end effector)."""

    robot: int
    axis: Quaternion
    link: int | None = None

    def evaluate(self, models, states, caches):
        if caches:
            return caches[self.robot].line(self.axis, self.link)
        return line_jacobian(models[self.robot], states[self.robot].q, self.axis, link=self.link)


@dataclass
class RobotPoint:
    """Point rigidly attached to a robot link (default: tool tip)."""

    robot: int
    offset: Quaternion | None = None
    link: int | None = None

    def evaluate(self, models, states, caches):
        if caches:
            return caches[self.robot].point(self.offset, self.link)
        return point_jacobian(models[self.robot], states[self.robot].q, offset=self.offset, link=self.link)


def _robot_cols(offsets, robot: int) -> np.ndarray:
    return np.arange(offsets[robot], offsets[robot + 1])


@dataclass
class LineLineConstraint:
    """Shaft-to-shaft distance between two robots; spans both joint blocks."""

    line_a: RobotLine
    line_b: RobotLine
    spec: ConstraintSpec

    def evaluate(self, models, states, offsets, t, caches=None):
        la, ja = self.line_a.evaluate(models, states, caches)
        lb, jb = self.line_b.evaluate(models, states, caches)
        res = dist_line_line(la, ja, lb, jb)
        cols = np.concatenate([_robot_cols(offsets, self.line_a.robot), _robot_cols(offsets, self.line_b.robot)])
        return res, cols


@dataclass
class LinePointConstraint:
    """Shaft-to-point distance; with a safe zone this is an entry sphere."""

    line: RobotLine
    target: WorldPoint
    spec: ConstraintSpec

    def evaluate(self, models, states, offsets, t, caches=None):
        ln, jac = self.line.evaluate(models, states, caches)
        point, velocity = self.target.at(t)
        res = dist_line_point(ln, jac, point, target_velocity=velocity)
        return res, _robot_cols(offsets, self.line.robot)


@dataclass
class PointPointConstraint:
    point: RobotPoint
    target: WorldPoint
    spec: ConstraintSpec

    def evaluate(self, models, states, offsets, t, caches=None):
        p, jac = self.point.evaluate(models, states, caches)
        target, velocity = self.target.at(t)
        res = dist_point_point(p, jac, target, target_velocity=velocity)
        return res, _robot_cols(offsets, self.point.robot)


@dataclass
class PlanePointConstraint:
    """Signed plane-to-point distance (static world plane)."""

    plane: Plane
    point: RobotPoint
    spec: ConstraintSpec

    def evaluate(self, models, states, offsets, t, caches=None):
        p, jac = self.point.evaluate(models, states, caches)
        res = dist_plane_point(self.plane, p, jac)
        return res, _robot_cols(offsets, self.point.robot)


@dataclass
class PointPointPairConstraint:
    """Tip-to-tip distance between two robots."""

    point_a: RobotPoint
    point_b: RobotPoint
    spec: ConstraintSpec

    def evaluate(self, models, states, offsets, t, caches=None):
        pa, ja = self.point_a.evaluate(models, states, caches)
        pb, jb = self.point_b.evaluate(models, states, caches)
        e = (pa - pb).vec3()
        d = float(np.linalg.norm(e))
        na = ja.shape[1]
        nb = jb.shape[1]
        if d < 1e-9:
            res = DistanceResult(0.0, np.zeros(na + nb), 0.0, degenerate=True)
        else:
            res = DistanceResult(d, np.concatenate([(e @ ja) / d, -(e @ jb) / d]), 0.0)
        cols = np.concatenate([_robot_cols(offsets, self.point_a.robot), _robot_cols(offsets, self.point_b.robot)])
        return res, cols


def assemble(entries: list[tuple[ConstraintRow, np.ndarray]], total_dofs: int) -> tuple[np.ndarray, np.ndarray]:
    """Stack (row, column-index) pairs into (W, w) over the full joint vector."""
    if not entries:
        return np.zeros((0, total_dofs)), np.zeros(0)
    W = np.zeros((len(entries), total_dofs))
    w = np.zeros(len(entries))
    for k, (row, cols) in enumerate(entries):
        cols = np.asarray(cols, dtype=int)
        if row.coeffs.shape[0] != cols.shape[0]:
            raise ValueError("row width does not match its column layout")
        if cols.size and (cols.min() < 0 or cols.max() >= total_dofs):
            raise ValueError("column layout exceeds the stacked joint vector")
        W[k, cols] = row.coeffs
        w[k] = row.bound
    return W, w
