"""Two-arm teleoperation control law.

Each tick the controller evaluates task errors and constraint distances,
builds the weighted quadratic objective

    beta * F_1 + (1 - beta) * F_2,
    F_i = alpha ||J_t,i qd_i + eta t_err_i||^2
        + (1 - alpha) ||J_r,i qd_i + eta r_err_i||^2
        + ||Lambda qd_i||^2,

and minimizes it subject to the stacked velocity-damper rows W qd <= w.
Rotation errors use the switching quaternion error so antipodal orientations
command no motion. A generic p-robot version without prioritization is
exposed as :func:`probot_problem`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dq import Q_ONE, Quaternion
from .kinematics import (
    ChainCache,
    JointState,
    RobotModel,
    translation_jacobian_from_pose,
)
from .qp import INFEASIBLE, DualActiveSetSolver, QpProblem
from .vfi import ConstraintRow, assemble, joint_limit_block, zone_row


@dataclass
class ControllerConfig:
    """Gains and weights of the teleoperation objective (one scenario row)."""

    alpha: float = 0.99
    beta: float = 0.5
    eta: float = 1.0
    eta_d: float = 1.0
    eta_q: float | None = None  # defaults to eta_d
    lambda_r: float = 0.01
    lambda_f: float = 0.01
    forceps_dofs: int = 0
    sampling_time: float = 0.001
    motion_scaling: float = 1.0
    beta_floor: float = 1e-3

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if self.sampling_time <= 0.0:
            raise ValueError("sampling_time must be positive")
        if self.lambda_r < 0.0 or self.lambda_f < 0.0:
            raise ValueError("damping weights must be nonnegative")
        if self.eta_q is None:
            self.eta_q = self.eta_d

    def damping_diagonal(self, n: int) -> np.ndarray:
        """Diagonal of Lambda: manipulator joints get lambda_r, the distal
        forceps joints get lambda_f."""
        nf = min(self.forceps_dofs, n)
        return np.array([self.lambda_r] * (n - nf) + [self.lambda_f] * nf)

    def robot_weights(self, p: int) -> np.ndarray:
        """Priority weights; the floor keeps extreme beta from zeroing a block."""
        if p == 2:
            return np.array([max(self.beta, self.beta_floor), max(1.0 - self.beta, self.beta_floor)])
        return np.ones(p)


@dataclass
class TaskTarget:
    r_d: Quaternion
    t_d: Quaternion

    def __post_init__(self):
        if not self.r_d.is_unit():
            raise ValueError("desired rotation must be a unit quaternion")
        if not self.t_d.is_pure():
            raise ValueError("desired translation must be a pure quaternion")

    def copy(self) -> "TaskTarget":
        return TaskTarget(Quaternion.from_vec4(self.r_d.vec4()), Quaternion.from_vec4(self.t_d.vec4()))


def switching_rotation_error(r: Quaternion, r_d: Quaternion) -> np.ndarray:
    """vec4 of r^* r_d -/+ 1, whichever branch is closer to zero.

    Picking the closer branch removes the unwinding motion between r and -r,
    which encode the same orientation.
    """
    if not r.is_unit() or not r_d.is_unit():
        raise ValueError("switching error requires unit quaternions")
    e = r.conj() * r_d
    minus = e - Q_ONE
    plus = e + Q_ONE
    err = minus if minus.norm() < plus.norm() else plus
    if err.norm() < 1e-13:
        # At (anti)alignment the residue is unit-norm rounding noise, not
        # rotation; return the exact-arithmetic value.
        return np.zeros(4)
    return err.vec4()


@dataclass
class TaskBlock:
    """Per-robot pieces of the objective, evaluated at the current q."""

    jac_t: np.ndarray
    jac_r: np.ndarray
    t_err: np.ndarray
    r_err: np.ndarray


def build_objective(blocks: list[TaskBlock], config: ControllerConfig) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic form (H, f) of the weighted objective; constant terms dropped."""
    weights = config.robot_weights(len(blocks))
    sizes = [b.jac_t.shape[1] for b in blocks]
    total = sum(sizes)
    H = np.zeros((total, total))
    f = np.zeros(total)
    a = config.alpha
    off = 0
    for b, wgt, n in zip(blocks, weights, sizes):
        lam = config.damping_diagonal(n)
        Hb = 2.0 * wgt * (a * b.jac_t.T @ b.jac_t + (1.0 - a) * b.jac_r.T @ b.jac_r + np.diag(lam**2))
        fb = 2.0 * wgt * config.eta * (a * b.jac_t.T @ b.t_err + (1.0 - a) * b.jac_r.T @ b.r_err)
        H[off : off + n, off : off + n] = Hb
        f[off : off + n] = fb
        off += n
    return H, f


def probot_problem(
    jacobians: list[np.ndarray],
    errors: list[np.ndarray],
    eta: float,
    damping: float = 0.0,
    W: np.ndarray | None = None,
    w: np.ndarray | None = None,
) -> QpProblem:
    """Generic p-robot tracking law: min ||J qd + eta x_err||^2 + damping ||qd||^2."""
    sizes = [J.shape[1] for J in jacobians]
    total = sum(sizes)
    H = np.zeros((total, total))
    f = np.zeros(total)
    off = 0
    for J, e, n in zip(jacobians, errors, sizes):
        H[off : off + n, off : off + n] = 2.0 * (J.T @ J + damping * np.eye(n))
        f[off : off + n] = 2.0 * eta * (J.T @ np.asarray(e, dtype=float))
        off += n
    return QpProblem(H, f, W, w)


@dataclass
class ControlDiagnostics:
    qdot: np.ndarray
    t_err: list[np.ndarray]
    r_err_norm: list[float]
    poses: list[np.ndarray]
    distances: np.ndarray
    rates: np.ndarray  # signed distance rates J_d qd + zeta, per constraint
    slacks: np.ndarray
    qp_status: str
    qp_iterations: int
    kkt_residual: float
    infeasible: bool
    outside_joint_box: bool


def control_step(
    models: list[RobotModel],
    states: list[JointState],
    targets: list[TaskTarget],
    constraints: list,
    config: ControllerConfig,
    solver: DualActiveSetSolver,
    t: float = 0.0,
) -> ControlDiagnostics:
    """Evaluate one tick of the constrained teleoperation law.

    `constraints` is a list of compiled pair constraints (see
    :mod:`teleoqp.vfi`) evaluated at the current configuration; joint-limit
    and velocity-cap rows are always added.
    """
    p = len(models)
    if not (len(states) == len(targets) == p):
        raise ValueError("models, states, and targets must align")
    sizes = [m.n for m in models]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])

    blocks = []
    poses = []
    caches = [ChainCache(model, state.q) for model, state in zip(models, states)]
    for cache, target in zip(caches, targets):
        x = cache.pose()
        jac = cache.jacobian()
        r, trans = x.rt()
        jt = translation_jacobian_from_pose(x, jac)[1:4, :]
        blocks.append(
            TaskBlock(
                jac_t=jt,
                jac_r=jac[:4, :],
                t_err=(trans - target.t_d).vec3(),
                r_err=switching_rotation_error(r, target.r_d),
            )
        )
        poses.append(x)

    H, f = build_objective(blocks, config)

    entries: list[tuple[ConstraintRow, np.ndarray]] = []
    distances = np.zeros(len(constraints))
    evaluated = []
    for k, constraint in enumerate(constraints):
        res, cols = constraint.evaluate(models, states, offsets, t, caches)
        distances[k] = res.d
        evaluated.append((res, cols))
        entries.append((zone_row(res, constraint.spec), cols))

    W_pairs, w_pairs = assemble(entries, total)
    limit_blocks = []
    outside = False
    for i, state in enumerate(states):
        if not state.inside_limits():
            outside = True
        Wb, wb = joint_limit_block(state, config.eta_q)
        limit_blocks.append((Wb, wb, offsets[i], offsets[i + 1]))
    n_limit = sum(wb.shape[0] for _, wb, _, _ in limit_blocks)
    W = np.zeros((W_pairs.shape[0] + n_limit, total))
    w = np.zeros(W.shape[0])
    W[: W_pairs.shape[0]] = W_pairs
    w[: w_pairs.shape[0]] = w_pairs
    row0 = W_pairs.shape[0]
    for Wb, wb, c0, c1 in limit_blocks:
        W[row0 : row0 + Wb.shape[0], c0:c1] = Wb
        w[row0 : row0 + Wb.shape[0]] = wb
        row0 += Wb.shape[0]
    solution = solver.solve(QpProblem(H, f, W, w))
    if solution.status == INFEASIBLE:
        qdot = np.zeros(total)
    else:
        qdot = solution.x
    slacks = w - W @ qdot if w.size else np.zeros(0)
    rates = np.array([res.jacobian @ qdot[cols] + res.zeta for res, cols in evaluated])

    return ControlDiagnostics(
        qdot=qdot,
        t_err=[b.t_err for b in blocks],
        r_err_norm=[float(np.linalg.norm(b.r_err)) for b in blocks],
        poses=[x.vec8() for x in poses],
        distances=distances,
        rates=rates,
        slacks=slacks[: len(constraints)] if len(constraints) else np.zeros(0),
        qp_status=solution.status,
        qp_iterations=solution.iterations,
        kkt_residual=solution.kkt_residual,
        infeasible=solution.status == INFEASIBLE,
        outside_joint_box=outside,
    )


@dataclass
class MasterCommand:
    """Relative master motion since clutch engage, in the master base frame."""

    master_id: int
    clutch: bool
    delta_t: np.ndarray
    delta_r: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.delta_t = np.asarray(self.delta_t, dtype=float).reshape(3)
        self.delta_r = np.asarray(self.delta_r, dtype=float).reshape(4)

    @classmethod
    def from_dict(cls, data: dict) -> "MasterCommand":
        return cls(
            master_id=int(data["master_id"]),
            clutch=bool(data["clutch"]),
            delta_t=data.get("dt", [0.0, 0.0, 0.0]),
            delta_r=data.get("dr", [1.0, 0.0, 0.0, 0.0]),
            time=float(data.get("t", 0.0)),
        )


class TeleopMapper:
    """Clutched master-to-slave target mapping with motion scaling.

    While the clutch is engaged the slave target follows the master's
    relative motion, translations scaled by `motion_scaling` and expressed in
    the slave base through the fixed alignment rotation. Disengaging freezes
    the target; re-engaging rebases, so orientation offsets accumulated
    across clutch cycles persist.
    """

    def __init__(self, initial_target: TaskTarget, motion_scaling: float, align: Quaternion | None = None):
        self.target = initial_target.copy()
        self.motion_scaling = motion_scaling
        self.align = align if align is not None else Q_ONE
        self.engaged = False
        self._ref = initial_target.copy()
        self._last_delta = np.zeros(3)
        self._last_time: float | None = None
        self.master_velocity = np.zeros(3)

    def apply(self, cmd: MasterCommand, time: float):
        if cmd.clutch and not self.engaged:
            self.engaged = True
            self._ref = self.target.copy()
            self._last_delta = cmd.delta_t.copy()
            self._last_time = time
            self.master_velocity = np.zeros(3)
            return
        if not cmd.clutch:
            self.engaged = False
            self.master_velocity = np.zeros(3)
            return

        shift = self.motion_scaling * self._rotate(cmd.delta_t)
        self.target.t_d = Quaternion.pure(self._ref.t_d.vec3() + shift)
        dr = Quaternion.from_vec4(cmd.delta_r).normalized()
        r_new = (self.align * dr * self.align.conj()) * self._ref.r_d
        self.target.r_d = r_new.normalized()

        if self._last_time is not None and time > self._last_time:
            self.master_velocity = (cmd.delta_t - self._last_delta) / (time - self._last_time)
        self._last_delta = cmd.delta_t.copy()
        self._last_time = time

    def error_to_master(self, t_err_slave: np.ndarray) -> np.ndarray:
        """Slave translation error seen from the master: unrotate and unscale."""
        back = self.align.conj().rotate(Quaternion.pure(t_err_slave))
        return back.vec3() / self.motion_scaling

    def _rotate(self, v: np.ndarray) -> np.ndarray:
        return self.align.rotate(Quaternion.pure(v)).vec3()
