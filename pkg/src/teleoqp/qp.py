"""Dense convex quadratic programming: min 1/2 x'Hx + f'x  s.t.  W x <= w.

The solver is a dual active-set method (Goldfarb/Idnani style): it starts at
the unconstrained minimizer, which is dual feasible, and adds violated
constraints one at a time, taking full or partial dual steps until primal
feasibility. Every optimal solution carries an exact KKT certificate. The
problems here are small (tens of variables and rows), so the linear algebra
uses one Cholesky factorization of H per solve instead of incremental
factorization updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import linprog

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITER = "max_iter"

RIDGE_SCALE = 1e-10
SYMMETRY_TOL = 1e-10


@dataclass
class QpProblem:
    H: np.ndarray
    f: np.ndarray
    W: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        n = self.f.shape[0]
        if self.H.shape != (n, n):
            raise ValueError("H and f dimensions disagree")
        if np.max(np.abs(self.H - self.H.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(self.H))):
            raise ValueError("H must be symmetric")
        self.W = np.zeros((0, n)) if self.W is None else np.asarray(self.W, dtype=float).reshape(-1, n)
        self.w = np.zeros(0) if self.w is None else np.asarray(self.w, dtype=float).reshape(-1)
        if self.W.shape[0] != self.w.shape[0]:
            raise ValueError("W and w row counts disagree")

    @property
    def n(self) -> int:
        return self.f.shape[0]

    @property
    def r(self) -> int:
        return self.w.shape[0]


@dataclass
class QpSolution:
    x: np.ndarray
    multipliers: np.ndarray
    status: str
    iterations: int
    kkt_residual: float


def kkt_residual(problem: QpProblem, x: np.ndarray, mu: np.ndarray) -> float:
    """Worst violation among stationarity, feasibility, dual sign, complementarity."""
    slack = problem.W @ x - problem.w if problem.r else np.zeros(0)
    stationarity = problem.H @ x + problem.f
    if problem.r:
        stationarity = stationarity + problem.W.T @ mu
    parts = [float(np.max(np.abs(stationarity)))]
    if problem.r:
        parts.append(float(max(0.0, np.max(slack))))
        parts.append(float(max(0.0, -np.min(mu))))
        parts.append(float(np.max(np.abs(mu * slack))))
    return max(parts)


class DualActiveSetSolver:
    """One instance per control loop; holds the warm-start active set."""

    def __init__(self, max_iterations: int = 500, warm_start: bool = True):
        self.max_iterations = max_iterations
        self.warm_start = warm_start
        self._last_active: list[int] = []

    def reset(self):
        self._last_active = []

    def solve(self, problem: QpProblem) -> QpSolution:
        H = 0.5 * (problem.H + problem.H.T)
        n = problem.n
        factor = self._factor_with_ridge(H, n)

        x = -cho_solve(factor, problem.f)
        if problem.r == 0:
            self._last_active = []
            return QpSolution(x, np.zeros(0), OPTIMAL, 0, kkt_residual(problem, x, np.zeros(0)))

        W, w = problem.W, problem.w
        viol_tol = 1e-10 * max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
        active: list[int] = []
        u: list[float] = []
        iterations = 0

        while True:
            slack = W @ x - w
            p = self._pick_violated(slack, active, viol_tol)
            if p is None:
                x, mu = self._polish(H, problem, x, active, u)
                self._last_active = list(active)
                return QpSolution(x, mu, OPTIMAL, iterations, kkt_residual(problem, x, mu))

            n_p = -W[p]
            u_p = 0.0
            while True:
                iterations += 1
                if iterations > self.max_iterations:
                    mu = np.zeros(problem.r)
                    for idx, val in zip(active, u):
                        mu[idx] = val
                    self._last_active = list(active)
                    return QpSolution(x, mu, MAX_ITER, iterations, kkt_residual(problem, x, mu))

                if active:
                    N = -W[active].T
                    HiN = cho_solve(factor, N)
                    Hinp = cho_solve(factor, n_p)
                    M = N.T @ HiN
                    rhs = N.T @ Hinp
                    try:
                        r_vec = np.linalg.solve(M, rhs)
                    except np.linalg.LinAlgError:
                        r_vec = np.linalg.lstsq(M, rhs, rcond=None)[0]
                    z = Hinp - HiN @ r_vec
                else:
                    r_vec = np.zeros(0)
                    z = cho_solve(factor, n_p)

                # Partial step: first active multiplier driven to zero.
                t1 = np.inf
                k = -1
                for j, rj in enumerate(r_vec):
                    if rj > 1e-12:
                        tj = u[j] / rj
                        if tj < t1:
                            t1, k = tj, j

                # Full step: distance until constraint p becomes satisfied.
                s_p = n_p @ x + w[p]  # = -(W[p] @ x - w[p]) < 0 while violated
                denom = n_p @ z
                t2 = -s_p / denom if denom > 1e-14 else np.inf

                if not np.isfinite(t1) and not np.isfinite(t2):
                    self._last_active = list(active)
                    return QpSolution(
                        np.zeros(n), np.zeros(problem.r), INFEASIBLE, iterations, np.inf
                    )

                t = min(t1, t2)
                if np.isfinite(t2):
                    x = x + t * z
                u_p += t
                u = [uj - t * rj for uj, rj in zip(u, r_vec)]

                if t2 <= t1:
                    active.append(p)
                    u.append(u_p)
                    break
                del active[k]
                del u[k]

    def _pick_violated(self, slack: np.ndarray, active: list[int], tol: float):
        if self.warm_start:
            for idx in self._last_active:
                if idx < slack.shape[0] and idx not in active and slack[idx] > tol:
                    return idx
        worst = int(np.argmax(slack))
        if slack[worst] > tol and worst not in active:
            return worst
        # argmax may already be active to numerical tolerance; scan the rest
        order = np.argsort(slack)[::-1]
        for idx in order:
            if slack[idx] <= tol:
                return None
            if idx not in active:
                return int(idx)
        return None

    @staticmethod
    def _polish(H: np.ndarray, problem: QpProblem, x: np.ndarray, active: list[int], u: list[float]):
        """Re-solve the KKT system of the converged active set to sharpen x and mu.

        Removes the error accumulated over dual steps; falls back to the
        iterates when the refit is worse or loses dual feasibility.
        """
        mu = np.zeros(problem.r)
        for idx, val in zip(active, u):
            mu[idx] = val
        if not active:
            return x, mu
        n = problem.n
        m = len(active)
        Wa = problem.W[active]
        kkt = np.zeros((n + m, n + m))
        kkt[:n, :n] = H
        kkt[:n, n:] = Wa.T
        kkt[n:, :n] = Wa
        rhs = np.concatenate([-problem.f, problem.w[active]])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            return x, mu
        x2 = sol[:n]
        mu2 = np.zeros(problem.r)
        mu2[active] = sol[n:]
        if np.min(mu2[active]) < -1e-9 or kkt_residual(problem, x2, mu2) > kkt_residual(problem, x, mu):
            return x, mu
        return x2, mu2

    @staticmethod
    def _factor_with_ridge(H: np.ndarray, n: int):
        """Cholesky with the PSD fallback: add 1e-10 * trace(H)/n ridges until it succeeds."""
        ridge = 0.0
        base = RIDGE_SCALE * max(np.trace(H) / n, 1e-12)
        for _ in range(8):
            try:
                return cho_factor(H + ridge * np.eye(n), lower=True)
            except np.linalg.LinAlgError:
                ridge = base if ridge == 0.0 else ridge * 100.0
        raise np.linalg.LinAlgError("H is not positive semidefinite even after ridging")


def solve(problem: QpProblem) -> QpSolution:
    """One-shot solve with a fresh (cold-started) solver."""
    return DualActiveSetSolver(warm_start=False).solve(problem)


def is_feasible(W, w, tol: float = 1e-9) -> tuple[bool, dict]:
    """Phase-1 check of {x : W x <= w}: minimize the worst violation.

    Returns (feasible, certificate); the certificate carries a feasible
    witness x, or the Farkas combination y >= 0 with y'W = 0 and y'w < 0.
    """
    W = np.asarray(W, dtype=float)
    w = np.asarray(w, dtype=float).reshape(-1)
    if W.size == 0 or W.shape[0] == 0:
        return True, {"witness": np.zeros(W.shape[1] if W.ndim == 2 else 0)}
    W = W.reshape(len(w), -1)
    n = W.shape[1]
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.hstack([W, -np.ones((len(w), 1))])
    bounds = [(None, None)] * n + [(-1.0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=w, bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"phase-1 LP failed: {res.message}")
    s = res.x[-1]
    if s <= tol:
        return True, {"witness": res.x[:n]}
    farkas = -np.asarray(res.ineqlin.marginals)
    return False, {"farkas": farkas, "violation": float(s)}
