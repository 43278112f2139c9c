"""Quaternion and dual quaternion algebra.

Conventions used throughout the package:

* Quaternions are stored as (w, x, y, z) with the Hamilton product
  (i^2 = j^2 = k^2 = ijk = -1).
* Translations are pure quaternions (w = 0) carrying length units.
* A rigid pose is the unit dual quaternion  x = r + eps * (1/2) * t * r
  where r is the rotation and t the translation of the frame origin in
  the parent frame, so composing poses left-to-right chains frames.
"""

from __future__ import annotations

import math

import numpy as np

UNIT_TOL = 1e-9
PURE_TOL = 1e-9


class Quaternion:
    """Hamilton quaternion w + x*i + y*j + z*k."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w: float = 0.0, x: float = 0.0, y: float = 0.0, z: float = 0.0):
        self.w = float(w)
        self.x = float(x)
        self.y = float(y)
        self.z = float(z)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_vec4(cls, v) -> "Quaternion":
        w, x, y, z = v
        return cls(w, x, y, z)

    @classmethod
    def pure(cls, v) -> "Quaternion":
        x, y, z = v
        return cls(0.0, x, y, z)

    @classmethod
    def rotation(cls, angle: float, axis) -> "Quaternion":
        """Unit quaternion rotating by `angle` about the unit 3-vector `axis`."""
        ax, ay, az = axis
        n = math.sqrt(ax * ax + ay * ay + az * az)
        if abs(n - 1.0) > 1e-6:
            raise ValueError("rotation axis must be a unit vector")
        h = 0.5 * angle
        s = math.sin(h)
        return cls(math.cos(h), s * ax, s * ay, s * az)

    # -- algebra ------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            aw, ax, ay, az = self.w, self.x, self.y, self.z
            bw, bx, by, bz = other.w, other.x, other.y, other.z
            return Quaternion(
                aw * bw - ax * bx - ay * by - az * bz,
                aw * bx + ax * bw + ay * bz - az * by,
                aw * by - ax * bz + ay * bw + az * bx,
                aw * bz + ax * by - ay * bx + az * bw,
            )
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z)
        return NotImplemented

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n < 1e-300:
            raise ValueError("cannot normalize a zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def dot(self, other: "Quaternion") -> float:
        return self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z

    def rotate(self, v: "Quaternion") -> "Quaternion":
        """Rotate the pure quaternion `v` by this unit quaternion: self * v * self^*."""
        return self * v * self.conj()

    # -- predicates ---------------------------------------------------

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def is_pure(self, tol: float = PURE_TOL) -> bool:
        return abs(self.w) <= tol

    # -- coordinate export --------------------------------------------

    def vec4(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def vec3(self) -> np.ndarray:
        if not self.is_pure():
            raise ValueError("not a pure quaternion")
        return np.array([self.x, self.y, self.z])

    def __repr__(self):
        return f"Quaternion({self.w:.9g}, {self.x:.9g}, {self.y:.9g}, {self.z:.9g})"

    def __eq__(self, other):
        if not isinstance(other, Quaternion):
            return NotImplemented
        return (self.w, self.x, self.y, self.z) == (other.w, other.x, other.y, other.z)

    def __hash__(self):
        return hash((self.w, self.x, self.y, self.z))


Q_ONE = Quaternion(1.0)
Q_I = Quaternion(0.0, 1.0, 0.0, 0.0)
Q_J = Quaternion(0.0, 0.0, 1.0, 0.0)
Q_K = Quaternion(0.0, 0.0, 0.0, 1.0)


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    return a * b


def quat_conj(h: Quaternion) -> Quaternion:
    return h.conj()


def re(h: Quaternion) -> float:
    return h.w


def im(h: Quaternion) -> Quaternion:
    return Quaternion(0.0, h.x, h.y, h.z)


def qdot(a: Quaternion, b: Quaternion) -> float:
    return a.dot(b)


def qcross(a: Quaternion, b: Quaternion) -> Quaternion:
    """Cross product of two pure quaternions: Im(a*b)."""
    return Quaternion(
        0.0,
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )


def vec3(t: Quaternion) -> np.ndarray:
    return t.vec3()


def vec4(h: Quaternion) -> np.ndarray:
    return h.vec4()


def hamilton_plus4(h: Quaternion) -> np.ndarray:
    """Matrix of left multiplication: vec4(h*b) = hamilton_plus4(h) @ vec4(b)."""
    w, x, y, z = h.w, h.x, h.y, h.z
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    )


def hamilton_minus4(h: Quaternion) -> np.ndarray:
    """Matrix of right multiplication: vec4(a*h) = hamilton_minus4(h) @ vec4(a)."""
    w, x, y, z = h.w, h.x, h.y, h.z
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, z, -y],
            [y, -z, w, x],
            [z, y, -x, w],
        ]
    )


C4 = np.diag([1.0, -1.0, -1.0, -1.0])
C8 = np.diag([1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0])


class DualQuaternion:
    """Dual quaternion primary + eps * dual."""

    __slots__ = ("primary", "dual")

    def __init__(self, primary: Quaternion, dual: Quaternion | None = None):
        self.primary = primary
        self.dual = dual if dual is not None else Quaternion()

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls) -> "DualQuaternion":
        return cls(Quaternion(1.0), Quaternion())

    @classmethod
    def from_vec8(cls, v) -> "DualQuaternion":
        v = np.asarray(v, dtype=float)
        if v.shape != (8,):
            raise ValueError("vec8 must have 8 entries")
        return cls(Quaternion.from_vec4(v[:4]), Quaternion.from_vec4(v[4:]))

    @classmethod
    def from_rt(cls, r: Quaternion, t: Quaternion) -> "DualQuaternion":
        """Pose with rotation r (unit) and translation t (pure): r + eps*(1/2)*t*r."""
        if not r.is_unit():
            raise ValueError("rotation part must be a unit quaternion")
        if not t.is_pure():
            raise ValueError("translation part must be a pure quaternion")
        return cls(r, 0.5 * (t * r))

    @classmethod
    def from_translation(cls, v) -> "DualQuaternion":
        return cls(Quaternion(1.0), 0.5 * Quaternion.pure(v))

    # -- algebra ------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, DualQuaternion):
            # expanded primary*other.primary and primary*other.dual +
            # dual*other.primary; this product dominates the control loop
            p, d = self.primary, self.dual
            op, od = other.primary, other.dual
            aw, ax, ay, az = p.w, p.x, p.y, p.z
            bw, bx, by, bz = op.w, op.x, op.y, op.z
            out_p = Quaternion(
                aw * bw - ax * bx - ay * by - az * bz,
                aw * bx + ax * bw + ay * bz - az * by,
                aw * by - ax * bz + ay * bw + az * bx,
                aw * bz + ax * by - ay * bx + az * bw,
            )
            cw, cx, cy, cz = od.w, od.x, od.y, od.z
            dw, dx, dy, dz = d.w, d.x, d.y, d.z
            out_d = Quaternion(
                aw * cw - ax * cx - ay * cy - az * cz + dw * bw - dx * bx - dy * by - dz * bz,
                aw * cx + ax * cw + ay * cz - az * cy + dw * bx + dx * bw + dy * bz - dz * by,
                aw * cy - ax * cz + ay * cw + az * cx + dw * by - dx * bz + dy * bw + dz * bx,
                aw * cz + ax * cy - ay * cx + az * cw + dw * bz + dx * by - dy * bx + dz * bw,
            )
            return DualQuaternion(out_p, out_d)
        if isinstance(other, (int, float)):
            return DualQuaternion(self.primary * other, self.dual * other)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, DualQuaternion):
            return DualQuaternion(self.primary + other.primary, self.dual + other.dual)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, DualQuaternion):
            return DualQuaternion(self.primary - other.primary, self.dual - other.dual)
        return NotImplemented

    def conj(self) -> "DualQuaternion":
        return DualQuaternion(self.primary.conj(), self.dual.conj())

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return abs(self.primary.norm() - 1.0) <= tol and abs(self.primary.dot(self.dual)) <= tol

    def normalized(self) -> "DualQuaternion":
        """Re-project onto the unit dual quaternion manifold.

        Primary part is rescaled to unit norm; the dual part is divided by the
        same factor and its component along the primary removed. Bounds drift
        when poses are chained every control tick.
        """
        n = self.primary.norm()
        if n < 1e-300:
            raise ValueError("cannot normalize: zero primary part")
        p = self.primary * (1.0 / n)
        d = self.dual * (1.0 / n)
        d = d - p.dot(d) * p
        return DualQuaternion(p, d)

    # -- pose extraction ----------------------------------------------

    def rotation(self) -> Quaternion:
        return self.primary

    def translation(self) -> Quaternion:
        """Translation t = 2 * dual * primary^*, returned as an exactly pure quaternion."""
        t = 2.0 * (self.dual * self.primary.conj())
        return Quaternion(0.0, t.x, t.y, t.z)

    def rt(self) -> tuple[Quaternion, Quaternion]:
        if not self.is_unit():
            raise ValueError("pose extraction requires a unit dual quaternion")
        return self.primary, self.translation()

    def vec8(self) -> np.ndarray:
        return np.array(
            [
                self.primary.w,
                self.primary.x,
                self.primary.y,
                self.primary.z,
                self.dual.w,
                self.dual.x,
                self.dual.y,
                self.dual.z,
            ]
        )

    def __repr__(self):
        return f"DualQuaternion({self.primary!r}, {self.dual!r})"


def dq_mul(a: DualQuaternion, b: DualQuaternion) -> DualQuaternion:
    return a * b


def dq_conj(x: DualQuaternion) -> DualQuaternion:
    return x.conj()


def dq_primary(x: DualQuaternion) -> Quaternion:
    return x.primary


def dq_dual(x: DualQuaternion) -> Quaternion:
    return x.dual


def pose_from_rt(r: Quaternion, t: Quaternion) -> DualQuaternion:
    return DualQuaternion.from_rt(r, t)


def rt_from_pose(x: DualQuaternion) -> tuple[Quaternion, Quaternion]:
    return x.rt()


def vec8(x: DualQuaternion) -> np.ndarray:
    return x.vec8()


def hamilton_plus8(x: DualQuaternion) -> np.ndarray:
    """vec8(x*b) = hamilton_plus8(x) @ vec8(b)."""
    hp = hamilton_plus4(x.primary)
    out = np.zeros((8, 8))
    out[:4, :4] = hp
    out[4:, 4:] = hp
    out[4:, :4] = hamilton_plus4(x.dual)
    return out


def hamilton_minus8(x: DualQuaternion) -> np.ndarray:
    """vec8(a*x) = hamilton_minus8(x) @ vec8(a)."""
    hm = hamilton_minus4(x.primary)
    out = np.zeros((8, 8))
    out[:4, :4] = hm
    out[4:, 4:] = hm
    out[4:, :4] = hamilton_minus4(x.dual)
    return out
