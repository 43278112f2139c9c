"""Master-side Cartesian impedance.

The reflected force is proportional to the slave's translation error seen
from the master plus a viscous term on the master's own velocity, letting
the operator feel directions the slave cannot follow. Translation only; no
torque reflection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ImpedanceConfig:
    stiffness: float  # N per length unit
    viscosity: float  # N s per length unit

    def __post_init__(self):
        if self.stiffness <= 0.0 or self.viscosity <= 0.0:
            raise ValueError("stiffness and viscosity must be positive")


@dataclass
class ReflectedForce:
    gamma: np.ndarray  # Newtons, master base frame
    frame: str = "master"

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float).reshape(3)
        if not np.all(np.isfinite(self.gamma)):
            raise ValueError("reflected force must be finite")


def master_force(t_err_master, t_dot_master, cfg: ImpedanceConfig) -> ReflectedForce:
    """Gamma = -stiffness * t_err - viscosity * t_dot, all in the master frame.

    `t_err_master` must already be the slave translation error mapped through
    the inverse teleoperation mapping (alignment rotation and 1/MS scaling).
    """
    e = np.asarray(t_err_master, dtype=float).reshape(3)
    v = np.asarray(t_dot_master, dtype=float).reshape(3)
    return ReflectedForce(-cfg.stiffness * e - cfg.viscosity * v)
