"""Constrained bimanual teleoperation kernel and simulator."""

__version__ = "0.1.0"
