"""Master-command script synthesis.

Scripts are JSON lines of timestamped master_cmd messages. Deltas are
cumulative since clutch engage and expressed in the master frame, so a slave
displacement of D requires a master delta of D / motion_scaling.
"""

from __future__ import annotations

import json

import numpy as np


def segment_commands(
    master_id: int,
    t_start: float,
    waypoints: list[tuple[float, np.ndarray]],
    rate_hz: float,
    motion_scaling: float,
    engage: bool = True,
    release: bool = True,
) -> list[dict]:
    """Piecewise-linear slave-space waypoints -> master command stream.

    `waypoints` are (dwell_end_time, slave_displacement_from_start) pairs with
    strictly increasing times, displacement interpolated linearly between
    them. Commands are emitted at `rate_hz` while clutched.
    """
    cmds = []
    t = t_start
    if engage:
        cmds.append(_cmd(t, master_id, True, np.zeros(3)))
    times = [t_start] + [t_start + wp[0] for wp in waypoints]
    disps = [np.zeros(3)] + [np.asarray(wp[1], dtype=float) for wp in waypoints]
    dt_cmd = 1.0 / rate_hz
    t = t_start + dt_cmd
    end = times[-1]
    k = 1
    while t <= end + 1e-12:
        while k < len(times) - 1 and t > times[k]:
            k += 1
        t0, t1 = times[k - 1], times[k]
        frac = 0.0 if t1 <= t0 else min(max((t - t0) / (t1 - t0), 0.0), 1.0)
        disp = disps[k - 1] + frac * (disps[k] - disps[k - 1])
        cmds.append(_cmd(t, master_id, True, disp / motion_scaling))
        t += dt_cmd
    if release:
        cmds.append(_cmd(end + dt_cmd, master_id, False, disps[-1] / motion_scaling))
    return cmds


def hold_command(master_id: int, t: float) -> dict:
    """Engage without motion (freezes the target at its current value)."""
    return _cmd(t, master_id, True, np.zeros(3))


def _cmd(t: float, master_id: int, clutch: bool, delta_t: np.ndarray, delta_r=None) -> dict:
    return {
        "t": round(float(t), 9),
        "type": "master_cmd",
        "master_id": master_id,
        "clutch": bool(clutch),
        "dt": np.asarray(delta_t, dtype=float).round(12).tolist(),
        "dr": [1.0, 0.0, 0.0, 0.0] if delta_r is None else list(delta_r),
    }


def write_script(commands: list[dict], path) -> None:
    commands = sorted(commands, key=lambda c: c["t"])
    with open(path, "w") as f:
        for cmd in commands:
            f.write(json.dumps(cmd) + "\n")
