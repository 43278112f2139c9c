"""Regenerate the bundled scenario files and master scripts.

The numbers frozen here (base poses, initial configurations, entry points,
waypoints) were tuned against the simulator; rerun this tool after model
changes and re-verify with the acceptance suite.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from teleoqp.dq import Q_K, Quaternion, pose_from_rt, vec3
from teleoqp.geometry import dist_line_line
from teleoqp.kinematics import RobotModel, fkm, line_jacobian
from teleoqp.sim.scripts import segment_commands, write_script

ROOT = Path(__file__).resolve().parents[1]
SCN = ROOT / "src" / "teleoqp" / "scenarios"
MODELS = ROOT / "src" / "teleoqp" / "models"


def quat_from_matrix(R) -> Quaternion:
    x, y, z, w = Rotation.from_matrix(R).as_quat()
    return Quaternion(w, x, y, z)


def vec8_of(pose) -> list[float]:
    return [round(v, 15) for v in pose.vec8()]


# ---------------------------------------------------------------- dVRK pair


def dvrk_bases():
    """Angled V-configuration; the right arm is the left one rotated 180 deg
    about the vertical scene axis, which keeps the shafts skew."""
    tilt, pitch = np.deg2rad(22), np.deg2rad(8)
    shaft_dir = np.array([np.sin(tilt), np.sin(pitch), -np.sqrt(1 - np.sin(tilt) ** 2 - np.sin(pitch) ** 2)])
    R_left, _ = Rotation.align_vectors([shaft_dir, [0.9, 0, 0.3]], [[-1, 0, 0], [0, 0, -1]])
    RL = R_left.as_matrix()
    RR = Rotation.from_euler("z", np.pi).as_matrix() @ RL
    base_left = pose_from_rt(quat_from_matrix(RL), Quaternion.pure([-0.085, 0.0, 0.28]))
    base_right = pose_from_rt(quat_from_matrix(RR), Quaternion.pure([0.085, 0.0, 0.28]))
    return base_left, base_right


def dvrk_conflict_geometry(base_left, base_right, q0):
    with open(MODELS / "psm6.json") as f:
        mdata = json.load(f)
    model = RobotModel.from_dict(mdata)
    left = RobotModel("left", model.joints, base_left, model.effector)
    right = RobotModel("right", model.joints, base_right, model.effector)
    l1, j1 = line_jacobian(left, q0, Q_K, link=3)
    l2, j2 = line_jacobian(right, q0, Q_K, link=3)
    d0 = dist_line_line(l1, j1, l2, j2).d
    tip_left = vec3(fkm(left, q0).translation())
    tip_right = vec3(fkm(right, q0).translation())
    p2 = vec3(l2.closest_point_to_origin())
    lv2 = vec3(l2.l)
    proj = (tip_left - p2) @ lv2
    closest = p2 + proj * lv2
    u = closest - tip_left
    tip_line_dist = float(np.linalg.norm(u))
    return left, right, d0, tip_left, tip_right, tip_line_dist, u / tip_line_dist


def make_dvrk(base_left, base_right):
    q0 = np.array([0.0, 0.0, 0.15, 0.0, 0.0, 0.0])
    left, right, d0, tip_left, tip_right, tip_dist, u = dvrk_conflict_geometry(base_left, base_right, q0)
    d_safe = 0.01
    board_z = round(float(min(tip_left[2], tip_right[2]) - 0.08), 6)

    def scenario(name, beta, script, duration):
        return {
            "schema_version": 1,
            "name": name,
            "robots": [
                {"name": "left", "model": "psm6", "base": vec8_of(base_left), "q0": q0.tolist()},
                {"name": "right", "model": "psm6", "base": vec8_of(base_right), "q0": q0.tolist()},
            ],
            "constraints": [
                {
                    "name": "shafts",
                    "zone": "restricted",
                    "d_safe": d_safe,
                    "eta_d": 1.0,
                    "pair": [
                        {"type": "line", "attached_to": "left", "link": 3, "axis": [0, 0, 1]},
                        {"type": "line", "attached_to": "right", "link": 3, "axis": [0, 0, 1]},
                    ],
                },
                {
                    "name": "board",
                    "zone": "restricted",
                    "d_safe": 0.0,
                    "eta_d": 1.0,
                    "pair": [
                        {"type": "point", "attached_to": "right"},
                        {"type": "plane", "attached_to": "world", "normal": [0, 0, 1], "plane_offset": board_z},
                    ],
                },
            ],
            "controller": {
                "alpha": 0.99,
                "beta": beta,
                "eta": 1.0,
                "eta_d": 1.0,
                "lambda_r": 0.01,
                "lambda_f": 0.01,
                "forceps_dofs": 3,
                "sampling_time": 0.001,
                "motion_scaling": 0.5,
            },
            "impedance": {"stiffness": 350.0, "viscosity": 10.0},
            "masters": [{"robot": "left"}, {"robot": "right"}],
            "master_script": f"scripts/{script}",
            "duration": duration,
            "seed": 0,
        }

    # conflict: press 12 mm past the contact point, then dwell to steady
    # state. Commands at the tick rate so the master advances every tick,
    # which keeps the blocked-interval force growth strictly monotone.
    drag = (tip_dist - d_safe) + 0.012
    conflict = segment_commands(
        0,
        0.2,
        [(0.3, np.zeros(3)), (3.3, drag * u), (8.0, drag * u)],
        rate_hz=1000.0,
        motion_scaling=0.5,
    )
    write_script(conflict, SCN / "scripts" / "dvrk_conflict.jsonl")

    # crash: both masters drive hard into their constraints and keep
    # pressing long enough to reach the damper boundary
    crash_drag = (tip_dist - d_safe) + 0.03
    crash = segment_commands(
        0,
        0.2,
        [(0.2, np.zeros(3)), (1.4, crash_drag * u), (7.6, crash_drag * u)],
        rate_hz=50.0,
        motion_scaling=0.5,
    ) + segment_commands(
        1,
        0.2,
        [(0.2, np.zeros(3)), (1.4, np.array([0.0, 0.0, -0.10])), (7.6, np.array([0.0, 0.0, -0.10]))],
        rate_hz=50.0,
        motion_scaling=0.5,
    )
    write_script(crash, SCN / "scripts" / "dvrk_crash.jsonl")

    for name, beta in (("dvrk-priority-b05", 0.5), ("dvrk-priority-b099", 0.99), ("dvrk-priority-b001", 0.01)):
        with open(SCN / f"{name}.json", "w") as f:
            json.dump(scenario(name, beta, "dvrk_conflict.jsonl", 8.5), f, indent=1)
            f.write("\n")
    with open(SCN / "dvrk-crash.json", "w") as f:
        json.dump(scenario("dvrk-crash", 0.5, "dvrk_crash.jsonl", 8.0), f, indent=1)
        f.write("\n")
    print(f"dvrk: d0={d0:.4f} tip_dist={tip_dist:.4f} drag={drag:.4f} u={u.round(4).tolist()} board_z={board_z}")


# ---------------------------------------------------------------- infant pair


def make_infant():
    with open(MODELS / "arm7r.json") as f:
        adata = json.load(f)
    arm = RobotModel.from_dict(adata)
    q0 = np.array([0.0, 1.1, 0.0, -1.7, 0.0, 0.85, 0.0])
    base_left = pose_from_rt(Quaternion.rotation(np.pi, [0, 0, 1]), Quaternion.pure([-0.35, 0.0, 0.25]))
    base_right = pose_from_rt(Quaternion(1.0), Quaternion.pure([0.35, 0.0, 0.25]))

    sides = {}
    for name, base, y_ref in (("left", base_left, [0.0, -1.0, 0.0]), ("right", base_right, [0.0, 1.0, 0.0])):
        m = RobotModel(name, arm.joints, base, arm.effector)
        x = fkm(m, q0)
        r, t = x.rt()
        tip = vec3(t)
        zdir = vec3(r.rotate(Q_K))
        entry = tip - 0.05 * zdir
        # shaft-aligned frame: insertion along the tool axis, laterals
        # perpendicular. The reference axis flips with the side so the two
        # arms (which are 180-degree rotations of each other) see
        # identical waypoint geometry.
        lat1 = np.cross(zdir, y_ref)
        lat1 /= np.linalg.norm(lat1)
        lat2 = np.cross(zdir, lat1)
        sides[name] = {"tip": tip, "entry": entry, "insert": zdir, "lat1": lat1, "lat2": lat2}
        print(f"infant {name}: tip={tip.round(4)} z={zdir.round(4)} entry={entry.round(4)}")

    entry_radius = 0.003
    cuboids = {
        name: {
            "center": (np.asarray(s["tip"]) + np.array([0.0, 0.0, -0.01])).round(6).tolist(),
            "extents": [0.14, 0.14, 0.11],
        }
        for name, s in sides.items()
    }

    constraints = []
    for name in ("left", "right"):
        constraints.append(
            {
                "name": f"entry-{name}",
                "zone": "safe",
                "d_safe": entry_radius,
                "eta_d": 1.0,
                "pair": [
                    {"type": "line", "attached_to": name, "axis": [0, 0, 1]},
                    {
                        "type": "sphere",
                        "attached_to": "world",
                        "center": sides[name]["entry"].round(6).tolist(),
                        "radius": entry_radius,
                    },
                ],
            }
        )
        constraints.append(
            {
                "name": f"cuboid-{name}",
                "zone": "restricted",
                "d_safe": 0.0,
                "eta_d": 1.0,
                "pair": [
                    {"type": "point", "attached_to": name},
                    {
                        "type": "cuboid",
                        "attached_to": "world",
                        "center": cuboids[name]["center"],
                        "rotation": [1, 0, 0, 0],
                        "extents": cuboids[name]["extents"],
                    },
                ],
            }
        )

    scenario = {
        "schema_version": 1,
        "name": "infant-entry-sphere",
        "robots": [
            {"name": "left", "model": "arm7r", "base": vec8_of(base_left), "q0": q0.tolist()},
            {"name": "right", "model": "arm7r", "base": vec8_of(base_right), "q0": q0.tolist()},
        ],
        "constraints": constraints,
        "controller": {
            "alpha": 0.99,
            "beta": 0.5,
            "eta": 80.0,
            "eta_d": 1.0,
            "lambda_r": 0.01,
            "lambda_f": 0.0,
            "forceps_dofs": 2,
            "sampling_time": 0.001,
            "motion_scaling": 0.3333333333333333,
        },
        "impedance": {"stiffness": 100.0, "viscosity": 10.0},
        "masters": [{"robot": "left"}, {"robot": "right"}],
        "master_script": "scripts/infant_pegs.jsonl",
        "duration": 60.0,
        "seed": 0,
    }
    with open(SCN / "infant-entry-sphere.json", "w") as f:
        json.dump(scenario, f, indent=1)
        f.write("\n")

    # peg-transfer-like waypoints expressed in each arm's shaft frame so the
    # insertions pivot through the entry point; one slow lateral press leans
    # on the entry sphere and one retraction presses the cuboid ceiling.
    def waypoints(side):
        ins, l1, l2 = side["insert"], side["lat1"], side["lat2"]
        a = 0.0025 * l1 + 0.035 * ins  # descend with slight lean
        b = 0.045 * ins  # recenter, deeper
        c = 0.0055 * l2 + 0.042 * ins  # slow press past the sphere radius
        d = 0.0020 * l2 + 0.042 * ins  # ease off
        e = -0.065 * ins  # retract against the ceiling
        z = np.zeros(3)
        return [
            (1.0, z),
            (7.0, a),
            (9.0, a),
            (11.5, b),
            (13.5, b),
            (20.0, c),
            (25.0, c),
            (28.0, d),
            (30.0, d),
            (36.0, e),
            (40.0, e),
            (46.0, z),
            (58.0, z),
        ]

    cmds = segment_commands(0, 0.3, waypoints(sides["left"]), rate_hz=50.0, motion_scaling=1 / 3) + segment_commands(
        1, 0.3, waypoints(sides["right"]), rate_hz=50.0, motion_scaling=1 / 3
    )
    write_script(cmds, SCN / "scripts" / "infant_pegs.jsonl")


if __name__ == "__main__":
    SCN.mkdir(parents=True, exist_ok=True)
    (SCN / "scripts").mkdir(exist_ok=True)
    bl, br = dvrk_bases()
    make_dvrk(bl, br)
    make_infant()
    print("bundled scenarios written to", SCN)
