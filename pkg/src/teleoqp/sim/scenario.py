"""Scenario files: schema, validation, and compilation to runtime objects.

A scenario is a JSON document naming the robots (bundled models or inline DH
tables), the constraint pairs, the controller and impedance parameters, and
either fixed targets or a master-command script. Loading is deterministic
given the file bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from ..controller import ControllerConfig, TaskTarget
from ..dq import DualQuaternion, Quaternion
from ..geometry import Plane, cuboid_planes
from ..impedance import ImpedanceConfig
from ..kinematics import JointState, RobotModel, fkm
from ..vfi import (
    ConstraintSpec,
    LineLineConstraint,
    LinePointConstraint,
    PlanePointConstraint,
    PointPointConstraint,
    PointPointPairConstraint,
    RobotLine,
    RobotPoint,
    WorldPoint,
)

SCHEMA_VERSION = 1

_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_VEC4 = {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}
_VEC8 = {"type": "array", "items": {"type": "number"}, "minItems": 8, "maxItems": 8}

_PRIMITIVE_SCHEMA = {
    "type": "object",
    "required": ["type", "attached_to"],
    "properties": {
        "type": {"enum": ["line", "point", "plane", "sphere", "cuboid"]},
        "attached_to": {"type": "string"},
        "axis": _VEC3,
        "link": {"type": "integer", "minimum": 0},
        "offset": _VEC3,
        "position": _VEC3,
        "velocity": _VEC3,
        "normal": _VEC3,
        "plane_offset": {"type": "number"},
        "center": _VEC3,
        "radius": {"type": "number", "minimum": 0},
        "rotation": _VEC4,
        "extents": _VEC3,
    },
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "name", "robots", "controller"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "robots": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "model"],
                "properties": {
                    "name": {"type": "string"},
                    "model": {"type": ["string", "object"]},
                    "base": _VEC8,
                    "q0": {"type": "array", "items": {"type": "number"}},
                    "q_min": {"type": "array", "items": {"type": "number"}},
                    "q_max": {"type": "array", "items": {"type": "number"}},
                    "qd_max": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "constraints": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "zone", "pair"],
                "properties": {
                    "name": {"type": "string"},
                    "zone": {"enum": ["restricted", "safe"]},
                    "d_safe": {"type": "number", "minimum": 0},
                    "eta_d": {"type": "number", "minimum": 0},
                    "d_safe_rate": {"type": "number"},
                    "pair": {"type": "array", "items": _PRIMITIVE_SCHEMA, "minItems": 2, "maxItems": 2},
                },
            },
        },
        "controller": {
            "type": "object",
            "properties": {
                "alpha": {"type": "number", "minimum": 0, "maximum": 1},
                "beta": {"type": "number", "minimum": 0, "maximum": 1},
                "eta": {"type": "number", "exclusiveMinimum": 0},
                "eta_d": {"type": "number", "minimum": 0},
                "eta_q": {"type": "number", "minimum": 0},
                "lambda_r": {"type": "number", "minimum": 0},
                "lambda_f": {"type": "number", "minimum": 0},
                "forceps_dofs": {"type": "integer", "minimum": 0},
                "sampling_time": {"type": "number", "exclusiveMinimum": 0},
                "motion_scaling": {"type": "number", "exclusiveMinimum": 0},
                "beta_floor": {"type": "number", "minimum": 0},
            },
        },
        "impedance": {
            "type": "object",
            "properties": {
                "stiffness": {"type": "number", "exclusiveMinimum": 0},
                "viscosity": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "masters": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["robot"],
                "properties": {"robot": {"type": "string"}, "align": _VEC4},
            },
        },
        "targets": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["r", "t"],
                "properties": {"r": _VEC4, "t": _VEC3},
            },
        },
        "master_script": {"type": "string"},
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
    },
}


class ScenarioError(ValueError):
    """Scenario file rejected, with the offending field in the message."""


@dataclass
class ScenarioRobot:
    name: str
    model: RobotModel
    state: JointState


@dataclass
class MasterBinding:
    robot: int
    align: Quaternion


@dataclass
class Scenario:
    name: str
    robots: list[ScenarioRobot]
    constraints: list
    controller: ControllerConfig
    impedance: ImpedanceConfig
    masters: list[MasterBinding]
    targets0: list[TaskTarget]
    master_script: Path | None
    duration: float
    seed: int
    warnings: list[str] = field(default_factory=list)

    @property
    def models(self):
        return [r.model for r in self.robots]

    @property
    def states(self):
        return [r.state for r in self.robots]

    def constraint_names(self) -> list[str]:
        return [c.spec.name for c in self.constraints]


def bundled_model_path(name: str) -> Path:
    path = resources.files("teleoqp").joinpath(f"models/{name}.json")
    if not path.is_file():
        raise ScenarioError(f"robots[].model: no bundled robot model named {name!r}")
    return Path(str(path))


def bundled_scenario_path(name: str) -> Path:
    path = resources.files("teleoqp").joinpath(f"scenarios/{name}.json")
    if not path.is_file():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return Path(str(path))


def _load_model_entry(entry, base_dir: Path) -> tuple[RobotModel, dict]:
    if isinstance(entry, str):
        path = Path(entry)
        if not path.suffix:
            path = bundled_model_path(entry)
        elif not path.is_absolute():
            path = base_dir / path
        with open(path) as f:
            data = json.load(f)
    else:
        data = entry
    model = RobotModel.from_dict(data)
    return model, data


def _quaternion(vec) -> Quaternion:
    return Quaternion.from_vec4(np.asarray(vec, dtype=float))


def _pure(vec) -> Quaternion:
    return Quaternion.pure(np.asarray(vec, dtype=float))


def _axis(vec) -> Quaternion:
    v = np.asarray(vec, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ScenarioError("primitive axis/normal must be nonzero")
    return Quaternion.pure(v / n)


def _compile_constraint(entry: dict, robot_index: dict[str, int], ctx: str):
    spec_kwargs = dict(
        zone=entry["zone"],
        d_safe=float(entry.get("d_safe", 0.0)),
        eta_d=float(entry.get("eta_d", 1.0)),
        d_safe_rate=float(entry.get("d_safe_rate", 0.0)),
        name=entry["name"],
    )
    sides = []
    for j, prim in enumerate(entry["pair"]):
        attached = prim["attached_to"]
        where = f"{ctx}.pair[{j}]"
        if attached == "world":
            sides.append(("world", prim))
        else:
            if attached not in robot_index:
                raise ScenarioError(f"{where}.attached_to: unknown robot {attached!r}")
            sides.append((robot_index[attached], prim))

    robot_sides = [(i, p) for i, p in sides if i != "world"]
    world_sides = [p for i, p in sides if i == "world"]

    def robot_line(i, p):
        return RobotLine(i, _axis(p.get("axis", [0, 0, 1])), p.get("link"))

    def robot_point(i, p):
        off = p.get("offset")
        return RobotPoint(i, _pure(off) if off is not None else None, p.get("link"))

    if len(robot_sides) == 2:
        (ia, pa), (ib, pb) = robot_sides
        kinds = (pa["type"], pb["type"])
        if kinds == ("line", "line"):
            return [LineLineConstraint(robot_line(ia, pa), robot_line(ib, pb), ConstraintSpec(**spec_kwargs))]
        if kinds == ("point", "point"):
            return [PointPointPairConstraint(robot_point(ia, pa), robot_point(ib, pb), ConstraintSpec(**spec_kwargs))]
        raise ScenarioError(f"{ctx}: unsupported robot-robot pair {kinds}")

    if len(robot_sides) != 1:
        raise ScenarioError(f"{ctx}: exactly one side must be robot-attached")
    (ir, pr) = robot_sides[0]
    pw = world_sides[0]
    rkind, wkind = pr["type"], pw["type"]

    if rkind == "line" and wkind in ("point", "sphere"):
        if wkind == "sphere":
            target = WorldPoint(pw["center"], pw.get("velocity"))
            if "d_safe" not in entry:
                spec_kwargs["d_safe"] = float(pw["radius"])
        else:
            target = WorldPoint(pw["position"], pw.get("velocity"))
        return [LinePointConstraint(robot_line(ir, pr), target, ConstraintSpec(**spec_kwargs))]

    if rkind == "point" and wkind in ("point", "sphere"):
        if wkind == "sphere":
            target = WorldPoint(pw["center"], pw.get("velocity"))
            if "d_safe" not in entry:
                spec_kwargs["d_safe"] = float(pw["radius"])
        else:
            target = WorldPoint(pw["position"], pw.get("velocity"))
        return [PointPointConstraint(robot_point(ir, pr), target, ConstraintSpec(**spec_kwargs))]

    if rkind == "point" and wkind == "plane":
        plane = Plane(_axis(pw["normal"]), float(pw.get("plane_offset", 0.0)))
        return [PlanePointConstraint(plane, robot_point(ir, pr), ConstraintSpec(**spec_kwargs))]

    if rkind == "point" and wkind == "cuboid":
        rot = _quaternion(pw.get("rotation", [1, 0, 0, 0])).normalized()
        pose = DualQuaternion.from_rt(rot, _pure(pw.get("center", [0, 0, 0])))
        planes = cuboid_planes(pose, pw["extents"])
        out = []
        for pl, face in zip(planes, ("x+", "x-", "y+", "y-", "z+", "z-")):
            kw = dict(spec_kwargs)
            kw["name"] = f"{entry['name']}/{face}"
            out.append(PlanePointConstraint(pl, robot_point(ir, pr), ConstraintSpec(**kw)))
        return out

    raise ScenarioError(f"{ctx}: unsupported pair ({rkind}, {wkind})")


def load_scenario(path) -> Scenario:
    path = Path(path)
    with open(path) as f:
        data = json.load(f)
    return compile_scenario(data, base_dir=path.parent)


def compile_scenario(data: dict, base_dir: Path | None = None) -> Scenario:
    base_dir = base_dir or Path.cwd()
    validator = Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: e.json_path)
    if errors:
        e = errors[0]
        raise ScenarioError(f"{e.json_path}: {e.message}")

    warnings: list[str] = []
    robots = []
    robot_index: dict[str, int] = {}
    for i, entry in enumerate(data["robots"]):
        model, model_data = _load_model_entry(entry["model"], base_dir)
        if "base" in entry:
            model.base = DualQuaternion.from_vec8(entry["base"]).normalized()
        name = entry["name"]
        if name in robot_index:
            raise ScenarioError(f"robots[{i}].name: duplicate robot name {name!r}")
        robot_index[name] = i
        n = model.n

        def pick(key, fallback):
            if key in entry:
                return np.asarray(entry[key], dtype=float)
            if key in model_data:
                return np.asarray(model_data[key], dtype=float)
            return fallback

        q_min = pick("q_min", -np.full(n, np.pi))
        q_max = pick("q_max", np.full(n, np.pi))
        qd_max = pick("qd_max", np.full(n, 2.0))
        q0 = np.asarray(entry.get("q0", np.zeros(n)), dtype=float)
        if q0.shape != (n,):
            raise ScenarioError(f"robots[{i}].q0: expected {n} values")
        state = JointState(q=q0, q_min=q_min, q_max=q_max, qd_max=qd_max)
        if not state.inside_limits():
            raise ScenarioError(f"robots[{i}].q0: initial configuration violates joint limits")
        robots.append(ScenarioRobot(name, model, state))

    constraints = []
    for k, centry in enumerate(data.get("constraints", [])):
        constraints.extend(_compile_constraint(centry, robot_index, f"constraints[{k}]"))

    controller = ControllerConfig(**data.get("controller", {}))
    imp = data.get("impedance", {"stiffness": 100.0, "viscosity": 10.0})
    impedance = ImpedanceConfig(stiffness=imp.get("stiffness", 100.0), viscosity=imp.get("viscosity", 10.0))

    targets0 = []
    if "targets" in data:
        if len(data["targets"]) != len(robots):
            raise ScenarioError("targets: need one target per robot")
        for tentry in data["targets"]:
            targets0.append(TaskTarget(_quaternion(tentry["r"]).normalized(), _pure(tentry["t"])))
    else:
        for robot in robots:
            r, t = fkm(robot.model, robot.state.q).rt()
            targets0.append(TaskTarget(r, t))

    masters = []
    for j, mentry in enumerate(data.get("masters", [{"robot": r.name} for r in robots])):
        rname = mentry["robot"]
        if rname not in robot_index:
            raise ScenarioError(f"masters[{j}].robot: unknown robot {rname!r}")
        align = _quaternion(mentry.get("align", [1, 0, 0, 0])).normalized()
        masters.append(MasterBinding(robot_index[rname], align))

    script = data.get("master_script")
    script_path = None
    if script is not None:
        script_path = Path(script)
        if not script_path.is_absolute():
            script_path = base_dir / script_path
        if not script_path.is_file():
            raise ScenarioError(f"master_script: file not found: {script_path}")

    scenario = Scenario(
        name=data["name"],
        robots=robots,
        constraints=constraints,
        controller=controller,
        impedance=impedance,
        masters=masters,
        targets0=targets0,
        master_script=script_path,
        duration=float(data.get("duration", 10.0)),
        seed=int(data.get("seed", 0)),
        warnings=warnings,
    )

    _warn_initial_violations(scenario)
    return scenario


def _warn_initial_violations(scenario: Scenario):
    from ..controller import control_step  # late import to avoid cycles
    from ..qp import DualActiveSetSolver

    diag = control_step(
        scenario.models,
        scenario.states,
        scenario.targets0,
        scenario.constraints,
        scenario.controller,
        DualActiveSetSolver(),
        t=0.0,
    )
    for constraint, d in zip(scenario.constraints, diag.distances):
        err = d - constraint.spec.d_safe
        if constraint.spec.zone == "safe":
            err = -err
        if err < 0:
            scenario.warnings.append(
                f"constraint {constraint.spec.name!r} starts violated (d={d:.6g}, d_safe={constraint.spec.d_safe:.6g})"
            )
