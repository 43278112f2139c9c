import json

import numpy as np
import pytest

from teleoqp.sim.scenario import (
    ScenarioError,
    bundled_scenario_path,
    compile_scenario,
    load_scenario,
)


def minimal_scenario(**overrides):
    data = {
        "schema_version": 1,
        "name": "mini",
        "robots": [
            {
                "name": "solo",
                "model": {
                    "name": "solo2r",
                    "dh": [[0, 0, 1.0, 0, "revolute"], [0, 0, 1.0, 0, "revolute"]],
                },
                "q0": [0.2, -0.3],
                "q_min": [-3, -3],
                "q_max": [3, 3],
                "qd_max": [2, 2],
            }
        ],
        "controller": {"alpha": 1.0, "beta": 0.5, "eta": 1.0},
        "duration": 1.0,
    }
    data.update(overrides)
    return data


class TestBundledScenarios:
    def test_dvrk_priority_b05(self):
        sc = load_scenario(bundled_scenario_path("dvrk-priority-b05"))
        assert len(sc.robots) == 2
        names = sc.constraint_names()
        assert "shafts" in names
        assert "board" in names
        assert sc.controller.beta == 0.5
        assert sc.controller.motion_scaling == 0.5
        assert not sc.warnings

    def test_dvrk_priority_variants(self):
        assert load_scenario(bundled_scenario_path("dvrk-priority-b099")).controller.beta == 0.99
        assert load_scenario(bundled_scenario_path("dvrk-priority-b001")).controller.beta == 0.01

    def test_infant_entry_sphere(self):
        sc = load_scenario(bundled_scenario_path("infant-entry-sphere"))
        assert len(sc.robots) == 2
        names = sc.constraint_names()
        assert sum(1 for n in names if n.startswith("entry-")) == 2
        assert sum(1 for n in names if n.startswith("cuboid-")) == 12
        assert sc.controller.beta == 0.5
        assert sc.controller.eta == 80.0
        assert sc.controller.lambda_f == 0.0
        assert not sc.warnings

    def test_unknown_bundled_name(self):
        with pytest.raises(ScenarioError, match="no bundled scenario"):
            bundled_scenario_path("not-a-scenario")


class TestValidation:
    def test_minimal_loads(self):
        sc = compile_scenario(minimal_scenario())
        assert sc.robots[0].model.n == 2
        assert len(sc.masters) == 1  # defaults to one master per robot

    def test_unknown_robot_reference_names_field(self):
        data = minimal_scenario(
            constraints=[
                {
                    "name": "bad",
                    "zone": "restricted",
                    "d_safe": 0.1,
                    "pair": [
                        {"type": "point", "attached_to": "ghost"},
                        {"type": "plane", "attached_to": "world", "normal": [0, 0, 1]},
                    ],
                }
            ]
        )
        with pytest.raises(ScenarioError, match=r"constraints\[0\].pair\[0\].attached_to"):
            compile_scenario(data)

    def test_schema_violation_has_json_path(self):
        data = minimal_scenario()
        data["controller"]["alpha"] = 2.0
        with pytest.raises(ScenarioError, match="alpha"):
            compile_scenario(data)

    def test_q0_outside_limits(self):
        data = minimal_scenario()
        data["robots"][0]["q0"] = [10.0, 0.0]
        with pytest.raises(ScenarioError, match="q0"):
            compile_scenario(data)

    def test_duplicate_robot_names(self):
        data = minimal_scenario()
        data["robots"] = data["robots"] * 2
        with pytest.raises(ScenarioError, match="duplicate"):
            compile_scenario(data)

    def test_sphere_pair_defaults_d_safe_to_radius(self):
        data = minimal_scenario(
            constraints=[
                {
                    "name": "ball",
                    "zone": "safe",
                    "pair": [
                        {"type": "point", "attached_to": "solo"},
                        {"type": "sphere", "attached_to": "world", "center": [2.0, 0, 0], "radius": 0.25},
                    ],
                }
            ]
        )
        sc = compile_scenario(data)
        assert sc.constraints[0].spec.d_safe == 0.25

    def test_cuboid_expands_to_six_planes(self):
        data = minimal_scenario(
            constraints=[
                {
                    "name": "box",
                    "zone": "restricted",
                    "d_safe": 0.0,
                    "pair": [
                        {"type": "point", "attached_to": "solo"},
                        {"type": "cuboid", "attached_to": "world", "center": [1.9, 0, 0], "extents": [1, 1, 1]},
                    ],
                }
            ]
        )
        sc = compile_scenario(data)
        assert len(sc.constraints) == 6
        assert sc.constraint_names() == [f"box/{f}" for f in ("x+", "x-", "y+", "y-", "z+", "z-")]

    def test_initially_violated_constraint_warns(self):
        data = minimal_scenario(
            constraints=[
                {
                    "name": "wall",
                    "zone": "restricted",
                    "d_safe": 5.0,  # tip starts closer than 5 to the plane
                    "pair": [
                        {"type": "point", "attached_to": "solo"},
                        {"type": "plane", "attached_to": "world", "normal": [0, 0, 1], "plane_offset": -1.0},
                    ],
                }
            ]
        )
        sc = compile_scenario(data)
        assert sc.warnings and "wall" in sc.warnings[0]

    def test_missing_script_file(self):
        data = minimal_scenario(master_script="does/not/exist.jsonl")
        with pytest.raises(ScenarioError, match="master_script"):
            compile_scenario(data)

    def test_targets_must_match_robot_count(self):
        data = minimal_scenario(targets=[{"r": [1, 0, 0, 0], "t": [0, 0, 0]}, {"r": [1, 0, 0, 0], "t": [0, 0, 0]}])
        with pytest.raises(ScenarioError, match="targets"):
            compile_scenario(data)
