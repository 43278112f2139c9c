"""Deterministic discrete-time simulation loop.

Tick order: drain master commands -> update targets -> control step ->
explicit Euler integration -> telemetry record. Script mode with identical
scenario bytes yields bit-identical telemetry; the live server drives the
same :class:`Simulation` stepper, so a replay of its recorded inbound
commands reproduces a session exactly.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..controller import MasterCommand, TeleopMapper, control_step
from ..impedance import master_force
from ..qp import DualActiveSetSolver
from .scenario import Scenario
from .telemetry import TelemetryRecord, TelemetrySchema


class StaticSource:
    """No master input; targets stay at their scenario values."""

    def commands_until(self, time: float) -> list[MasterCommand]:
        return []


class ScriptSource:
    """Replays a JSON-lines master script; commands apply once their
    timestamp has been reached, latest-wins per master within a tick."""

    def __init__(self, path):
        self._commands: list[MasterCommand] = []
        with open(path) as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ValueError(f"{path}:{line_no}: bad script line: {e}") from None
                if obj.get("type", "master_cmd") != "master_cmd":
                    continue
                try:
                    self._commands.append(MasterCommand.from_dict(obj))
                except (KeyError, TypeError, ValueError) as e:
                    raise ValueError(f"{path}:{line_no}: bad master command: {e!r}") from None
        self._commands.sort(key=lambda c: c.time)
        self._cursor = 0

    def commands_until(self, time: float) -> list[MasterCommand]:
        due: dict[int, MasterCommand] = {}
        while self._cursor < len(self._commands) and self._commands[self._cursor].time <= time:
            cmd = self._commands[self._cursor]
            due[cmd.master_id] = cmd
            self._cursor += 1
        return list(due.values())


class QueueSource:
    """Thread-safe inbound queue for live sessions; drained once per tick,
    latest command wins per master."""

    def __init__(self):
        self._lock = threading.Lock()
        self._pending: dict[int, MasterCommand] = {}

    def push(self, cmd: MasterCommand):
        with self._lock:
            self._pending[cmd.master_id] = cmd

    def commands_until(self, time: float) -> list[MasterCommand]:
        with self._lock:
            out = list(self._pending.values())
            self._pending.clear()
        return out


class Simulation:
    """Stepper over a scenario: owns joint states, mappers, and the solver."""

    def __init__(self, scenario: Scenario, source, sampling_time: float | None = None):
        self.scenario = scenario
        self.source = source
        self.ts = sampling_time if sampling_time is not None else scenario.controller.sampling_time
        self.models = scenario.models
        self.states = [
            type(s)(q=s.q.copy(), q_min=s.q_min.copy(), q_max=s.q_max.copy(), qd_max=s.qd_max.copy())
            for s in scenario.states
        ]
        self.targets = [t.copy() for t in scenario.targets0]
        self.mappers = [
            TeleopMapper(self.targets[b.robot], scenario.controller.motion_scaling, b.align)
            for b in scenario.masters
        ]
        self.solver = DualActiveSetSolver()
        sizes = [m.n for m in self.models]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.applied_commands: list[dict] = []
        self.infeasible_ticks = 0
        nc = len(scenario.constraints)
        self.max_approach_rate = np.zeros(nc)
        self.min_distance = np.full(nc, np.inf)
        self.max_distance = np.full(nc, -np.inf)
        self.schema = TelemetrySchema(
            robot_names=[r.name for r in scenario.robots],
            joint_counts=sizes,
            constraint_names=scenario.constraint_names(),
            master_count=len(scenario.masters),
        )

    def step(self, tick: int, record_commands: bool = False):
        """Advance one tick; returns (diagnostics, telemetry record)."""
        sc = self.scenario
        t_now = tick * self.ts
        for cmd in self.source.commands_until(t_now):
            if 0 <= cmd.master_id < len(self.mappers):
                self.mappers[cmd.master_id].apply(cmd, t_now)
                if record_commands:
                    self.applied_commands.append(
                        {
                            "t": t_now,
                            "type": "master_cmd",
                            "master_id": cmd.master_id,
                            "clutch": cmd.clutch,
                            "dt": cmd.delta_t.tolist(),
                            "dr": cmd.delta_r.tolist(),
                        }
                    )
        for mapper, binding in zip(self.mappers, sc.masters):
            self.targets[binding.robot] = mapper.target

        diag = control_step(self.models, self.states, self.targets, sc.constraints, sc.controller, self.solver, t_now)
        if diag.infeasible:
            self.infeasible_ticks += 1
        for i, state in enumerate(self.states):
            state.q = state.q + self.ts * diag.qdot[self.offsets[i] : self.offsets[i + 1]]

        forces = []
        for mapper, binding in zip(self.mappers, sc.masters):
            err_master = mapper.error_to_master(diag.t_err[binding.robot])
            forces.append(master_force(err_master, mapper.master_velocity, sc.impedance).gamma)

        if self.max_approach_rate.size:
            np.maximum(self.max_approach_rate, np.abs(diag.rates), out=self.max_approach_rate)
            np.minimum(self.min_distance, diag.distances, out=self.min_distance)
            np.maximum(self.max_distance, diag.distances, out=self.max_distance)

        rec = TelemetryRecord(
            tick=tick,
            time=t_now,
            q=[s.q.copy() for s in self.states],
            qd=[diag.qdot[self.offsets[i] : self.offsets[i + 1]].copy() for i in range(len(self.states))],
            t_err=diag.t_err,
            r_err_norm=diag.r_err_norm,
            distances=diag.distances,
            slacks=diag.slacks,
            qp_status=diag.qp_status,
            qp_iterations=diag.qp_iterations,
            qp_kkt=diag.kkt_residual,
            forces=forces,
        )
        return diag, rec


@dataclass
class SimResult:
    records: list[TelemetryRecord]
    schema: TelemetrySchema
    ticks: int
    infeasible_ticks: int
    max_approach_rate: np.ndarray  # per constraint, max |J_d qd + zeta| seen
    min_distance: np.ndarray
    max_distance: np.ndarray
    applied_commands: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "ticks": self.ticks,
            "infeasible_ticks": self.infeasible_ticks,
            "max_approach_rate": self.max_approach_rate.tolist(),
            "min_distance": self.min_distance.tolist(),
            "max_distance": self.max_distance.tolist(),
        }


def run_simulation(
    scenario: Scenario,
    source=None,
    duration: float | None = None,
    sampling_time: float | None = None,
    on_tick=None,
    record_commands: bool = False,
    keep_records: bool = True,
) -> SimResult:
    """Run a scenario to completion and return its telemetry.

    `on_tick(tick, time, diag, record)` is invoked after each record; live
    mode uses it to publish frames. `keep_records=False` drops records after
    the callback (long runs where only the summary or callback matters).
    Infeasible QP ticks command zero velocity and are counted, the run
    continues.
    """
    if source is None:
        source = ScriptSource(scenario.master_script) if scenario.master_script else StaticSource()
    sim = Simulation(scenario, source, sampling_time)
    total_time = duration if duration is not None else scenario.duration
    n_ticks = int(round(total_time / sim.ts))

    records: list[TelemetryRecord] = []
    for tick in range(n_ticks):
        diag, rec = sim.step(tick, record_commands=record_commands)
        if keep_records:
            records.append(rec)
        if on_tick is not None:
            on_tick(tick, rec.time, diag, rec)

    return SimResult(
        records=records,
        schema=sim.schema,
        ticks=n_ticks,
        infeasible_ticks=sim.infeasible_ticks,
        max_approach_rate=sim.max_approach_rate,
        min_distance=sim.min_distance,
        max_distance=sim.max_distance,
        applied_commands=sim.applied_commands,
    )
