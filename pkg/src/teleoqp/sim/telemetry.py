"""Per-tick telemetry records with a fixed column schema.

Numeric values are written with 17 significant digits so that CSV and JSONL
round-trip bit-exactly; two identical runs therefore produce byte-identical
files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np


@dataclass
class TelemetrySchema:
    """Column layout: fixed once the scenario is loaded."""

    robot_names: list[str]
    joint_counts: list[int]
    constraint_names: list[str]
    master_count: int

    def columns(self) -> list[str]:
        cols = ["tick", "time"]
        for name, n in zip(self.robot_names, self.joint_counts):
            cols += [f"q_{name}_{j}" for j in range(n)]
            cols += [f"qd_{name}_{j}" for j in range(n)]
            cols += [f"terr_{name}_{ax}" for ax in "xyz"]
            cols += [f"rerr_{name}"]
        for cname in self.constraint_names:
            cols += [f"d_{cname}", f"slack_{cname}"]
        cols += ["qp_status", "qp_iterations", "qp_kkt"]
        for m in range(self.master_count):
            cols += [f"force_{m}_{ax}" for ax in "xyz"]
        return cols


@dataclass
class TelemetryRecord:
    tick: int
    time: float
    q: list[np.ndarray]
    qd: list[np.ndarray]
    t_err: list[np.ndarray]
    r_err_norm: list[float]
    distances: np.ndarray
    slacks: np.ndarray
    qp_status: str
    qp_iterations: int
    qp_kkt: float
    forces: list[np.ndarray]

    def row(self) -> list:
        out: list = [int(self.tick), float(self.time)]
        for q, qd, te, rn in zip(self.q, self.qd, self.t_err, self.r_err_norm):
            out += np.asarray(q).tolist() + np.asarray(qd).tolist() + np.asarray(te).tolist() + [float(rn)]
        for d, s in zip(self.distances, self.slacks):
            out += [float(d), float(s)]
        out += [self.qp_status, int(self.qp_iterations), float(self.qp_kkt)]
        for f in self.forces:
            out += np.asarray(f).tolist()
        return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(records: list[TelemetryRecord], schema: TelemetrySchema, path) -> None:
    cols = schema.columns()
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(cols)
        for rec in records:
            row = rec.row()
            if len(row) != len(cols):
                raise ValueError("record does not match the telemetry schema")
            writer.writerow([_fmt(v) for v in row])


def write_jsonl(records: list[TelemetryRecord], schema: TelemetrySchema, path) -> None:
    # json emits shortest round-trip floats; parsed values match CSV exactly.
    cols = schema.columns()
    with open(path, "w") as f:
        for rec in records:
            row = rec.row()
            if len(row) != len(cols):
                raise ValueError("record does not match the telemetry schema")
            f.write(json.dumps(dict(zip(cols, row))) + "\n")


def write_telemetry(records, schema, path, fmt: str = "csv") -> None:
    if fmt == "csv":
        write_csv(records, schema, path)
    elif fmt == "jsonl":
        write_jsonl(records, schema, path)
    else:
        raise ValueError(f"unknown telemetry format {fmt!r}")


def read_csv(path) -> tuple[list[str], list[list]]:
    """Read telemetry back; numeric fields parsed to float, status kept text."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        cols = next(reader)
        rows = []
        for raw in reader:
            rows.append([_parse(c, v) for c, v in zip(cols, raw)])
    return cols, rows


def read_jsonl(path) -> tuple[list[str], list[list]]:
    rows = []
    cols: list[str] = []
    with open(path) as f:
        for line in f:
            obj = json.loads(line)
            if not cols:
                cols = list(obj.keys())
            rows.append([obj[c] for c in cols])
    return cols, rows


def _parse(col: str, text: str):
    if col == "qp_status":
        return text
    if col in ("tick", "qp_iterations"):
        return int(text)
    return float(text)
