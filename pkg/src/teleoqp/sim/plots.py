"""Static plots from telemetry files: constraint distances, reflected
forces, and tool trajectories."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .telemetry import read_csv, read_jsonl


def _load(path) -> tuple[list[str], np.ndarray, dict]:
    path = Path(path)
    cols, rows = read_jsonl(path) if path.suffix == ".jsonl" else read_csv(path)
    idx = {c: i for i, c in enumerate(cols)}
    numeric = np.array([[r[i] if c != "qp_status" else 0.0 for i, c in enumerate(cols)] for r in rows], dtype=float)
    return cols, numeric, idx


def plot_telemetry(path, out_dir=".", scenario=None) -> list[Path]:
    """Write distance, force, and trajectory plots next to `out_dir`.

    Tool-tip trajectories need forward kinematics, so they are drawn only
    when the matching scenario is supplied; otherwise joint paths are
    plotted instead.
    """
    cols, data, idx = _load(path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(path).stem
    t = data[:, idx["time"]]
    written = []

    dist_cols = [c for c in cols if c.startswith("d_")]
    if dist_cols:
        fig, ax = plt.subplots(figsize=(9, 5))
        for c in dist_cols:
            ax.plot(t, 1e3 * data[:, idx[c]], label=c[2:], linewidth=1)
        ax.set_xlabel("time [s]")
        ax.set_ylabel("distance [mm]")
        ax.set_title("constraint distances")
        ax.legend(fontsize=7, ncol=2)
        ax.grid(alpha=0.3)
        p = out_dir / f"{stem}_distances.png"
        fig.savefig(p, dpi=130, bbox_inches="tight")
        plt.close(fig)
        written.append(p)

    force_groups = sorted({c.rsplit("_", 1)[0] for c in cols if c.startswith("force_")})
    if force_groups:
        fig, ax = plt.subplots(figsize=(9, 4))
        for g in force_groups:
            mag = np.linalg.norm(data[:, [idx[f"{g}_{ax_}"] for ax_ in "xyz"]], axis=1)
            ax.plot(t, mag, label=f"master {g.split('_')[1]}", linewidth=1)
        ax.set_xlabel("time [s]")
        ax.set_ylabel("|force| [N]")
        ax.set_title("reflected force")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        p = out_dir / f"{stem}_forces.png"
        fig.savefig(p, dpi=130, bbox_inches="tight")
        plt.close(fig)
        written.append(p)

    if scenario is not None:
        from ..dq import vec3
        from ..kinematics import fkm

        fig, (ax_top, ax_side) = plt.subplots(1, 2, figsize=(10, 4.5))
        for robot in scenario.robots:
            qcols = [idx[c] for c in cols if c.startswith(f"q_{robot.name}_")]
            step = max(1, len(t) // 2000)
            tips = np.array([vec3(fkm(robot.model, row[qcols]).translation()) for row in data[::step]])
            ax_top.plot(tips[:, 0], tips[:, 1], linewidth=1, label=robot.name)
            ax_side.plot(tips[:, 0], tips[:, 2], linewidth=1, label=robot.name)
        ax_top.set_xlabel("x [m]")
        ax_top.set_ylabel("y [m]")
        ax_top.set_title("tool trajectories (top)")
        ax_side.set_xlabel("x [m]")
        ax_side.set_ylabel("z [m]")
        ax_side.set_title("tool trajectories (side)")
        for ax in (ax_top, ax_side):
            ax.axis("equal")
            ax.grid(alpha=0.3)
            ax.legend(fontsize=8)
        p = out_dir / f"{stem}_trajectories.png"
        fig.savefig(p, dpi=130, bbox_inches="tight")
        plt.close(fig)
        written.append(p)

    robots = sorted({c.split("_")[1] for c in cols if c.startswith("q_")})
    if robots:
        fig, axes = plt.subplots(1, len(robots), figsize=(5 * len(robots), 4), squeeze=False)
        for axp, name in zip(axes[0], robots):
            qcols = [c for c in cols if c.startswith(f"q_{name}_")]
            for c in qcols:
                axp.plot(t, data[:, idx[c]], linewidth=0.8, label=c.rsplit("_", 1)[1])
            axp.set_xlabel("time [s]")
            axp.set_ylabel("q [rad | m]")
            axp.set_title(f"robot {name}")
            axp.grid(alpha=0.3)
            axp.legend(fontsize=7, ncol=2)
        p = out_dir / f"{stem}_joints.png"
        fig.savefig(p, dpi=130, bbox_inches="tight")
        plt.close(fig)
        written.append(p)

    return written
