// 2D orthographic scene views: top-down (x-y) and side (x-z). Tool shafts
// are line segments through the end-effector pose, constraint geometry is
// drawn as outlines, and reflected forces as arrows at the tool tips.

import { poseAxis, poseTranslation, Vec3 } from "./pose.js";
import { Scene, StateFrame } from "./protocol.js";

const SHAFT_LENGTH = 0.22;
const FORCE_PX_PER_N = 4.0;
const ROBOT_COLORS = ["#2f7bd9", "#d9572f"];

export type Projection = (p: Vec3) => [number, number];

export class SceneCanvas {
  ctx: CanvasRenderingContext2D;
  scalePx: number;

  constructor(
    public canvas: HTMLCanvasElement,
    public axes: "xy" | "xz",
    public viewSpan = 1.0, // meters across the canvas width
    public center: Vec3 = [0, 0, 0.15],
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
    this.scalePx = canvas.width / viewSpan;
  }

  project: Projection = (p) => {
    const u = p[0] - this.center[0];
    const v = this.axes === "xy" ? p[1] - this.center[1] : p[2] - this.center[2];
    const x = this.canvas.width / 2 + u * this.scalePx;
    const y = this.axes === "xy" ? this.canvas.height / 2 + v * this.scalePx : this.canvas.height / 2 - v * this.scalePx;
    return [x, y];
  };

  /** Meters per pixel along the two drag axes of this view. */
  dragToWorld(dxPx: number, dyPx: number): Vec3 {
    const m = 1 / this.scalePx;
    if (this.axes === "xy") return [dxPx * m, dyPx * m, 0];
    return [dxPx * m, 0, -dyPx * m];
  }

  clear() {
    const { ctx, canvas } = this;
    ctx.fillStyle = "#11151a";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.strokeStyle = "#2a3138";
    ctx.strokeRect(0.5, 0.5, canvas.width - 1, canvas.height - 1);
    ctx.fillStyle = "#737d87";
    ctx.font = "11px sans-serif";
    ctx.fillText(this.axes === "xy" ? "top (x-y)" : "side (x-z)", 8, 16);
  }

  drawScene(scene: Scene) {
    const { ctx } = this;
    for (const c of scene.constraints) {
      if (c.kind === "entry_sphere" && c.center) {
        const [x, y] = this.project(c.center as Vec3);
        ctx.beginPath();
        ctx.arc(x, y, Math.max(c.d_safe * this.scalePx, 2), 0, 2 * Math.PI);
        ctx.strokeStyle = "#3f8f5f";
        ctx.stroke();
      } else if (c.kind === "plane" && c.normal && c.offset !== undefined) {
        this.drawPlaneTrace(c.normal as Vec3, c.offset);
      }
    }
  }

  private drawPlaneTrace(n: Vec3, offset: number) {
    // trace of the plane in this view when its normal lies in the view plane
    const { ctx, canvas } = this;
    const [nu, nv] = this.axes === "xy" ? [n[0], n[1]] : [n[0], n[2]];
    const nOut = this.axes === "xy" ? n[2] : n[1];
    if (Math.abs(nOut) > 0.5) return; // mostly out-of-plane: no clean trace
    const norm = Math.hypot(nu, nv);
    if (norm < 1e-9) return;
    const cu = this.center[0];
    const cv = this.axes === "xy" ? this.center[1] : this.center[2];
    // closest point of the trace line to the view center
    const dist = (offset - nu * cu - nv * cv) / norm;
    const pu = cu + (nu / norm) * dist;
    const pv = cv + (nv / norm) * dist;
    const tu = -nv / norm;
    const tv = nu / norm;
    const span = this.viewSpan;
    const a: Vec3 = this.axes === "xy" ? [pu - tu * span, pv - tv * span, 0] : [pu - tu * span, 0, pv - tv * span];
    const b: Vec3 = this.axes === "xy" ? [pu + tu * span, pv + tv * span, 0] : [pu + tu * span, 0, pv + tv * span];
    const [x0, y0] = this.project(a);
    const [x1, y1] = this.project(b);
    ctx.beginPath();
    ctx.moveTo(x0, y0);
    ctx.lineTo(x1, y1);
    ctx.strokeStyle = "#6f5f3f";
    ctx.stroke();
  }

  drawFrame(frame: StateFrame) {
    const { ctx } = this;
    frame.poses.forEach((pose, i) => {
      const tip = poseTranslation(pose);
      const dir = poseAxis(pose, [0, 0, 1]);
      const tail: Vec3 = [
        tip[0] - SHAFT_LENGTH * dir[0],
        tip[1] - SHAFT_LENGTH * dir[1],
        tip[2] - SHAFT_LENGTH * dir[2],
      ];
      const [x0, y0] = this.project(tail);
      const [x1, y1] = this.project(tip);
      ctx.beginPath();
      ctx.moveTo(x0, y0);
      ctx.lineTo(x1, y1);
      ctx.strokeStyle = ROBOT_COLORS[i % ROBOT_COLORS.length];
      ctx.lineWidth = 2.5;
      ctx.stroke();
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.arc(x1, y1, 4, 0, 2 * Math.PI);
      ctx.fillStyle = ROBOT_COLORS[i % ROBOT_COLORS.length];
      ctx.fill();

      const force = frame.forces[i];
      if (force) {
        const fu = force[0];
        const fv = this.axes === "xy" ? force[1] : force[2];
        const len = Math.hypot(fu, fv) * FORCE_PX_PER_N;
        if (len > 1) {
          const ang = Math.atan2(this.axes === "xy" ? fv : -fv, fu);
          ctx.beginPath();
          ctx.moveTo(x1, y1);
          const ex = x1 + Math.cos(ang) * len;
          const ey = y1 + Math.sin(ang) * len;
          ctx.lineTo(ex, ey);
          ctx.strokeStyle = "#e8c547";
          ctx.lineWidth = 2;
          ctx.stroke();
          ctx.lineWidth = 1;
          ctx.beginPath();
          ctx.arc(ex, ey, 2.5, 0, 2 * Math.PI);
          ctx.fillStyle = "#e8c547";
          ctx.fill();
        }
      }
    });
  }
}
