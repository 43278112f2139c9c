// Session view model: the latest authoritative frame plus values derived
// for display. No client-side extrapolation: the view changes only when a
// new frame arrives.

import { ErrorFrame, Scene, SceneConstraint, StateFrame } from "./protocol.js";

export interface Gauge {
  name: string;
  zone: "restricted" | "safe";
  d: number;
  dSafe: number;
  margin: number; // distance to the zone boundary, >= 0 when satisfied
  critical: boolean;
  fill: number; // 0 (far) .. 1 (at the boundary)
}

/** Boundary margin: restricted zones keep d above d_safe, safe zones below. */
export function boundaryMargin(zone: "restricted" | "safe", d: number, dSafe: number): number {
  return zone === "restricted" ? d - dSafe : dSafe - d;
}

export function gaugeFor(c: SceneConstraint, d: number): Gauge {
  const margin = boundaryMargin(c.zone, d, c.d_safe);
  const critical = margin < 0.1 * c.d_safe;
  const span = c.d_safe > 0 ? c.d_safe : 0.05;
  const fill = Math.min(Math.max(1 - margin / span, 0), 1);
  return { name: c.name, zone: c.zone, d, dSafe: c.d_safe, margin, critical, fill };
}

export class SessionView {
  scene: Scene | null = null;
  frame: StateFrame | null = null;
  connected = false;
  lastError: ErrorFrame | null = null;
  framesSeen = 0;
  private pending: StateFrame | null = null;

  /** Inbound frames are coalesced: only the newest is rendered per paint. */
  pushFrame(frame: StateFrame) {
    if (frame.scene) this.scene = frame.scene;
    this.pending = frame;
    this.framesSeen += 1;
  }

  pushError(err: ErrorFrame) {
    this.lastError = err;
  }

  /** Take the newest frame since the last paint, if any. */
  takeLatest(): StateFrame | null {
    const f = this.pending;
    this.pending = null;
    if (f) this.frame = f;
    return f;
  }

  gauges(): Gauge[] {
    if (!this.scene || !this.frame) return [];
    return this.scene.constraints.map((c, i) => gaugeFor(c, this.frame!.distances[i]));
  }

  forces(): number[][] {
    return this.frame ? this.frame.forces : [];
  }
}
