import { describe, expect, it } from "vitest";

import { StateFrame } from "../src/protocol.js";
import { SessionView, boundaryMargin, gaugeFor } from "../src/view.js";

function frame(tick: number, extra: Partial<StateFrame> = {}): StateFrame {
  return {
    type: "state_frame",
    tick,
    time: tick * 0.001,
    poses: [[1, 0, 0, 0, 0, 0, 0, 0]],
    q: [[0]],
    t_err: [[0, 0, 0]],
    distances: [0.02],
    slacks: [0.01],
    forces: [[0, 0, 0]],
    beta: 0.5,
    alpha: 0.99,
    qp_status: "optimal",
    ...extra,
  };
}

describe("gauges", () => {
  it("margin orientation follows the zone", () => {
    expect(boundaryMargin("restricted", 0.03, 0.01)).toBeCloseTo(0.02);
    expect(boundaryMargin("safe", 0.002, 0.003)).toBeCloseTo(0.001);
  });

  it("turns critical below ten percent of d_safe", () => {
    const c = { name: "shafts", zone: "restricted" as const, d_safe: 0.01, kind: "shaft_shaft" };
    expect(gaugeFor(c, 0.012).critical).toBe(false); // margin 2 mm > 1 mm
    expect(gaugeFor(c, 0.0109).critical).toBe(true); // margin 0.9 mm < 1 mm
    expect(gaugeFor(c, 0.005).critical).toBe(true); // violated
  });

  it("fill saturates at the boundary", () => {
    const c = { name: "entry", zone: "safe" as const, d_safe: 0.003, kind: "entry_sphere" };
    expect(gaugeFor(c, 0.003).fill).toBe(1);
    expect(gaugeFor(c, 0.0).fill).toBe(0);
  });
});

describe("frame coalescing", () => {
  it("keeps only the newest frame per paint", () => {
    const view = new SessionView();
    view.pushFrame(frame(1));
    view.pushFrame(frame(2));
    view.pushFrame(frame(3));
    const latest = view.takeLatest();
    expect(latest?.tick).toBe(3);
    expect(view.takeLatest()).toBeNull(); // drained
    expect(view.frame?.tick).toBe(3); // sticky last frame for redraws
    expect(view.framesSeen).toBe(3);
  });

  it("adopts the scene from the bootstrap frame", () => {
    const view = new SessionView();
    const scene = {
      name: "s",
      robots: ["left"],
      joint_counts: [6],
      constraints: [{ name: "shafts", zone: "restricted" as const, d_safe: 0.01, kind: "shaft_shaft" }],
      sampling_time: 0.001,
      motion_scaling: 0.5,
      beta: 0.5,
      alpha: 0.99,
    };
    view.pushFrame(frame(1, { scene }));
    view.pushFrame(frame(2));
    view.takeLatest();
    expect(view.scene?.name).toBe("s");
    expect(view.gauges()).toHaveLength(1);
    expect(view.gauges()[0].d).toBeCloseTo(0.02);
  });
});
