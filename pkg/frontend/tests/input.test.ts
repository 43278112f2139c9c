import { describe, expect, it } from "vitest";

import { ClutchAccumulator, RateLimiter } from "../src/input.js";

describe("clutch accumulator", () => {
  it("scales slave drags into master units", () => {
    const c = new ClutchAccumulator(0, 0.5);
    c.engage();
    c.drag(0.005, 0, 0);
    expect(c.command().dt[0]).toBeCloseTo(0.01, 12); // 5 mm slave = 10 mm master at MS 1/2
  });

  it("ignores drags while disengaged", () => {
    const c = new ClutchAccumulator(0, 1.0);
    c.drag(0.1, 0.1, 0.1);
    expect(c.command().dt).toEqual([0, 0, 0]);
    expect(c.command().clutch).toBe(false);
  });

  it("re-engaging resets the cumulative delta", () => {
    const c = new ClutchAccumulator(1, 1.0);
    c.engage();
    c.drag(0.01, 0, 0);
    c.disengage();
    c.engage();
    expect(c.command().dt).toEqual([0, 0, 0]);
    c.drag(0, 0.02, 0);
    expect(c.command().dt).toEqual([0, 0.02, 0]);
    expect(c.command().master_id).toBe(1);
  });

  it("always emits schema-valid commands", () => {
    const c = new ClutchAccumulator(0, 0.3333333333333333);
    c.engage();
    for (let i = 0; i < 50; i++) c.drag(Math.sin(i) * 1e-3, 1e-4, -2e-4);
    expect(() => c.command()).not.toThrow();
  });
});

describe("rate limiter", () => {
  it("caps emission at the configured interval", () => {
    const limiter = new RateLimiter(1000 / 60);
    let sent = 0;
    for (let t = 0; t <= 1000; t += 1) {
      if (limiter.ready(t)) sent += 1;
    }
    expect(sent).toBeLessThanOrEqual(61);
    expect(sent).toBeGreaterThanOrEqual(59);
  });
});
