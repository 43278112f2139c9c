import { describe, expect, it } from "vitest";

import {
  MasterCmd,
  MessageDecoder,
  SetParam,
  encodeMessage,
  isErrorFrame,
  isStateFrame,
  validateMasterCmd,
  validateSetParam,
} from "../src/protocol.js";

function cmd(overrides: Partial<MasterCmd> = {}): MasterCmd {
  return {
    type: "master_cmd",
    master_id: 0,
    clutch: true,
    dt: [0.01, 0, 0],
    dr: [1, 0, 0, 0],
    ...overrides,
  };
}

describe("codec", () => {
  it("round-trips a message", () => {
    const msg = { type: "set_param", name: "beta", value: 0.5 };
    const out = new MessageDecoder().feed(encodeMessage(msg));
    expect(out).toEqual([msg]);
  });

  it("handles partial and concatenated feeds", () => {
    const a = encodeMessage({ a: 1 });
    const b = encodeMessage({ b: [1, 2, 3] });
    const joined = new Uint8Array(a.length + b.length);
    joined.set(a, 0);
    joined.set(b, a.length);
    const dec = new MessageDecoder();
    const got: unknown[] = [];
    for (let i = 0; i < joined.length; i += 5) {
      got.push(...dec.feed(joined.subarray(i, Math.min(i + 5, joined.length))));
    }
    expect(got).toEqual([{ a: 1 }, { b: [1, 2, 3] }]);
  });

  it("rejects oversized frames", () => {
    const dec = new MessageDecoder();
    const bad = new Uint8Array([0x7f, 0xff, 0xff, 0xff]);
    expect(() => dec.feed(bad)).toThrow(/cap/);
  });

  it("the length prefix is big-endian and exact", () => {
    const bytes = encodeMessage({ x: 1 });
    const payload = JSON.stringify({ x: 1 });
    expect(bytes.length).toBe(4 + payload.length);
    const view = new DataView(bytes.buffer);
    expect(view.getUint32(0, false)).toBe(payload.length);
  });
});

describe("outbound schema validation", () => {
  it("accepts a well-formed master_cmd", () => {
    expect(validateMasterCmd(cmd())).toBeNull();
  });

  it("rejects wrong key sets", () => {
    const extra = { ...cmd(), stray: 1 } as unknown as MasterCmd;
    expect(validateMasterCmd(extra)).toMatch(/keys/);
  });

  it("rejects malformed vectors", () => {
    expect(validateMasterCmd(cmd({ dt: [0, 0] as unknown as [number, number, number] }))).toMatch(/dt/);
    expect(validateMasterCmd(cmd({ dr: [NaN, 0, 0, 0] }))).toMatch(/dr/);
  });

  it("rejects bad master ids", () => {
    expect(validateMasterCmd(cmd({ master_id: -1 }))).toMatch(/master_id/);
    expect(validateMasterCmd(cmd({ master_id: 0.5 }))).toMatch(/master_id/);
  });

  it("validates set_param range and name", () => {
    const ok: SetParam = { type: "set_param", name: "beta", value: 0.25 };
    expect(validateSetParam(ok)).toBeNull();
    expect(validateSetParam({ ...ok, value: 1.5 })).toMatch(/value/);
    expect(validateSetParam({ ...ok, name: "gamma" as "beta" })).toMatch(/name/);
  });
});

describe("inbound discrimination", () => {
  it("classifies frames by type", () => {
    expect(isStateFrame({ type: "state_frame", tick: 0 })).toBe(true);
    expect(isStateFrame({ type: "error" })).toBe(false);
    expect(isErrorFrame({ type: "error", code: "x", detail: "y" })).toBe(true);
    expect(isErrorFrame(null)).toBe(false);
  });
});
