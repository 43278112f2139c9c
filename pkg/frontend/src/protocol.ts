// Wire protocol shared with the simulation service: every message is one
// UTF-8 JSON object prefixed by a 4-byte big-endian length. Over WebSocket
// the same bytes travel inside binary frames.

export const MAX_MESSAGE = 1 << 20;

export interface SceneConstraint {
  name: string;
  zone: "restricted" | "safe";
  d_safe: number;
  kind: string;
  center?: number[];
  normal?: number[];
  offset?: number;
}

export interface Scene {
  name: string;
  robots: string[];
  joint_counts: number[];
  constraints: SceneConstraint[];
  sampling_time: number;
  motion_scaling: number;
  beta: number;
  alpha: number;
}

export interface StateFrame {
  type: "state_frame";
  tick: number;
  time: number;
  poses: number[][];
  q: number[][];
  t_err: number[][];
  distances: number[];
  slacks: number[];
  forces: number[][];
  beta: number;
  alpha: number;
  qp_status: string;
  scene?: Scene;
}

export interface ErrorFrame {
  type: "error";
  code: string;
  detail: string;
}

export interface MasterCmd {
  type: "master_cmd";
  master_id: number;
  clutch: boolean;
  dt: [number, number, number];
  dr: [number, number, number, number];
}

export interface SetParam {
  type: "set_param";
  name: "beta" | "alpha";
  value: number;
}

export type Inbound = StateFrame | ErrorFrame;

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export function encodeMessage(obj: unknown): Uint8Array {
  const payload = encoder.encode(JSON.stringify(obj));
  const out = new Uint8Array(4 + payload.length);
  new DataView(out.buffer).setUint32(0, payload.length, false);
  out.set(payload, 4);
  return out;
}

/** Incremental decoder for length-prefixed JSON streams. */
export class MessageDecoder {
  private buf = new Uint8Array(0);

  feed(data: Uint8Array): unknown[] {
    const joined = new Uint8Array(this.buf.length + data.length);
    joined.set(this.buf, 0);
    joined.set(data, this.buf.length);
    this.buf = joined;
    const out: unknown[] = [];
    for (;;) {
      if (this.buf.length < 4) return out;
      const length = new DataView(this.buf.buffer, this.buf.byteOffset).getUint32(0, false);
      if (length > MAX_MESSAGE) {
        throw new Error(`message of ${length} bytes exceeds the ${MAX_MESSAGE} byte cap`);
      }
      if (this.buf.length < 4 + length) return out;
      const payload = this.buf.subarray(4, 4 + length);
      out.push(JSON.parse(decoder.decode(payload)));
      this.buf = this.buf.subarray(4 + length);
    }
  }
}

function isVec(v: unknown, n: number): v is number[] {
  return Array.isArray(v) && v.length === n && v.every((x) => typeof x === "number" && Number.isFinite(x));
}

/** Exact outbound schema check; messages that fail here are never sent. */
export function validateMasterCmd(msg: MasterCmd): string | null {
  const keys = Object.keys(msg).sort().join(",");
  if (keys !== "clutch,dr,dt,master_id,type") return `unexpected keys: ${keys}`;
  if (msg.type !== "master_cmd") return "type must be master_cmd";
  if (!Number.isInteger(msg.master_id) || msg.master_id < 0) return "master_id must be a nonnegative integer";
  if (typeof msg.clutch !== "boolean") return "clutch must be boolean";
  if (!isVec(msg.dt, 3)) return "dt must be a finite 3-vector";
  if (!isVec(msg.dr, 4)) return "dr must be a finite 4-vector";
  return null;
}

export function validateSetParam(msg: SetParam): string | null {
  const keys = Object.keys(msg).sort().join(",");
  if (keys !== "name,type,value") return `unexpected keys: ${keys}`;
  if (msg.type !== "set_param") return "type must be set_param";
  if (msg.name !== "beta" && msg.name !== "alpha") return "name must be beta or alpha";
  if (typeof msg.value !== "number" || !(msg.value >= 0 && msg.value <= 1)) return "value must lie in [0, 1]";
  return null;
}

export function isStateFrame(msg: unknown): msg is StateFrame {
  return typeof msg === "object" && msg !== null && (msg as { type?: string }).type === "state_frame";
}

export function isErrorFrame(msg: unknown): msg is ErrorFrame {
  return typeof msg === "object" && msg !== null && (msg as { type?: string }).type === "error";
}
