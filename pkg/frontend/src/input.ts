// Clutched pointer input: while the clutch key is held, pointer drags
// accumulate a cumulative-since-engage master translation, scaled from
// slave-space screen meters to master units by 1/MS. Commands are emitted
// at a bounded rate with the latest accumulated value.

import { MasterCmd, validateMasterCmd } from "./protocol.js";

export const IDENTITY_ROTATION: [number, number, number, number] = [1, 0, 0, 0];

export class ClutchAccumulator {
  engaged = false;
  private delta: [number, number, number] = [0, 0, 0];

  constructor(
    public masterId: number,
    public motionScaling: number,
  ) {}

  engage() {
    if (!this.engaged) {
      this.engaged = true;
      this.delta = [0, 0, 0];
    }
  }

  disengage() {
    this.engaged = false;
  }

  /** Add a slave-space drag increment; ignored while disengaged. */
  drag(dxSlave: number, dySlave: number, dzSlave: number) {
    if (!this.engaged) return;
    const s = 1 / this.motionScaling;
    this.delta = [this.delta[0] + s * dxSlave, this.delta[1] + s * dySlave, this.delta[2] + s * dzSlave];
  }

  command(): MasterCmd {
    const msg: MasterCmd = {
      type: "master_cmd",
      master_id: this.masterId,
      clutch: this.engaged,
      dt: [...this.delta],
      dr: [...IDENTITY_ROTATION],
    };
    const problem = validateMasterCmd(msg);
    if (problem) throw new Error(`refusing to send invalid master_cmd: ${problem}`);
    return msg;
  }
}

/** Emits at most one value per interval; the newest wins. */
export class RateLimiter {
  private last = -Infinity;

  constructor(public intervalMs: number) {}

  ready(nowMs: number): boolean {
    if (nowMs - this.last >= this.intervalMs) {
      this.last = nowMs;
      return true;
    }
    return false;
  }
}
