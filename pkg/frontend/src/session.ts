// WebSocket session against the simulation service. Messages arrive as
// binary frames carrying the length-prefixed JSON wire format.

import {
  MasterCmd,
  MessageDecoder,
  SetParam,
  encodeMessage,
  isErrorFrame,
  isStateFrame,
  validateSetParam,
} from "./protocol.js";
import { SessionView } from "./view.js";

export class Session {
  view = new SessionView();
  onchange: (() => void) | null = null;
  private ws: WebSocket | null = null;
  private decoder = new MessageDecoder();

  connect(url: string) {
    this.decoder = new MessageDecoder();
    const ws = new WebSocket(url);
    ws.binaryType = "arraybuffer";
    ws.onopen = () => {
      this.view.connected = true;
      this.onchange?.();
    };
    ws.onclose = () => {
      this.view.connected = false;
      this.onchange?.();
    };
    ws.onerror = () => {
      this.view.connected = false;
      this.onchange?.();
    };
    ws.onmessage = (event: MessageEvent) => {
      const data = new Uint8Array(event.data as ArrayBuffer);
      for (const msg of this.decoder.feed(data)) {
        if (isStateFrame(msg)) this.view.pushFrame(msg);
        else if (isErrorFrame(msg)) this.view.pushError(msg);
      }
      this.onchange?.();
    };
    this.ws = ws;
  }

  get open(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  sendMasterCmd(cmd: MasterCmd) {
    if (this.open) this.ws!.send(encodeMessage(cmd));
  }

  setParam(name: "beta" | "alpha", value: number) {
    const msg: SetParam = { type: "set_param", name, value };
    const problem = validateSetParam(msg);
    if (problem) throw new Error(`refusing to send invalid set_param: ${problem}`);
    if (this.open) this.ws!.send(encodeMessage(msg));
  }

  close() {
    this.ws?.close();
  }
}
