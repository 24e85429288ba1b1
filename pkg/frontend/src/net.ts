// One socket per role. The service expects join as the first message and
// keys action idempotency on seq, so resends are safe.

import { Mode, Role, ServerFrame, actionMsg, decodeFrame, joinMsg } from "./protocol.js";
import { SeqCounter } from "./input.js";

export class RoleSocket {
  private ws: WebSocket | null = null;
  private seq = new SeqCounter();
  joined = false;

  constructor(
    readonly role: Role,
    private onframe: (role: Role, frame: ServerFrame) => void,
    private onclose: () => void,
  ) {}

  connect(mode: Mode): void {
    const proto = location.protocol === "https:" ? "wss://" : "ws://";
    this.ws = new WebSocket(proto + location.host + "/ws");
    this.ws.onopen = () => this.ws!.send(joinMsg(mode, this.role));
    this.ws.onmessage = (ev) => {
      const frame = decodeFrame(String(ev.data));
      if (frame) this.onframe(this.role, frame);
    };
    this.ws.onclose = () => {
      this.joined = false;
      this.onclose();
    };
  }

  send(raw: string): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) this.ws.send(raw);
  }

  sendAction(dx: number, dy: number): void {
    this.send(actionMsg(this.seq.next(), dx, dy));
  }

  close(): void {
    this.ws?.close();
    this.ws = null;
  }
}
