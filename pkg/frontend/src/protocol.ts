// Wire format of the game service. Field names are normative; anything
// that does not decode cleanly is dropped rather than guessed at.

export type Mode = "play_vs_policy" | "collect_two_human";
export type Role = "human" | "robot_human2";

export interface StateFrame {
  type: "state";
  tick: number;
  obs: number[];
  done: boolean;
  success: boolean;
  round: number;
  zhat?: [number, number];
}

export interface RoundReport {
  type: "round_report";
  successes: number;
  rounds: number;
}

export interface ErrorFrame {
  type: "error";
  code: string;
  detail: string;
}

export type ServerFrame = StateFrame | RoundReport | ErrorFrame;

const isNum = (v: unknown): v is number =>
  typeof v === "number" && Number.isFinite(v);

export function decodeFrame(raw: string): ServerFrame | null {
  let msg: any;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  switch (msg.type) {
    case "state": {
      if (!isNum(msg.tick) || !isNum(msg.round)) return null;
      if (!Array.isArray(msg.obs) || msg.obs.length !== 10) return null;
      if (!msg.obs.every(isNum)) return null;
      const frame: StateFrame = {
        type: "state",
        tick: msg.tick,
        obs: msg.obs,
        done: !!msg.done,
        success: !!msg.success,
        round: msg.round,
      };
      if (Array.isArray(msg.zhat) && msg.zhat.length === 2 &&
          msg.zhat.every(isNum)) {
        frame.zhat = [msg.zhat[0], msg.zhat[1]];
      }
      return frame;
    }
    case "round_report":
      if (!isNum(msg.successes) || !isNum(msg.rounds)) return null;
      return { type: "round_report", successes: msg.successes, rounds: msg.rounds };
    case "error":
      return {
        type: "error",
        code: String(msg.code ?? "unknown"),
        detail: String(msg.detail ?? ""),
      };
    default:
      return null;
  }
}

const clamp = (v: number) => Math.max(-1, Math.min(1, v));

export function joinMsg(mode: Mode, role: Role): string {
  return JSON.stringify({ type: "join", mode, role });
}

export function startMsg(): string {
  return JSON.stringify({ type: "start" });
}

export function resetMsg(): string {
  return JSON.stringify({ type: "reset" });
}

export function actionMsg(seq: number, dx: number, dy: number): string {
  return JSON.stringify({ type: "action", seq, dx: clamp(dx), dy: clamp(dy) });
}
