// Session state machine. A pure reducer so every transition is testable;
// the main loop feeds it user clicks and decoded server frames.

import { Mode, Role, ServerFrame } from "./protocol.js";

export type Phase =
  | "lobby"
  | "joining"
  | "ready"
  | "countdown"
  | "live"
  | "result"
  | "report"
  | "error";

export interface FlowState {
  phase: Phase;
  mode: Mode | null;
  rolesNeeded: Role[];
  rolesJoined: Role[];
  round: number;
  outcomes: boolean[];
  lastResult: boolean | null;
  errorDetail: string;
}

export type FlowEvent =
  | { type: "select_mode"; mode: Mode }
  | { type: "join_ack"; role: Role }
  | { type: "start_clicked" }
  | { type: "countdown_done" }
  | { type: "server_frame"; frame: ServerFrame }
  | { type: "next_round" }
  | { type: "disconnected" };

export function rolesFor(mode: Mode): Role[] {
  return mode === "collect_two_human" ? ["human", "robot_human2"] : ["human"];
}

export function newFlow(): FlowState {
  return {
    phase: "lobby",
    mode: null,
    rolesNeeded: [],
    rolesJoined: [],
    round: 0,
    outcomes: [],
    lastResult: null,
    errorDetail: "",
  };
}

/** Blinded per-round label: the operator sees which round they are in
 * but never which checkpoint is behind it. */
export function roundLabel(round: number): string {
  return "model " + String.fromCharCode(65 + (round % 26));
}

export function canStart(fs: FlowState): boolean {
  return fs.phase === "ready" &&
    fs.rolesNeeded.every((r) => fs.rolesJoined.includes(r));
}

export function tally(fs: FlowState): number {
  return fs.outcomes.filter(Boolean).length;
}

export function reduce(fs: FlowState, ev: FlowEvent): FlowState {
  const next = { ...fs, rolesJoined: [...fs.rolesJoined], outcomes: [...fs.outcomes] };
  switch (ev.type) {
    case "select_mode":
      next.mode = ev.mode;
      next.rolesNeeded = rolesFor(ev.mode);
      next.rolesJoined = [];
      next.phase = "joining";
      return next;
    case "join_ack":
      if (!next.rolesJoined.includes(ev.role)) next.rolesJoined.push(ev.role);
      if (next.rolesNeeded.every((r) => next.rolesJoined.includes(r))) {
        next.phase = "ready";
      }
      return next;
    case "start_clicked":
      if (canStart(fs)) next.phase = "countdown";
      return next;
    case "countdown_done":
      if (fs.phase === "countdown") next.phase = "live";
      return next;
    case "server_frame":
      return applyServerFrame(next, ev.frame);
    case "next_round":
      if (fs.phase === "result") next.phase = "countdown";
      return next;
    case "disconnected":
      next.phase = "error";
      next.errorDetail = "connection lost";
      return next;
  }
}

function applyServerFrame(next: FlowState, frame: ServerFrame): FlowState {
  switch (frame.type) {
    case "state":
      // a reset mid-round shows up as the same round number restarting;
      // the tally only moves on done frames
      next.round = frame.round;
      if (next.phase === "countdown" || next.phase === "joining") {
        next.phase = "live";
      }
      if (frame.done && next.phase === "live") {
        next.outcomes.push(frame.success);
        next.lastResult = frame.success;
        next.phase = "result";
      }
      return next;
    case "round_report":
      next.phase = "report";
      return next;
    case "error":
      // per-message errors keep the session alive server-side; only
      // session-level refusals bounce the client back to the lobby
      if (frame.code === "bad_mode" || frame.code === "role_taken" ||
          frame.code === "finished" || frame.code === "bad_join") {
        next.phase = "error";
        next.errorDetail = frame.code + ": " + frame.detail;
      }
      return next;
  }
}
