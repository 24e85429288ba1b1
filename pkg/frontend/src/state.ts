// The single mutable view record. Network callbacks write into it, the
// render loop reads from it; there is no other shared state.

import { ErrorFrame, RoundReport, ServerFrame, StateFrame } from "./protocol.js";

export interface View {
  frame: StateFrame | null;
  report: RoundReport | null;
  lastError: ErrorFrame | null;
  connected: boolean;
  lastFrameAt: number;
}

export function newView(): View {
  return {
    frame: null,
    report: null,
    lastError: null,
    connected: false,
    lastFrameAt: 0,
  };
}

/** Applies one decoded frame; out-of-order state ticks are ignored. */
export function applyFrame(view: View, frame: ServerFrame, now: number): void {
  switch (frame.type) {
    case "state":
      if (view.frame !== null && frame.round === view.frame.round &&
          frame.tick < view.frame.tick) {
        return;
      }
      view.frame = frame;
      view.lastFrameAt = now;
      break;
    case "round_report":
      view.report = frame;
      break;
    case "error":
      view.lastError = frame;
      break;
  }
}

// A live round should tick at 20 Hz; five missed intervals means the
// connection is stalled and the badge goes up.
export function isLagging(view: View, now: number, budgetMs = 250): boolean {
  if (view.frame === null || view.frame.done) return false;
  return now - view.lastFrameAt > budgetMs;
}
