import { describe, expect, it } from "vitest";
import { actionMsg, decodeFrame, joinMsg, startMsg } from "../src/protocol";

const state = (over: object = {}) =>
  JSON.stringify({
    type: "state", tick: 3, obs: Array(10).fill(0.5),
    done: false, success: false, round: 1, ...over,
  });

describe("decodeFrame", () => {
  it("decodes a state frame", () => {
    const f = decodeFrame(state());
    expect(f).not.toBeNull();
    expect(f!.type).toBe("state");
    if (f!.type === "state") {
      expect(f!.tick).toBe(3);
      expect(f!.obs).toHaveLength(10);
      expect(f!.zhat).toBeUndefined();
    }
  });

  it("keeps zhat when present and well formed", () => {
    const f = decodeFrame(state({ zhat: [0.1, -0.2] }));
    if (f!.type !== "state") throw new Error("wrong type");
    expect(f!.zhat).toEqual([0.1, -0.2]);
  });

  it("rejects bad payloads instead of guessing", () => {
    expect(decodeFrame("not json")).toBeNull();
    expect(decodeFrame("42")).toBeNull();
    expect(decodeFrame(JSON.stringify({ no: "type" }))).toBeNull();
    expect(decodeFrame(JSON.stringify({ type: "mystery" }))).toBeNull();
    expect(decodeFrame(state({ obs: [1, 2, 3] }))).toBeNull();
    expect(decodeFrame(state({ obs: Array(10).fill("x") }))).toBeNull();
    expect(decodeFrame(state({ tick: "soon" }))).toBeNull();
  });

  it("decodes round reports and errors", () => {
    const r = decodeFrame(JSON.stringify({ type: "round_report", successes: 12, rounds: 20 }));
    expect(r).toEqual({ type: "round_report", successes: 12, rounds: 20 });
    const e = decodeFrame(JSON.stringify({ type: "error", code: "bad_mode", detail: "no" }));
    expect(e).toEqual({ type: "error", code: "bad_mode", detail: "no" });
  });
});

describe("outbound messages", () => {
  it("join and start carry the normative fields", () => {
    expect(JSON.parse(joinMsg("play_vs_policy", "human"))).toEqual({
      type: "join", mode: "play_vs_policy", role: "human",
    });
    expect(JSON.parse(startMsg())).toEqual({ type: "start" });
  });

  it("action clamps components into [-1,1]", () => {
    const m = JSON.parse(actionMsg(7, 3.5, -2));
    expect(m).toEqual({ type: "action", seq: 7, dx: 1, dy: -1 });
  });
});
