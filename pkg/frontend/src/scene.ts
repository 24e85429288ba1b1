// Decodes observation vectors and builds a draw list in world
// coordinates. Pure functions; the canvas painter interprets the list.

import { StateFrame } from "./protocol.js";

export interface Layout {
  map_size: number;
  rooms: number[][];
  doors: number[][];
  buttons: number[][];
  button_radius: number;
  destinations: number[][];
  destination_radius: number;
  treasure_spawns: number[][];
}

// Fallback when /layout is unreachable; mirrors the server defaults.
export const DEFAULT_LAYOUT: Layout = {
  map_size: 8.0,
  rooms: [[0.0, 6.4, 1.6, 8.0], [6.4, 0.0, 8.0, 1.6]],
  doors: [[1.6, 6.4, 7.2], [6.4, 0.8, 1.6]],
  buttons: [[2.6, 7.2], [5.4, 0.8]],
  button_radius: 0.4,
  destinations: [[0.8, 0.8], [7.2, 7.2]],
  destination_radius: 0.5,
  treasure_spawns: [[0.8, 7.2], [7.2, 0.8]],
};

export type Carrier = "human" | "robot" | null;

export interface DecodedObs {
  human: [number, number];
  robot: [number, number];
  treasures: [[number, number], [number, number]];
  doors: [boolean, boolean];
}

export function decodeObs(obs: number[], mapSize: number): DecodedObs {
  const p = (i: number): [number, number] => [obs[i] * mapSize, obs[i + 1] * mapSize];
  return {
    human: p(0),
    robot: p(2),
    treasures: [p(4), p(6)],
    doors: [obs[8] > 0.5, obs[9] > 0.5],
  };
}

/** A treasure rides its carrier, so coincident positions mean carried. */
export function carriedBy(
  t: [number, number],
  human: [number, number],
  robot: [number, number],
  eps = 1e-6,
): Carrier {
  const near = (a: [number, number]) =>
    Math.abs(a[0] - t[0]) < eps && Math.abs(a[1] - t[1]) < eps;
  if (near(human)) return "human";
  if (near(robot)) return "robot";
  return null;
}

export type DrawOp =
  | { kind: "room"; rect: [number, number, number, number] }
  | { kind: "door"; from: [number, number]; to: [number, number]; open: boolean }
  | { kind: "button"; at: [number, number]; r: number; pressed: boolean }
  | { kind: "dest"; at: [number, number]; r: number }
  | { kind: "treasure"; at: [number, number]; carrier: Carrier }
  | { kind: "agent"; at: [number, number]; who: "human" | "robot" };

export function buildScene(frame: StateFrame, layout: Layout): DrawOp[] {
  const d = decodeObs(frame.obs, layout.map_size);
  const ops: DrawOp[] = [];
  for (const rect of layout.rooms) {
    ops.push({ kind: "room", rect: rect as [number, number, number, number] });
  }
  layout.doors.forEach((door, i) => {
    // (plane, lo, hi): room walls are axis-aligned, doors sit on the
    // vertical wall
    const [plane, lo, hi] = door;
    ops.push({ kind: "door", from: [plane, lo], to: [plane, hi], open: d.doors[i] });
  });
  layout.buttons.forEach((b, i) => {
    ops.push({
      kind: "button",
      at: b as [number, number],
      r: layout.button_radius,
      pressed: d.doors[i],
    });
  });
  for (const dest of layout.destinations) {
    ops.push({
      kind: "dest",
      at: dest as [number, number],
      r: layout.destination_radius,
    });
  }
  d.treasures.forEach((t) => {
    ops.push({ kind: "treasure", at: t, carrier: carriedBy(t, d.human, d.robot) });
  });
  ops.push({ kind: "agent", at: d.human, who: "human" });
  ops.push({ kind: "agent", at: d.robot, who: "robot" });
  return ops;
}

/** World (y up) to pixel (y down) coordinates. */
export function worldToPx(
  p: [number, number],
  mapSize: number,
  canvasPx: number,
): [number, number] {
  const s = canvasPx / mapSize;
  return [p[0] * s, canvasPx - p[1] * s];
}

/** Position of the z-hat marker inside a square inset, z in (-1,1)^2. */
export function zInsetPx(
  z: [number, number],
  x0: number,
  y0: number,
  side: number,
): [number, number] {
  const cx = x0 + ((z[0] + 1) / 2) * side;
  const cy = y0 + ((1 - z[1]) / 2) * side;
  return [cx, cy];
}
