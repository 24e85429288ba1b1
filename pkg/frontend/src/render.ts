// Thin canvas painter for the scene draw list plus the HUD overlays.
// All geometry math lives in scene.ts; this file only touches the 2D
// context, so everything above it stays testable without a DOM.

import { DrawOp, Layout, buildScene, worldToPx, zInsetPx } from "./scene.js";
import { StateFrame } from "./protocol.js";

const COLORS = {
  floor: "#f4efe6",
  room: "#d8cfc0",
  wall: "#4a4036",
  doorOpen: "#9fd89f",
  button: "#c96",
  buttonPressed: "#e0a040",
  dest: "#8fb7d8",
  treasure: "#d4af37",
  human: "#3a6ea5",
  robot: "#a53a3a",
};

export function drawFrame(
  ctx: CanvasRenderingContext2D,
  frame: StateFrame,
  layout: Layout,
  canvasPx: number,
): void {
  const px = (p: [number, number]) => worldToPx(p, layout.map_size, canvasPx);
  const scale = canvasPx / layout.map_size;
  ctx.fillStyle = COLORS.floor;
  ctx.fillRect(0, 0, canvasPx, canvasPx);

  for (const op of buildScene(frame, layout)) {
    drawOp(ctx, op, px, scale);
  }
  if (frame.zhat) {
    drawZInset(ctx, frame.zhat, canvasPx);
  }
}

function drawOp(
  ctx: CanvasRenderingContext2D,
  op: DrawOp,
  px: (p: [number, number]) => [number, number],
  scale: number,
): void {
  switch (op.kind) {
    case "room": {
      const [x0, y0, x1, y1] = op.rect;
      const a = px([x0, y1]);
      ctx.fillStyle = COLORS.room;
      ctx.fillRect(a[0], a[1], (x1 - x0) * scale, (y1 - y0) * scale);
      ctx.strokeStyle = COLORS.wall;
      ctx.lineWidth = 3;
      ctx.strokeRect(a[0], a[1], (x1 - x0) * scale, (y1 - y0) * scale);
      break;
    }
    case "door": {
      const a = px(op.from);
      const b = px(op.to);
      ctx.strokeStyle = op.open ? COLORS.doorOpen : COLORS.wall;
      ctx.lineWidth = op.open ? 4 : 7;
      if (op.open) ctx.setLineDash([6, 6]);
      ctx.beginPath();
      ctx.moveTo(a[0], a[1]);
      ctx.lineTo(b[0], b[1]);
      ctx.stroke();
      ctx.setLineDash([]);
      break;
    }
    case "button":
      circle(ctx, px(op.at), op.r * scale,
             op.pressed ? COLORS.buttonPressed : COLORS.button, true);
      break;
    case "dest":
      circle(ctx, px(op.at), op.r * scale, COLORS.dest, false);
      break;
    case "treasure": {
      const [cx, cy] = px(op.at);
      ctx.fillStyle = COLORS.treasure;
      ctx.save();
      ctx.translate(cx, cy);
      // carried treasures ride on the agent; draw them lifted and small
      const r = op.carrier ? 6 : 9;
      if (op.carrier) ctx.translate(0, -12);
      ctx.rotate(Math.PI / 4);
      ctx.fillRect(-r, -r, 2 * r, 2 * r);
      ctx.restore();
      break;
    }
    case "agent":
      circle(ctx, px(op.at), 10, op.who === "human" ? COLORS.human : COLORS.robot, true);
      break;
  }
}

function circle(
  ctx: CanvasRenderingContext2D,
  at: [number, number],
  r: number,
  color: string,
  fill: boolean,
): void {
  ctx.beginPath();
  ctx.arc(at[0], at[1], r, 0, 2 * Math.PI);
  if (fill) {
    ctx.fillStyle = color;
    ctx.fill();
  } else {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.setLineDash([4, 4]);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

export const Z_INSET = { side: 110, margin: 12 };

function drawZInset(
  ctx: CanvasRenderingContext2D,
  zhat: [number, number],
  canvasPx: number,
): void {
  const { side, margin } = Z_INSET;
  const x0 = canvasPx - side - margin;
  const y0 = margin;
  ctx.fillStyle = "rgba(255,255,255,0.85)";
  ctx.fillRect(x0, y0, side, side);
  ctx.strokeStyle = COLORS.wall;
  ctx.lineWidth = 1;
  ctx.strokeRect(x0, y0, side, side);
  ctx.beginPath();
  ctx.moveTo(x0 + side / 2, y0);
  ctx.lineTo(x0 + side / 2, y0 + side);
  ctx.moveTo(x0, y0 + side / 2);
  ctx.lineTo(x0 + side, y0 + side / 2);
  ctx.strokeStyle = "#bbb";
  ctx.stroke();
  const [cx, cy] = zInsetPx(zhat, x0, y0, side);
  circle(ctx, [cx, cy], 4, COLORS.robot, true);
  ctx.fillStyle = COLORS.wall;
  ctx.font = "10px sans-serif";
  ctx.fillText("strategy", x0 + 4, y0 + side - 4);
}

export function drawBadge(ctx: CanvasRenderingContext2D, text: string): void {
  ctx.fillStyle = "rgba(160,40,40,0.9)";
  ctx.fillRect(10, 10, 86, 24);
  ctx.fillStyle = "#fff";
  ctx.font = "12px sans-serif";
  ctx.fillText(text, 18, 26);
}

export function drawOverlay(
  ctx: CanvasRenderingContext2D,
  canvasPx: number,
  title: string,
  sub: string,
): void {
  ctx.fillStyle = "rgba(30,30,30,0.55)";
  ctx.fillRect(0, 0, canvasPx, canvasPx);
  ctx.fillStyle = "#fff";
  ctx.font = "bold 36px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(title, canvasPx / 2, canvasPx / 2 - 10);
  ctx.font = "16px sans-serif";
  ctx.fillText(sub, canvasPx / 2, canvasPx / 2 + 24);
  ctx.textAlign = "left";
}
