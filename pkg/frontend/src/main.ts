// Wiring: fetch the layout, run the lobby, then a single rAF loop that
// samples input, sends actions, and paints the latest server frame.

import { attachKeyboard, axesFromGamepad, axesFromKeys, mergeAxes } from "./input.js";
import { Mode, Role, ServerFrame, resetMsg, startMsg } from "./protocol.js";
import { DEFAULT_LAYOUT, Layout } from "./scene.js";
import { drawBadge, drawFrame, drawOverlay } from "./render.js";
import { applyFrame, isLagging, newView } from "./state.js";
import { FlowState, canStart, newFlow, reduce, roundLabel, tally } from "./flow.js";
import { RoleSocket } from "./net.js";

const CANVAS_PX = 640;
const COUNTDOWN_MS = 3000;

const canvas = document.getElementById("game") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const tallyEl = document.getElementById("tally")!;
const lobbyEl = document.getElementById("lobby")!;
const buttonsEl = document.getElementById("lobby-buttons")!;
const startBtn = document.getElementById("start") as HTMLButtonElement;
const resetBtn = document.getElementById("reset") as HTMLButtonElement;
const nextBtn = document.getElementById("next") as HTMLButtonElement;
const toastEl = document.getElementById("toast")!;

let layout: Layout = DEFAULT_LAYOUT;
let serverMode: Mode = "play_vs_policy";
let flow: FlowState = newFlow();
const view = newView();
const keys = attachKeyboard(window);
const sockets: RoleSocket[] = [];
let countdownEnd = 0;

function dispatch(ev: Parameters<typeof reduce>[1]): void {
  flow = reduce(flow, ev);
  syncControls();
}

function onFrame(role: Role, frame: ServerFrame): void {
  // the human role's stream drives the view; the second collect socket
  // only contributes its join ack to the flow
  if (role === "human" || frame.type !== "state") {
    applyFrame(view, frame, performance.now());
  }
  if (frame.type === "state" && !sockets.find((s) => s.role === role)!.joined) {
    sockets.find((s) => s.role === role)!.joined = true;
    dispatch({ type: "join_ack", role });
    return;
  }
  if (frame.type === "error") {
    toast(frame.code + ": " + frame.detail);
  }
  dispatch({ type: "server_frame", frame });
}

function joinSession(): void {
  dispatch({ type: "select_mode", mode: serverMode });
  for (const role of flow.rolesNeeded) {
    const sock = new RoleSocket(role, onFrame, () => {
      view.connected = false;
      dispatch({ type: "disconnected" });
    });
    sockets.push(sock);
    sock.connect(serverMode);
  }
  view.connected = true;
  lobbyEl.style.display = "none";
}

function toast(text: string): void {
  toastEl.textContent = text;
  toastEl.style.opacity = "1";
  setTimeout(() => (toastEl.style.opacity = "0"), 2500);
}

function syncControls(): void {
  startBtn.disabled = !canStart(flow);
  startBtn.style.display =
    flow.phase === "ready" || flow.phase === "joining" ? "" : "none";
  resetBtn.style.display = flow.phase === "live" ? "" : "none";
  nextBtn.style.display = flow.phase === "result" ? "" : "none";
  if (flow.phase === "error") {
    lobbyEl.style.display = "";
    toast(flow.errorDetail || "server error");
  }
}

startBtn.onclick = () => {
  dispatch({ type: "start_clicked" });
  countdownEnd = performance.now() + COUNTDOWN_MS;
};
resetBtn.onclick = () => sockets.forEach((s) => s.send(resetMsg()));
nextBtn.onclick = () => {
  dispatch({ type: "next_round" });
  countdownEnd = performance.now() + COUNTDOWN_MS;
};

function sendInputs(): void {
  if (flow.phase !== "live") return;
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  sockets.forEach((sock, i) => {
    const scheme = i === 0 ? "wasd" : "arrows";
    const kb = axesFromKeys(keys, scheme);
    const pad = axesFromGamepad(pads && pads[i] ? pads[i] : null);
    const [dx, dy] = mergeAxes(kb, pad);
    sock.sendAction(dx, dy);
  });
}

function paint(now: number): void {
  if (view.frame) {
    drawFrame(ctx, view.frame, layout, CANVAS_PX);
  } else {
    ctx.fillStyle = "#f4efe6";
    ctx.fillRect(0, 0, CANVAS_PX, CANVAS_PX);
  }
  if (!view.connected || isLagging(view, now)) {
    drawBadge(ctx, view.connected ? "lagging" : "offline");
  }
  if (flow.phase === "countdown") {
    const left = Math.max(0, countdownEnd - now);
    drawOverlay(ctx, CANVAS_PX, String(Math.ceil(left / 1000)),
                roundLabel(flow.round));
    if (left <= 0) {
      dispatch({ type: "countdown_done" });
      sockets[0].send(startMsg());
    }
  } else if (flow.phase === "result") {
    drawOverlay(ctx, CANVAS_PX, flow.lastResult ? "Success!" : "Time up",
                "round " + (flow.round + 1) + " done");
  } else if (flow.phase === "report" && view.report) {
    drawOverlay(ctx, CANVAS_PX, "Session complete",
                view.report.successes + " / " + view.report.rounds + " rounds won");
  }
  statusEl.textContent = flow.phase + (flow.phase === "live"
    ? " - " + roundLabel(flow.round) : "");
  tallyEl.textContent = "wins: " + tally(flow) + " / " + flow.outcomes.length;
}

function loop(now: number): void {
  sendInputs();
  paint(now);
  requestAnimationFrame(loop);
}

async function boot(): Promise<void> {
  try {
    const res = await fetch("/layout");
    if (res.ok) {
      const info = await res.json();
      layout = info as Layout;
      serverMode = info.mode as Mode;
    }
  } catch {
    // offline or non-service host: keep defaults so the lobby still renders
  }
  const label = serverMode === "play_vs_policy"
    ? "Play with the robot" : "Record with two players";
  const btn = document.createElement("button");
  btn.textContent = label;
  btn.onclick = joinSession;
  buttonsEl.appendChild(btn);
  requestAnimationFrame(loop);
}

boot();
