"""Real-time game service for demonstration collection and play evaluation.

The logic lives in GameSession, a synchronous object driven by tick():
the network layer is a thin asyncio wrapper that forwards socket messages
into the session and fans tick frames out to clients.  Slow clients get
dropped frames, never a delayed simulation; each session owns its own
environment and recording buffer.
"""

import asyncio
import json
import os

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import ServeConfig
from .demos import DemoDataset, Demonstration, WindowTracker
from .demos import save as save_demos
from .env import ENV_VERSION, FetchQuestEnv, Layout, layout_hash
from .experts import classify_strategy
from .rngs import T_RESET, T_SHUFFLE, derive_rng
from .train import load_bundle

ROLES = {"play_vs_policy": ("human",),
         "collect_two_human": ("human", "robot_human2")}


class SessionError(ValueError):
    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail

    def frame(self) -> dict:
        return {"type": "error", "code": self.code, "detail": self.detail}


def _round_seed(seed: int, rnd: int) -> int:
    return int(np.random.SeedSequence(
        (seed, T_RESET, rnd)).generate_state(1)[0])


class GameSession:
    """One evaluation or collection session: N rounds, one episode each."""

    def __init__(self, cfg: ServeConfig, layout: Layout = None,
                 session_id: str = "s0"):
        cfg.validate_for_launch()
        self.cfg = cfg
        self.session_id = session_id
        self.bundles = [load_bundle(p) for p in cfg.checkpoints]
        if self.bundles:
            layout = self.bundles[0].layout
        self.layout = layout or Layout()
        self.env = FetchQuestEnv(self.layout)
        self.roles_required = ROLES[cfg.mode]
        self.joined: set = set()
        self.round = 0
        self.outcomes: list = []
        self.finished = False
        self.tick_count = 0
        self.playlist = self._build_playlist()
        self._state = None
        self._running = False
        self._held = {r: np.zeros(2) for r in self.roles_required}
        self._last_seq = {r: -1 for r in self.roles_required}
        self._tracker = WindowTracker()
        self._rec_obs: list = []
        self._rec_ah: list = []
        self._rec_ar: list = []
        self.recording_paths: list = []

    # ------------------------------------------------------------ setup

    def _build_playlist(self):
        """Blinded per-round checkpoint order, balanced then shuffled."""
        if not self.bundles:
            return [None] * self.cfg.rounds
        n, arms = self.cfg.rounds, len(self.bundles)
        base = np.tile(np.arange(arms), (n + arms - 1) // arms)[:n]
        order = derive_rng(self.cfg.seed, T_SHUFFLE).permutation(n)
        return [int(base[i]) for i in order]

    def playlist_manifest(self) -> list:
        return [{"round": r, "arm": a,
                 "checkpoint": None if a is None else self.cfg.checkpoints[a]}
                for r, a in enumerate(self.playlist)]

    def _bundle(self):
        arm = self.playlist[self.round]
        return None if arm is None else self.bundles[arm]

    # --------------------------------------------------------- messages

    def handle(self, role: str, msg) -> list:
        """Apply one inbound message; returns frames for that client."""
        try:
            if not isinstance(msg, dict) or "type" not in msg:
                raise SessionError("bad_message", "message must be an object "
                                   "with a type field")
            kind = msg["type"]
            if kind == "join":
                return [self.join(msg.get("mode"), msg.get("role"))]
            if kind == "start":
                return self.start()
            if kind == "action":
                self.action(role, msg.get("seq"), msg.get("dx"),
                            msg.get("dy"))
                return []
            if kind == "reset":
                self.reset()
                return []
            raise SessionError("bad_type", "unknown message type %r" % (kind,))
        except SessionError as e:
            return [e.frame()]

    def join(self, mode, role) -> dict:
        if mode != self.cfg.mode:
            raise SessionError("bad_mode", "session runs %r" % (self.cfg.mode,))
        if role not in self.roles_required:
            raise SessionError("bad_role", "role must be one of %r"
                               % (self.roles_required,))
        if role in self.joined:
            raise SessionError("role_taken", "role %r already joined" % (role,))
        self.joined.add(role)
        return {"type": "state", "tick": self.tick_count, "obs": [0.0] * 10,
                "done": False, "success": False, "round": self.round}

    def start(self) -> list:
        if self.finished:
            raise SessionError("finished", "all rounds already played")
        if self.joined != set(self.roles_required):
            raise SessionError("not_ready", "waiting for roles %r"
                               % (sorted(set(self.roles_required)
                                         - self.joined),))
        if self._running:
            raise SessionError("already_running", "episode in progress")
        seed = _round_seed(self.cfg.seed, self.round)
        self._state = self.env.reset(seed)
        self._round_env_seed = seed
        self._running = True
        self._tracker.reset()
        self._tracker.push_obs(self.env.observe(self._state))
        self._rec_obs, self._rec_ah, self._rec_ar = [], [], []
        for r in self.roles_required:
            self._held[r] = np.zeros(2)
        return [self._state_frame(self.env.observe(self._state),
                                  done=False, success=False)]

    def action(self, role: str, seq, dx, dy):
        if role not in self.joined:
            raise SessionError("not_joined", "join before sending actions")
        ok = isinstance(seq, int) and not isinstance(seq, bool)
        for v in (dx, dy):
            ok = ok and isinstance(v, (int, float)) \
                and not isinstance(v, bool) and np.isfinite(v)
        if not ok:
            raise SessionError("bad_action",
                               "action needs integer seq and finite dx, dy")
        if seq <= self._last_seq[role]:
            return                     # stale or duplicate packet
        self._last_seq[role] = seq
        self._held[role] = np.array([float(dx), float(dy)])

    def reset(self):
        """Abort the running episode; the round restarts on the next start."""
        self._running = False
        self._rec_obs, self._rec_ah, self._rec_ar = [], [], []

    def disconnect(self, role: str):
        """A client dropped: the live episode is aborted and marked failed."""
        self.joined.discard(role)
        if self._running:
            self._running = False
            self._rec_obs, self._rec_ah, self._rec_ar = [], [], []
            self.outcomes.append(False)
            self.round += 1
            if self.round >= self.cfg.rounds:
                self.finished = True
                self._write_report()

    # --------------------------------------------------------------- tick

    def tick(self) -> list:
        """Advance one simulation step; returns frames to broadcast."""
        if not self._running:
            return []
        obs = self.env.observe(self._state)
        window = self._tracker.window()
        ah = self._held["human"]
        bundle = self._bundle()
        zhat = None
        if self.cfg.mode == "play_vs_policy":
            ar = bundle.robot_action(obs, window)
            zhat = bundle.code_estimate(window)
        else:
            ar = self._held["robot_human2"]
        self._rec_obs.append(obs)
        self._rec_ah.append(np.asarray(ah, dtype=np.float64))
        self._rec_ar.append(np.asarray(ar, dtype=np.float64))
        self._state, done, success = self.env.step(self._state, ah, ar)
        self._tracker.push_action(np.clip(ah, -1.0, 1.0))
        new_obs = self.env.observe(self._state)
        self._tracker.push_obs(new_obs)
        self.tick_count += 1
        frames = [self._state_frame(new_obs, done, success, zhat)]
        if done:
            self._finish_round(bool(success))
            if self.finished:
                frames.append({"type": "round_report",
                               "successes": sum(self.outcomes),
                               "rounds": self.cfg.rounds})
        return frames

    def _state_frame(self, obs, done, success, zhat=None) -> dict:
        frame = {"type": "state", "tick": self.tick_count,
                 "obs": [float(v) for v in obs], "done": bool(done),
                 "success": bool(success), "round": self.round}
        if self.cfg.mode == "play_vs_policy":
            z = np.zeros(2) if zhat is None else zhat
            frame["zhat"] = [float(z[0]), float(z[1])]
        return frame

    def _finish_round(self, success: bool):
        self._running = False
        demo = Demonstration(
            obs=np.array(self._rec_obs),
            actions_h=np.array(self._rec_ah),
            actions_r=np.array(self._rec_ar),
            meta={"id": "served-%s-r%03d" % (self.session_id, self.round),
                  "env_version": ENV_VERSION,
                  "layout_hash": layout_hash(self.layout),
                  "seed": self._round_env_seed,
                  "source": "served",
                  "strategy": classify_strategy(np.array(self._rec_obs)),
                  "success": success})
        if self.cfg.out_dir:
            os.makedirs(self.cfg.out_dir, exist_ok=True)
            path = os.path.join(self.cfg.out_dir, "%s_round_%03d.json"
                                % (self.session_id, self.round))
            save_demos(DemoDataset([demo], self.layout), path)
            self.recording_paths.append(path)
        self.outcomes.append(success)
        self.round += 1
        if self.round >= self.cfg.rounds:
            self.finished = True
            self._write_report()

    def _write_report(self):
        if not self.cfg.out_dir:
            return
        os.makedirs(self.cfg.out_dir, exist_ok=True)
        path = os.path.join(self.cfg.out_dir,
                            "%s_report.json" % (self.session_id,))
        with open(path, "w") as f:
            json.dump({"session": self.session_id,
                       "successes": sum(self.outcomes),
                       "rounds": self.cfg.rounds,
                       "outcomes": [bool(o) for o in self.outcomes],
                       "playlist": self.playlist_manifest()},
                      f, sort_keys=True, indent=2)


# ------------------------------------------------------------ network

class _Client:
    """Outbound frame queue with drop-on-full for state frames."""

    def __init__(self, ws: WebSocket, role: str):
        self.ws = ws
        self.role = role
        self.dropped = 0
        self.queue: asyncio.Queue = asyncio.Queue(maxsize=16)

    def push(self, frame: dict):
        try:
            self.queue.put_nowait(frame)
        except asyncio.QueueFull:
            if frame["type"] == "state":
                self.dropped += 1      # drop the frame, never stall the sim
                return
            try:                       # make room for control frames
                self.queue.get_nowait()
            except asyncio.QueueEmpty:
                pass
            self.queue.put_nowait(frame)

    async def sender(self):
        try:
            while True:
                frame = await self.queue.get()
                await self.ws.send_text(json.dumps(frame, sort_keys=True))
        except Exception:
            pass                       # socket gone; receive loop cleans up


class _SessionRunner:
    """Owns the tick task and the client set for one GameSession."""

    def __init__(self, session: GameSession, tick_hz: float):
        self.session = session
        self.interval = 1.0 / tick_hz
        self.clients: dict = {}
        self.task = None

    def broadcast(self, frames):
        for frame in frames:
            for client in self.clients.values():
                client.push(frame)

    async def run(self):
        while not self.session.finished and self.clients:
            self.broadcast(self.session.tick())
            await asyncio.sleep(self.interval)

    def ensure_running(self):
        if self.task is None or self.task.done():
            self.task = asyncio.ensure_future(self.run())

    def drop(self, role: str):
        self.clients.pop(role, None)
        self.session.disconnect(role)
        if not self.clients and self.task is not None:
            self.task.cancel()


def build_app(cfg: ServeConfig, layout: Layout = None,
              frontend_dir: str = None) -> FastAPI:
    cfg.validate_for_launch()
    app = FastAPI()
    runners: list = []

    def new_runner() -> _SessionRunner:
        session = GameSession(cfg, layout,
                              session_id="s%d" % (len(runners),))
        runner = _SessionRunner(session, cfg.tick_hz)
        runners.append(runner)
        return runner

    def assign(role: str) -> _SessionRunner:
        # collect mode pairs two roles into one session; play mode gives
        # each human an isolated session
        if cfg.mode == "collect_two_human":
            for runner in runners:
                if not runner.session.finished \
                        and role not in runner.session.joined \
                        and runner.session.joined:
                    return runner
        return new_runner()

    app.state.runners = runners

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "mode": cfg.mode, "rounds": cfg.rounds}

    @app.get("/layout")
    def layout_info():
        lay = layout or Layout()
        return {"map_size": lay.map_size, "rooms": lay.rooms,
                "doors": lay.doors, "buttons": lay.buttons,
                "button_radius": lay.button_radius,
                "destinations": lay.destinations,
                "destination_radius": lay.destination_radius,
                "treasure_spawns": lay.treasure_spawns,
                "mode": cfg.mode, "rounds": cfg.rounds}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        runner = None
        client = None
        sender = None
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps(
                        SessionError("bad_json", "not valid JSON").frame(),
                        sort_keys=True))
                    continue
                if runner is None:
                    # must join with a valid mode and role before anything
                    if not isinstance(msg, dict) or msg.get("type") != "join" \
                            or msg.get("mode") != cfg.mode \
                            or msg.get("role") not in ROLES[cfg.mode]:
                        await ws.send_text(json.dumps(
                            SessionError("bad_join", "first message must "
                                         "join with this server's mode and "
                                         "a valid role").frame(),
                            sort_keys=True))
                        continue
                    role = msg["role"]
                    candidate = assign(role)
                    reply = candidate.session.handle(role, msg)
                    if reply and reply[0]["type"] == "error":
                        await ws.send_text(json.dumps(reply[0],
                                                      sort_keys=True))
                        continue
                    runner = candidate
                    client = _Client(ws, role)
                    runner.clients[role] = client
                    sender = asyncio.ensure_future(client.sender())
                    runner.ensure_running()
                    for frame in reply:
                        client.push(frame)
                    continue
                for frame in runner.session.handle(client.role, msg):
                    client.push(frame)
        except WebSocketDisconnect:
            pass
        finally:
            if sender is not None:
                sender.cancel()
            if runner is not None:
                runner.drop(client.role)

    if frontend_dir and os.path.isdir(frontend_dir):
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="frontend")
    return app
