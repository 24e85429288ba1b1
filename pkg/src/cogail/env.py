"""Two-agent fetch-quest game: a deterministic 8x8 Markov game.

Two treasures sit in rooms at opposite corners.  Each room's door is
held open only while some agent stands on the button outside it, so the
agents must coordinate: one holds a button while the other enters,
grabs a treasure, then they swap duties and carry their loot to two
distinct destination zones.

The environment is a pure state machine: ``step`` maps (state, actions)
to a new state with no hidden mutability, so rollout workers can share
one instance.
"""

import hashlib
import json
from dataclasses import dataclass, asdict, replace

import numpy as np

ENV_VERSION = "fetchquest-v1"

# carrier codes
NONE, HUMAN, ROBOT = 0, 1, 2

PICKUP_RADIUS = 0.3


@dataclass(frozen=True)
class Layout:
    """Map geometry and motion constants.

    Rooms are axis-aligned rectangles (x0, y0, x1, y1).  Each door is a
    gap in a vertical room wall, given as (x_plane, y_lo, y_hi).  All
    default geometry is point-symmetric about the map center, which the
    symmetry tests rely on.
    """

    map_size: float = 8.0
    rooms: tuple = ((0.0, 6.4, 1.6, 8.0), (6.4, 0.0, 8.0, 1.6))
    doors: tuple = ((1.6, 6.4, 7.2), (6.4, 0.8, 1.6))
    buttons: tuple = ((2.6, 7.2), (5.4, 0.8))
    button_radius: float = 0.4
    destinations: tuple = ((0.8, 0.8), (7.2, 7.2))
    destination_radius: float = 0.5
    treasure_spawns: tuple = ((0.8, 7.2), (7.2, 0.8))
    starts: tuple = ((3.0, 4.0), (5.0, 4.0))
    start_jitter: float = 0.3
    speed_scale: float = 0.15
    max_steps: int = 300

    def validate(self):
        for i, (x0, y0, x1, y1) in enumerate(self.rooms):
            if not (x0 < x1 and y0 < y1):
                raise ValueError("room %d is degenerate" % i)
            bx, by = self.buttons[i]
            if x0 <= bx <= x1 and y0 <= by <= y1:
                raise ValueError("button %d must sit outside its room" % i)
            tx, ty = self.treasure_spawns[i]
            if not (x0 <= tx <= x1 and y0 <= ty <= y1):
                raise ValueError("treasure %d must spawn inside its room" % i)
        if self.speed_scale <= 0 or self.max_steps <= 0:
            raise ValueError("speed_scale and max_steps must be positive")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Layout":
        def tup(v):
            return tuple(tup(x) for x in v) if isinstance(v, (list, tuple)) else v
        return cls(**{k: tup(v) for k, v in d.items()}).validate()


def layout_hash(layout: Layout) -> str:
    return hashlib.sha256(layout.to_json().encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class EnvState:
    human: tuple
    robot: tuple
    treasures: tuple          # ((x, y), (x, y))
    door_open: tuple          # (bool, bool)
    carrier: tuple            # carrier code per treasure
    step: int
    done: bool
    success: bool


class EpisodeDone(RuntimeError):
    """Raised when step() is called on a finished episode."""


class FetchQuestEnv:
    def __init__(self, layout: Layout = None):
        self.layout = (layout or Layout()).validate()

    # ------------------------------------------------------------ reset

    def reset(self, seed) -> EnvState:
        """Fresh episode.  seed=None places agents exactly on the nominal
        starts; an int seed draws a jittered start deterministically."""
        lay = self.layout
        if seed is None or lay.start_jitter == 0:
            j = np.zeros(4)
        else:
            rng = np.random.Generator(np.random.PCG64(int(seed)))
            j = rng.uniform(-lay.start_jitter, lay.start_jitter, 4)
        (hx, hy), (rx, ry) = lay.starts
        return EnvState(
            human=(float(hx + j[0]), float(hy + j[1])),
            robot=(float(rx + j[2]), float(ry + j[3])),
            treasures=tuple(lay.treasure_spawns),
            door_open=(False, False),
            carrier=(NONE, NONE),
            step=0, done=False, success=False)

    # ------------------------------------------------------------- step

    def step(self, state: EnvState, action_h, action_r):
        """Advance one tick; returns (new_state, done, success)."""
        if state.done:
            raise EpisodeDone("step() on a finished episode")
        lay = self.layout
        human = self._move(state.human, action_h, state.door_open)
        robot = self._move(state.robot, action_r, state.door_open)

        # doors are held open, not latched: recompute from new positions
        door_open = tuple(
            bool(self._near(human, lay.buttons[i], lay.button_radius)
                 or self._near(robot, lay.buttons[i], lay.button_radius))
            for i in range(2))

        carrier = list(state.carrier)
        treasures = list(state.treasures)
        for i in range(2):
            if carrier[i] == HUMAN:
                treasures[i] = human
            elif carrier[i] == ROBOT:
                treasures[i] = robot
        # auto-pickup: empty-handed agent near an uncarried treasure in its room
        for i in range(2):
            if carrier[i] != NONE:
                continue
            for who, pos in ((HUMAN, human), (ROBOT, robot)):
                if who in carrier:
                    continue
                if self._inside(pos, lay.rooms[i]) and \
                        self._near(pos, treasures[i], PICKUP_RADIUS):
                    carrier[i] = who
                    treasures[i] = pos
                    break

        success = self._success(human, robot, carrier)
        step = state.step + 1
        done = success or step >= lay.max_steps
        new_state = EnvState(human=human, robot=robot,
                             treasures=tuple(treasures),
                             door_open=door_open, carrier=tuple(carrier),
                             step=step, done=done, success=success)
        return new_state, done, success

    def observe(self, state: EnvState) -> np.ndarray:
        s = self.layout.map_size
        obs = np.empty(10)
        obs[0:2] = state.human
        obs[2:4] = state.robot
        obs[4:6] = state.treasures[0]
        obs[6:8] = state.treasures[1]
        obs[:8] /= s
        obs[8] = 1.0 if state.door_open[0] else 0.0
        obs[9] = 1.0 if state.door_open[1] else 0.0
        return obs

    # -------------------------------------------------------- internals

    def _success(self, human, robot, carrier) -> bool:
        if NONE in carrier:
            return False
        lay = self.layout
        r = lay.destination_radius
        for hd, rd in ((0, 1), (1, 0)):
            if self._near(human, lay.destinations[hd], r) and \
                    self._near(robot, lay.destinations[rd], r):
                return True
        return False

    @staticmethod
    def _near(p, q, radius) -> bool:
        dx, dy = p[0] - q[0], p[1] - q[1]
        return dx * dx + dy * dy <= radius * radius

    @staticmethod
    def _inside(p, room) -> bool:
        x0, y0, x1, y1 = room
        return x0 <= p[0] <= x1 and y0 <= p[1] <= y1

    def _move(self, pos, action, door_open):
        """Axis-separated move with map clamping and wall blocking."""
        lay = self.layout
        dx = min(1.0, max(-1.0, float(action[0]))) * lay.speed_scale
        dy = min(1.0, max(-1.0, float(action[1]))) * lay.speed_scale
        x, y = pos
        nx = min(lay.map_size, max(0.0, x + dx))
        if self._blocked_x(x, nx, y, door_open):
            nx = x
        ny = min(lay.map_size, max(0.0, y + dy))
        if self._blocked_y(y, ny, nx, door_open):
            ny = y
        return (nx, ny)

    def _blocked_x(self, x_old, x_new, y, door_open) -> bool:
        lay = self.layout
        for i, (x0, y0, x1, y1) in enumerate(lay.rooms):
            if not (y0 <= y <= y1):
                continue
            dplane, dlo, dhi = lay.doors[i]
            for plane in self._inner_x_walls(x0, x1):
                if not (min(x_old, x_new) < plane < max(x_old, x_new)):
                    continue
                on_door = plane == dplane and dlo <= y <= dhi
                if not on_door:
                    return True
                entering = self._inside((x_new, y), lay.rooms[i])
                if entering and not door_open[i]:
                    return True
        return False

    def _blocked_y(self, y_old, y_new, x, door_open) -> bool:
        lay = self.layout
        for i, (x0, y0, x1, y1) in enumerate(lay.rooms):
            if not (x0 <= x <= x1):
                continue
            for plane in self._inner_y_walls(y0, y1):
                if min(y_old, y_new) < plane < max(y_old, y_new):
                    return True      # horizontal walls have no door segments
        return False

    def _inner_x_walls(self, x0, x1):
        # map-border walls are handled by clamping
        walls = []
        if x0 > 0.0:
            walls.append(x0)
        if x1 < self.layout.map_size:
            walls.append(x1)
        return walls

    def _inner_y_walls(self, y0, y1):
        walls = []
        if y0 > 0.0:
            walls.append(y0)
        if y1 < self.layout.map_size:
            walls.append(y1)
        return walls


def mirror_point(layout: Layout, p):
    """The map's point symmetry: reflection through the center."""
    s = layout.map_size
    return (s - p[0], s - p[1])


class ReachGoalTask:
    """Dense-reward sanity variant: both agents steer to fixed targets.

    Same dynamics and observation space as the main game; reward is the
    mean over agents of exp(-distance to target), so returns are
    positive and increase as the agents learn to approach.  Episodes
    run to the step limit.
    """

    def __init__(self, layout: Layout = None, max_steps: int = 100):
        base = layout or Layout()
        self.env = FetchQuestEnv(replace(base, max_steps=max_steps))
        self.targets = (base.destinations[0], base.destinations[1])

    def reset(self, seed: int) -> EnvState:
        return self.env.reset(seed)

    def observe(self, state: EnvState) -> np.ndarray:
        return self.env.observe(state)

    def step(self, state: EnvState, action_h, action_r):
        new_state, done, _ = self.env.step(state, action_h, action_r)
        reward = 0.0
        for pos, tgt in ((new_state.human, self.targets[0]),
                         (new_state.robot, self.targets[1])):
            d = np.hypot(pos[0] - tgt[0], pos[1] - tgt[1])
            reward += 0.5 * float(np.exp(-d))
        return new_state, reward, done
