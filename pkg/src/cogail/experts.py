"""Scripted demonstrators for the four collaboration strategies.

Each strategy is a pair of per-agent waypoint plans with phase gates
(hold a button until the partner has picked up, wait at a door approach
until it opens).  A proportional controller steers toward the current
waypoint; small Gaussian noise makes demonstrations human-like.

Strategy numbering follows the classifier axes:
  1: robot fetches first, human handles room 0 (nominal sides)
  2: human fetches first, nominal sides
  3: robot fetches first, sides swapped
  4: human fetches first, sides swapped
Plans 3 and 4 are plans 1 and 2 with all waypoints mirrored through the
map center (the layout's symmetry), which swaps the sides each agent
handles while keeping agent identities.
"""

from dataclasses import dataclass

import numpy as np

from .env import HUMAN, NONE, ROBOT, EnvState, Layout, mirror_point

ARRIVE_TOL = 0.12
GATE_SLACK = 4          # extra ticks to linger after a gate opens


@dataclass(frozen=True)
class PlanStep:
    waypoint: tuple
    gate: tuple            # ("arrive",) | ("door", i) | ("picked", treasure, carrier)


@dataclass(frozen=True)
class ExpertPlan:
    strategy: int
    human_steps: tuple
    robot_steps: tuple
    noise: float = 0.05


def _door_approach(layout: Layout, i: int) -> tuple:
    x_plane, y_lo, y_hi = layout.doors[i]
    # stand off the wall, centered on the door span, on the outside
    off = 0.4 if i == 0 else -0.4
    return (x_plane + off, (y_lo + y_hi) / 2.0)


def build_plans(layout: Layout = None) -> dict:
    """Waypoint plans for strategies 1-4 on the given layout."""
    lay = layout or Layout()
    b0, b1 = lay.buttons
    t0, t1 = lay.treasure_spawns
    da, db = lay.destinations
    ap0, ap1 = _door_approach(lay, 0), _door_approach(lay, 1)

    # strategy 1: human holds button 1 so the robot fetches treasure 1
    # first; the robot then holds button 0 while the human fetches
    # treasure 0; destinations human->A, robot->B.  After a pickup the
    # plan routes back through the door approach so the exit never
    # pushes against a doorless wall.
    s1_h = (PlanStep(b1, ("picked", 1, ROBOT)),
            PlanStep(ap0, ("door", 0)),
            PlanStep(t0, ("picked", 0, HUMAN)),
            PlanStep(ap0, ("arrive",)),
            PlanStep(da, ("arrive",)))
    s1_r = (PlanStep(ap1, ("door", 1)),
            PlanStep(t1, ("picked", 1, ROBOT)),
            PlanStep(ap1, ("arrive",)),
            PlanStep(b0, ("picked", 0, HUMAN)),
            PlanStep(db, ("arrive",)))

    # strategy 2: same sides, human fetches first
    s2_h = (PlanStep(ap0, ("door", 0)),
            PlanStep(t0, ("picked", 0, HUMAN)),
            PlanStep(ap0, ("arrive",)),
            PlanStep(b1, ("picked", 1, ROBOT)),
            PlanStep(da, ("arrive",)))
    s2_r = (PlanStep(b0, ("picked", 0, HUMAN)),
            PlanStep(ap1, ("door", 1)),
            PlanStep(t1, ("picked", 1, ROBOT)),
            PlanStep(ap1, ("arrive",)),
            PlanStep(db, ("arrive",)))

    def mirrored(steps):
        # mirroring swaps which side (treasure, door) each step touches
        out = []
        for st in steps:
            wp = mirror_point(lay, st.waypoint)
            gate = st.gate
            if gate[0] == "door":
                gate = ("door", 1 - gate[1])
            elif gate[0] == "picked":
                gate = ("picked", 1 - gate[1], gate[2])
            out.append(PlanStep(wp, gate))
        return tuple(out)

    s3_h, s3_r = mirrored(s1_h), mirrored(s1_r)
    s4_h, s4_r = mirrored(s2_h), mirrored(s2_r)

    return {
        1: ExpertPlan(1, s1_h, s1_r),
        2: ExpertPlan(2, s2_h, s2_r),
        3: ExpertPlan(3, s3_h, s3_r),
        4: ExpertPlan(4, s4_h, s4_r),
    }


class ScriptedExpert:
    """Executes an ExpertPlan for both agents with P-control plus noise."""

    def __init__(self, plan: ExpertPlan, gain: float = 4.0,
                 gate_slack: int = GATE_SLACK):
        self.plan = plan
        self.gain = gain
        self.gate_slack = gate_slack
        self._idx = [0, 0]
        self._slack = [0, 0]

    def act(self, state: EnvState, rng: np.random.Generator = None):
        """Actions for (human, robot) at this state; advances phase gates."""
        actions = []
        for agent, steps, pos in ((0, self.plan.human_steps, state.human),
                                  (1, self.plan.robot_steps, state.robot)):
            i = self._idx[agent]
            step = steps[i]
            if i < len(steps) - 1 and self._gate_open(step, pos, state):
                self._slack[agent] += 1
                if self._slack[agent] > self.gate_slack:
                    self._idx[agent] = i = i + 1
                    self._slack[agent] = 0
                    step = steps[i]
            else:
                self._slack[agent] = 0
            wx, wy = step.waypoint
            a = np.array([self.gain * (wx - pos[0]), self.gain * (wy - pos[1])])
            np.clip(a, -1.0, 1.0, out=a)
            if rng is not None and self.plan.noise > 0:
                a += rng.normal(0.0, self.plan.noise, 2)
                np.clip(a, -1.0, 1.0, out=a)
            actions.append(a)
        return actions[0], actions[1]

    def _gate_open(self, step: PlanStep, pos, state: EnvState) -> bool:
        kind = step.gate[0]
        arrived = (pos[0] - step.waypoint[0]) ** 2 + \
            (pos[1] - step.waypoint[1]) ** 2 <= ARRIVE_TOL ** 2
        if kind == "arrive":
            return arrived
        if kind == "door":
            return arrived and state.door_open[step.gate[1]]
        if kind == "picked":
            return state.carrier[step.gate[1]] == step.gate[2]
        raise ValueError("unknown gate %r" % (step.gate,))


def run_episode(env, expert: ScriptedExpert, seed: int,
                rng: np.random.Generator = None):
    """Roll one scripted episode; returns (obs, aH, aR arrays, success)."""
    state = env.reset(seed)
    obs_list, ah_list, ar_list = [], [], []
    done = False
    while not done:
        ah, ar = expert.act(state, rng)
        obs_list.append(env.observe(state))
        ah_list.append(ah)
        ar_list.append(ar)
        state, done, success = env.step(state, ah, ar)
    return (np.array(obs_list), np.array(ah_list), np.array(ar_list),
            state.success)


def classify_strategy(obs_traj: np.ndarray):
    """Label a trajectory of observations as strategy 1-4, or None.

    The label combines two facts readable from the treasure tracks:
    which agent's treasure was fetched first (robot -> {1,3}, human ->
    {2,4}) and the room-to-agent assignment (human carries the room-0
    treasure -> {1,2}, else {3,4}).  Uncarried treasures never move, so
    the first frame where a treasure leaves its spawn marks its pickup,
    and at that frame it coincides with its carrier.
    """
    obs_traj = np.asarray(obs_traj)
    if obs_traj.ndim != 2 or obs_traj.shape[0] == 0 or obs_traj.shape[1] != 10:
        return None
    spawn = obs_traj[0]
    first: list = [None, None]
    carrier = [None, None]
    for j, col in ((0, 4), (1, 6)):
        moved = np.abs(obs_traj[:, col:col + 2] - spawn[col:col + 2]).max(axis=1) > 1e-9
        idx = np.nonzero(moved)[0]
        if idx.size == 0:
            continue
        t = int(idx[0])
        first[j] = t
        dh = np.abs(obs_traj[t, col:col + 2] - obs_traj[t, 0:2]).max()
        dr = np.abs(obs_traj[t, col:col + 2] - obs_traj[t, 2:4]).max()
        carrier[j] = HUMAN if dh <= dr else ROBOT
    picked = [j for j in (0, 1) if first[j] is not None]
    if not picked:
        return None
    # ties broken toward treasure 0 (simultaneous pickups are degenerate)
    first_j = min(picked, key=lambda j: (first[j], j))
    robot_first = carrier[first_j] == ROBOT
    nominal = any(carrier[j] == (HUMAN if j == 0 else ROBOT) for j in picked)
    return (1 if robot_first else 2) + (0 if nominal else 2)
