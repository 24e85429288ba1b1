from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cogail.env import (HUMAN, NONE, ROBOT, EnvState, EpisodeDone,
                        FetchQuestEnv, Layout, ReachGoalTask, layout_hash,
                        mirror_point)


@pytest.fixture(scope="module")
def env():
    return FetchQuestEnv(Layout())


def test_layout_validation():
    Layout().validate()
    with pytest.raises(ValueError):
        Layout(buttons=((0.8, 7.2), (5.4, 0.8))).validate()  # button inside room
    with pytest.raises(ValueError):
        Layout(speed_scale=0.0).validate()


def test_layout_hash_stable_and_sensitive():
    assert layout_hash(Layout()) == layout_hash(Layout())
    assert layout_hash(Layout()) != layout_hash(Layout(speed_scale=0.2))


def test_reset_deterministic(env):
    a, b = env.reset(0), env.reset(0)
    assert a == b
    assert a != env.reset(1)


def test_reset_jitter_bounds(env):
    lay = env.layout
    for seed in range(1000):
        s = env.reset(seed)
        for pos, nominal in ((s.human, lay.starts[0]), (s.robot, lay.starts[1])):
            assert abs(pos[0] - nominal[0]) <= lay.start_jitter
            assert abs(pos[1] - nominal[1]) <= lay.start_jitter


def test_reset_initial_flags(env):
    s = env.reset(3)
    assert s.door_open == (False, False)
    assert s.carrier == (NONE, NONE)
    assert s.step == 0 and not s.done and not s.success
    assert s.treasures == env.layout.treasure_spawns


def test_step_basic_motion(env):
    s = env.reset(0)
    s = replace(s, human=(4.0, 4.0))
    s2, done, success = env.step(s, (1.0, 0.0), (0.0, 0.0))
    assert s2.human == pytest.approx((4.15, 4.0))
    assert not done and not success


def test_action_clamped_on_ingestion(env):
    s = replace(env.reset(0), human=(4.0, 4.0))
    s2, _, _ = env.step(s, (5.0, -99.0), (0.0, 0.0))
    assert s2.human == pytest.approx((4.15, 3.85))


def test_closed_door_blocks_entry(env):
    # just outside room 0's door segment, pushing in
    s = replace(env.reset(0), human=(1.7, 6.8))
    s2, _, _ = env.step(s, (-1.0, 0.0), (0.0, 0.0))
    assert s2.human[0] == pytest.approx(1.7)   # x move cancelled
    s3, _, _ = env.step(s, (-1.0, 0.5), (0.0, 0.0))
    assert s3.human == pytest.approx((1.7, 6.875))  # y still free


def test_open_door_admits_entry(env):
    s = replace(env.reset(0), human=(1.7, 6.8), robot=env.layout.buttons[0],
                door_open=(True, True))
    s2, _, _ = env.step(s, (-1.0, 0.0), (0.0, 0.0))
    assert s2.human[0] == pytest.approx(1.55)


def test_wall_blocks_even_with_door_open(env):
    # pushing through the top part of room 0's right wall, above the door span
    s = replace(env.reset(0), human=(1.7, 7.6), door_open=(True, True))
    s2, _, _ = env.step(s, (-1.0, 0.0), (0.0, 0.0))
    assert s2.human[0] == pytest.approx(1.7)


def test_exit_through_closed_door_allowed(env):
    s = replace(env.reset(0), human=(1.5, 6.8))  # inside room 0
    s2, _, _ = env.step(s, (1.0, 0.0), (0.0, 0.0))
    assert s2.human[0] == pytest.approx(1.65)
    assert not s2.door_open[0]


def test_doorless_wall_blocks_exit(env):
    s = replace(env.reset(0), human=(0.8, 6.5))  # inside room 0, above bottom wall
    s2, _, _ = env.step(s, (0.0, -1.0), (0.0, 0.0))
    assert s2.human[1] == pytest.approx(6.5)


def test_door_opens_while_on_button(env):
    lay = env.layout
    bx, by = lay.buttons[0]
    s = replace(env.reset(0), human=(bx - 0.5, by))
    s2, _, _ = env.step(s, (1.0, 0.0), (0.0, 0.0))
    assert s2.door_open[0]
    # walk away -> door closes again (held, not latched)
    s3 = s2
    for _ in range(8):
        s3, _, _ = env.step(s3, (1.0, 0.0), (0.0, 0.0))
    assert not s3.door_open[0]


def test_pickup_requires_room_and_empty_hand(env):
    lay = env.layout
    t0 = lay.treasure_spawns[0]
    inside = replace(env.reset(0), human=(t0[0] + 0.2, t0[1]))
    s2, _, _ = env.step(inside, (0.0, 0.0), (0.0, 0.0))
    assert s2.carrier[0] == HUMAN
    assert s2.treasures[0] == s2.human
    # a second treasure cannot be picked by the same agent
    s3 = replace(s2, human=(lay.treasure_spawns[1][0], lay.treasure_spawns[1][1]))
    s4, _, _ = env.step(s3, (0.0, 0.0), (0.0, 0.0))
    assert s4.carrier[1] == NONE


def test_pickup_blocked_outside_room(env):
    # nearness without being inside the room does not pick up; with the
    # default layout the treasure is deep enough that this needs a
    # custom spawn near the door plane
    lay = replace(Layout(), treasure_spawns=((1.55, 6.8), (6.45, 1.2)))
    e = FetchQuestEnv(lay)
    s = replace(e.reset(0), human=(1.75, 6.8))   # outside, within 0.3
    s2, _, _ = e.step(s, (0.0, 0.0), (0.0, 0.0))
    assert s2.carrier[0] == NONE


def test_carried_treasure_tracks_carrier(env):
    t0 = env.layout.treasure_spawns[0]
    s = replace(env.reset(0), human=(t0[0] + 0.2, t0[1]))
    s, _, _ = env.step(s, (0.0, 0.0), (0.0, 0.0))
    s, _, _ = env.step(s, (0.0, 1.0), (0.0, 0.0))
    assert s.treasures[0] == s.human


def test_success_requires_distinct_zones(env):
    lay = env.layout
    da, db = lay.destinations
    base = env.reset(0)
    s = replace(base, human=da, robot=db, carrier=(HUMAN, ROBOT),
                treasures=(da, db))
    s2, done, success = env.step(s, (0.0, 0.0), (0.0, 0.0))
    assert success and done
    # same zone -> no success
    s = replace(base, human=da, robot=(da[0] + 0.1, da[1]),
                carrier=(HUMAN, ROBOT), treasures=(da, da))
    _, _, success = env.step(s, (0.0, 0.0), (0.0, 0.0))
    assert not success


def test_success_needs_both_carriers(env):
    da, db = env.layout.destinations
    s = replace(env.reset(0), human=da, robot=db, carrier=(HUMAN, NONE))
    _, _, success = env.step(s, (0.0, 0.0), (0.0, 0.0))
    assert not success


def test_step_after_done_raises(env):
    s = replace(env.reset(0), done=True)
    with pytest.raises(EpisodeDone):
        env.step(s, (0, 0), (0, 0))


def test_time_limit(env):
    s = env.reset(0)
    for _ in range(env.layout.max_steps):
        s, done, success = env.step(s, (0.0, 0.0), (0.0, 0.0))
    assert done and not success and s.step == env.layout.max_steps


def test_observe_layout(env):
    s = replace(env.reset(0), human=(4.0, 4.0), door_open=(True, False))
    obs = env.observe(s)
    assert obs.shape == (10,)
    assert obs[0] == obs[1] == 0.5
    assert obs[8] == 1.0 and obs[9] == 0.0
    assert np.array_equal(obs, env.observe(s))
    assert np.all((obs >= 0) & (obs <= 1))


def test_determinism_bit_exact(env):
    rng = np.random.default_rng(4)
    actions = rng.uniform(-1, 1, (120, 4))

    def run():
        s = env.reset(9)
        trace = []
        for a in actions:
            s, done, _ = env.step(s, a[:2], a[2:])
            trace.append(env.observe(s))
            if done:
                break
        return np.array(trace)

    assert np.array_equal(run(), run())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 60))
def test_containment_and_no_teleport(seed, n_steps):
    env = FetchQuestEnv(Layout())
    rng = np.random.default_rng(seed)
    s = env.reset(seed)
    bound = env.layout.speed_scale * np.sqrt(2) + 1e-12
    for _ in range(n_steps):
        prev = s
        a = rng.uniform(-1.5, 1.5, 4)
        s, done, _ = env.step(s, a[:2], a[2:])
        for pos in (s.human, s.robot):
            assert 0.0 <= pos[0] <= 8.0 and 0.0 <= pos[1] <= 8.0
        for p, q in ((prev.human, s.human), (prev.robot, s.robot)):
            assert np.hypot(q[0] - p[0], q[1] - p[1]) <= bound
        # door semantics: held open iff someone is on the button
        lay = env.layout
        for i in range(2):
            near = any((pos[0] - lay.buttons[i][0]) ** 2
                       + (pos[1] - lay.buttons[i][1]) ** 2
                       <= lay.button_radius ** 2
                       for pos in (s.human, s.robot))
            assert s.door_open[i] == near
        if done:
            break


def test_mirror_point():
    assert mirror_point(Layout(), (1.0, 7.0)) == (7.0, 1.0)


def test_reach_goal_task_reward():
    task = ReachGoalTask(max_steps=10)
    s = task.reset(0)
    s2, r, done = task.step(s, (0.0, 0.0), (0.0, 0.0))
    assert 0.0 < r < 1.0 and not done
    # at the targets the reward is ~1
    s_at = replace(s2, human=task.targets[0], robot=task.targets[1])
    _, r_at, _ = task.step(s_at, (0.0, 0.0), (0.0, 0.0))
    assert r_at == pytest.approx(1.0, abs=1e-6)
