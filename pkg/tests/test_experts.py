import numpy as np
import pytest

from cogail.env import FetchQuestEnv, Layout, mirror_point
from cogail.experts import (ScriptedExpert, build_plans, classify_strategy,
                            run_episode)
from cogail.rngs import T_EXPERT, derive_rng


@pytest.fixture(scope="module")
def env():
    return FetchQuestEnv(Layout())


@pytest.fixture(scope="module")
def plans():
    return build_plans(Layout())


def _noiseless(plans, k):
    from dataclasses import replace
    return replace(plans[k], noise=0.0)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_noiseless_strategies_succeed(env, plans, k):
    expert = ScriptedExpert(_noiseless(plans, k))
    obs, ah, ar, success = run_episode(env, expert, seed=0,
                                       rng=derive_rng(0, T_EXPERT, k))
    assert success
    assert len(obs) < env.layout.max_steps
    assert classify_strategy(obs) == k


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_noisy_strategies_succeed_and_classify(env, plans, k):
    for seed in range(5):
        expert = ScriptedExpert(plans[k])
        obs, ah, ar, success = run_episode(env, expert, seed=seed,
                                           rng=derive_rng(seed, T_EXPERT, k))
        assert success
        assert classify_strategy(obs) == k


def test_actions_bounded(env, plans):
    expert = ScriptedExpert(plans[1])
    obs, ah, ar, _ = run_episode(env, expert, seed=2,
                                 rng=derive_rng(2, T_EXPERT, 1))
    for arr in (ah, ar):
        assert np.all(arr >= -1.0) and np.all(arr <= 1.0)


def test_episode_deterministic(env, plans):
    def run():
        expert = ScriptedExpert(plans[2])
        return run_episode(env, expert, seed=7, rng=derive_rng(7, T_EXPERT, 2))

    a, b = run(), run()
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])
    assert np.array_equal(a[2], b[2])


def test_at_waypoint_command_is_noise_only(env, plans):
    # an agent parked on its current waypoint gets only the noise term
    from dataclasses import replace as drep
    from cogail.experts import PlanStep
    plan = _noiseless(plans, 1)
    hold = drep(plan, human_steps=(PlanStep((3.0, 4.0), ("arrive",)),),
                robot_steps=(PlanStep((5.0, 4.0), ("arrive",)),))
    expert = ScriptedExpert(hold)
    s = env.reset(None)  # no jitter: exactly at starts
    aH, aR = expert.act(s, derive_rng(0, T_EXPERT))
    assert np.allclose(aH, 0.0) and np.allclose(aR, 0.0)


def test_mirrored_plan_waypoints(plans):
    lay = Layout()
    for a, b in ((1, 3), (2, 4)):
        for side in ("human_steps", "robot_steps"):
            src = getattr(plans[a], side)
            dst = getattr(plans[b], side)
            assert len(src) == len(dst)
            for s_step, d_step in zip(src, dst):
                assert d_step.waypoint == pytest.approx(
                    mirror_point(lay, s_step.waypoint))


@pytest.mark.parametrize("src,dst", [(1, 2), (3, 4)])
def test_trajectory_symmetry(env, plans, src, dst):
    # mirroring positions and swapping roles maps one strategy's noiseless
    # trajectory onto its partner's, because the map is point-symmetric
    lay = env.layout
    obs_a, ah_a, ar_a, ok_a = run_episode(env, ScriptedExpert(_noiseless(plans, src)),
                                          seed=None, rng=derive_rng(0, T_EXPERT))
    obs_b, ah_b, ar_b, ok_b = run_episode(env, ScriptedExpert(_noiseless(plans, dst)),
                                          seed=None, rng=derive_rng(0, T_EXPERT))
    assert ok_a and ok_b and len(obs_a) == len(obs_b)
    # positions: human_a == mirror(robot_b), robot_a == mirror(human_b)
    h_a, r_a = obs_a[:, 0:2] * 8.0, obs_a[:, 2:4] * 8.0
    h_b, r_b = obs_b[:, 0:2] * 8.0, obs_b[:, 2:4] * 8.0
    assert np.max(np.abs(h_a - (8.0 - r_b))) <= 1e-9
    assert np.max(np.abs(r_a - (8.0 - h_b))) <= 1e-9
    assert np.max(np.abs(ah_a - (-ar_b))) <= 1e-9
    assert np.max(np.abs(ar_a - (-ah_b))) <= 1e-9


def test_classify_unknown_on_no_pickup(env):
    s = env.reset(0)
    obs = np.stack([env.observe(s)] * 5)
    assert classify_strategy(obs) is None
    assert classify_strategy(np.zeros((3, 7))) is None


def test_classify_resampling_invariant(env, plans):
    expert = ScriptedExpert(plans[1])
    obs, _, _, _ = run_episode(env, expert, seed=3, rng=derive_rng(3, T_EXPERT, 1))
    label = classify_strategy(obs)
    assert label == 1
    assert classify_strategy(obs[::2]) == label
    assert classify_strategy(obs[::3]) == label
