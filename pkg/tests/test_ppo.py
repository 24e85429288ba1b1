import numpy as np
import pytest

from cogail.demos import history_window
from cogail.env import FetchQuestEnv, Layout
from cogail.models import CodeSampler, CoPolicy
from cogail.nn import Adam, gaussian_logprob
from cogail.ppo import (PPOConfig, RolloutBuffer, collect_rollouts,
                        compute_gae, ppo_update)
from cogail.rngs import T_INIT, derive_rng


def make_policy(seed=0):
    return CoPolicy(derive_rng(seed, T_INIT))


def filled_buffer(capacity=600, workers=4, seed=0):
    env = FetchQuestEnv(Layout())
    policy = make_policy(seed)
    buf = RolloutBuffer(capacity)
    stats = collect_rollouts(env, policy, CodeSampler(), buf,
                             seed=seed, episode=0, workers=workers)
    return env, policy, buf, stats


def test_ppo_config_validation():
    PPOConfig().validate()
    with pytest.raises(ValueError):
        PPOConfig(gamma=1.0).validate()
    with pytest.raises(ValueError):
        PPOConfig(clip=0.0).validate()


# ------------------------------------------------------------- collection

def test_collect_fills_to_capacity():
    _, _, buf, stats = filled_buffer()
    assert len(buf) == buf.capacity == 600
    assert buf.full
    assert stats["episodes_finished"] >= 0
    # every block boundary ends an episode one way or the other
    per_lane = 600 // 4
    for w in range(4):
        last = (w + 1) * per_lane - 1
        assert buf.dones[last] or buf.truncs[last]


def test_collect_episode_lengths_partition_buffer():
    _, _, buf, _ = filled_buffer()
    ends = np.flatnonzero(buf.dones | buf.truncs)
    lengths = np.diff(np.concatenate([[-1], ends]))
    assert lengths.sum() == len(buf)
    assert np.all(lengths >= 1)


def test_collect_constant_z_within_episode():
    _, _, buf, _ = filled_buffer()
    start = 0
    for end in np.flatnonzero(buf.dones | buf.truncs):
        seg = buf.z[start:end + 1]
        assert np.all(seg == seg[0])
        start = end + 1


def test_collect_z_from_grid_sampler():
    _, _, buf, _ = filled_buffer()
    centers = CodeSampler().centers
    for z in buf.z:
        d = np.linalg.norm(centers - z, axis=1).min()
        assert d <= 0.2 * np.sqrt(2) + 1e-12


def test_stored_logprob_matches_recomputation():
    _, policy, buf, _ = filled_buffer()
    obs_z = buf.obs_z()
    mean, _ = policy.mean_value(obs_z)
    lp = gaussian_logprob(mean, policy.head.log_std.data, buf.actions)
    assert np.allclose(lp, buf.logprobs, atol=1e-10)


def test_stored_value_matches_critic():
    _, policy, buf, _ = filled_buffer()
    _, values = policy.mean_value(buf.obs_z())
    assert np.allclose(values, buf.values, atol=1e-12)


def test_collect_windows_match_reference_builder():
    _, _, buf, _ = filled_buffer()
    # reconstruct each episode segment and compare windows
    start = 0
    checked = 0
    for end in np.flatnonzero(buf.dones | buf.truncs):
        obs = buf.obs[start:end + 1]
        ah = np.clip(buf.actions[start:end + 1, :2], -1.0, 1.0)
        for t in range(0, end + 1 - start):
            want = history_window(obs, ah, t)
            assert np.allclose(buf.windows[start + t], want, atol=1e-12)
            checked += 1
        start = end + 1
    assert checked == len(buf)


def test_collect_deterministic():
    _, _, a, _ = filled_buffer(seed=3)
    _, _, b, _ = filled_buffer(seed=3)
    assert np.array_equal(a.actions, b.actions)
    assert np.array_equal(a.obs, b.obs)
    assert np.array_equal(a.z, b.z)
    _, _, c, _ = filled_buffer(seed=4)
    assert not np.array_equal(a.actions, c.actions)


def test_collect_rejects_bad_shapes():
    env = FetchQuestEnv(Layout())
    policy = make_policy()
    with pytest.raises(ValueError):
        collect_rollouts(env, policy, CodeSampler(), RolloutBuffer(601),
                         seed=0, episode=0, workers=4)
    buf = RolloutBuffer(8)
    buf.add(np.zeros(10), np.zeros(2), np.zeros(52), np.zeros(4), 0, 0, 0, False)
    with pytest.raises(ValueError):
        collect_rollouts(env, policy, CodeSampler(), buf,
                         seed=0, episode=0, workers=4)


def test_buffer_sample_batch_shapes_and_clamped():
    _, _, buf, _ = filled_buffer()
    batch = buf.sample_batch(64, np.random.default_rng(0))
    assert batch["obs"].shape == (64, 10)
    assert batch["ah"].shape == (64, 2) and batch["ar"].shape == (64, 2)
    assert batch["windows"].shape == (64, 52)
    assert batch["z"].shape == (64, 2)
    assert np.all(np.abs(batch["ah"]) <= 1.0)
    assert np.all(np.abs(batch["ar"]) <= 1.0)


# -------------------------------------------------------------------- GAE

def gae_buffer(rewards, values, dones, truncs=None, bootstraps=None):
    n = len(rewards)
    buf = RolloutBuffer(n)
    truncs = truncs or [False] * n
    bootstraps = bootstraps or [0.0] * n
    for i in range(n):
        buf.add(np.zeros(10), np.zeros(2), None, np.zeros(4), 0.0,
                values[i], rewards[i], dones[i], trunc=truncs[i],
                bootstrap=bootstraps[i])
    return buf


def test_gae_single_terminal_step():
    buf = gae_buffer([2.0], [0.7], [True])
    compute_gae(buf, 0.99, 0.95)
    assert buf.returns[0] == pytest.approx(2.0)          # adv_raw + value
    # normalized advantage of a single sample is 0
    assert buf.advantages[0] == pytest.approx(0.0, abs=1e-6)


def test_gae_gamma_zero():
    buf = gae_buffer([1.0, 2.0, 3.0], [0.5, 0.5, 0.5], [False, False, True])
    compute_gae(buf, 0.0, 0.95)
    raw = buf.returns[:3] - buf.values[:3]
    assert np.allclose(raw, [0.5, 1.5, 2.5])


def test_gae_hand_recursion():
    gamma, lam = 0.99, 0.95
    buf = gae_buffer([1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [False, False, True])
    compute_gae(buf, gamma, lam)
    d3 = 1.0
    d2 = 1.0 + gamma * 0.0 - 0.0
    a3 = d3
    a2 = d2 + gamma * lam * a3
    a1 = d2 + gamma * lam * a2
    raw = buf.returns[:3] - buf.values[:3]
    assert np.allclose(raw, [a1, a2, a3], atol=1e-12)


def test_gae_truncation_bootstraps():
    gamma = 0.99
    buf = gae_buffer([1.0], [0.2], [False], truncs=[True], bootstraps=[3.0])
    compute_gae(buf, gamma, 0.95)
    assert buf.returns[0] - buf.values[0] == pytest.approx(1.0 + gamma * 3.0 - 0.2)


def test_gae_no_leak_across_episode_boundary():
    gamma, lam = 0.99, 0.95
    # two one-step episodes; the first advantage must not see the second
    buf = gae_buffer([1.0, 100.0], [0.0, 0.0], [True, True])
    compute_gae(buf, gamma, lam)
    raw = buf.returns[:2] - buf.values[:2]
    assert raw[0] == pytest.approx(1.0)
    assert raw[1] == pytest.approx(100.0)


def test_gae_normalization_invariant():
    _, policy, buf, _ = filled_buffer()
    buf.rewards[:len(buf)] = np.random.default_rng(5).uniform(0, 1, len(buf))
    compute_gae(buf, 0.99, 0.95)
    adv = buf.advantages[:len(buf)]
    assert abs(adv.mean()) < 1e-6
    assert abs(adv.std() - 1.0) < 1e-6


# -------------------------------------------------------------- ppo update

def test_ppo_ratio_one_surrogate_is_mean_advantage():
    _, policy, buf, _ = filled_buffer()
    buf.rewards[:len(buf)] = 0.5
    compute_gae(buf, 0.99, 0.95)
    cfg = PPOConfig(epochs=1, minibatch=len(buf))
    opt = Adam(policy.params(), lr=0.0)   # zero lr: params frozen
    metrics = ppo_update(policy, opt, buf, cfg, seed=0, episode=0, lr=0.0)
    # with unchanged params the ratio is exactly 1, surrogate = mean(adv) ~ 0
    assert metrics["ppo_surrogate"] == pytest.approx(0.0, abs=1e-8)
    assert metrics["value_loss"] >= 0.0


def test_ppo_clip_arithmetic():
    # the clipped branch engages for ratio 1.5, clip 0.2, positive advantage
    ratio, clip, adv = 1.5, 0.2, 2.0
    assert min(ratio * adv, np.clip(ratio, 1 - clip, 1 + clip) * adv) == 1.2 * adv


def test_ppo_update_moves_params_and_reports_finite():
    _, policy, buf, _ = filled_buffer()
    buf.rewards[:len(buf)] = np.random.default_rng(6).uniform(0, 1, len(buf))
    compute_gae(buf, 0.99, 0.95)
    cfg = PPOConfig(epochs=2, minibatch=128)
    opt = Adam(policy.params(), lr=3e-4)
    before = [p.data.copy() for p in policy.params()]
    metrics = ppo_update(policy, opt, buf, cfg, seed=1, episode=0, lr=3e-4)
    assert all(np.isfinite(v) for v in metrics.values())
    assert any(not np.array_equal(p.data, b)
               for p, b in zip(policy.params(), before))


def test_ppo_update_deterministic():
    def run():
        _, policy, buf, _ = filled_buffer(seed=9)
        buf.rewards[:len(buf)] = 0.25
        compute_gae(buf, 0.99, 0.95)
        opt = Adam(policy.params(), lr=3e-4)
        ppo_update(policy, opt, buf, PPOConfig(epochs=2, minibatch=128),
                   seed=9, episode=0, lr=3e-4)
        return np.concatenate([p.data.reshape(-1) for p in policy.params()])

    assert np.array_equal(run(), run())
