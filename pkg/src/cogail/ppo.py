"""On-policy optimization: rollout storage, advantage estimation, updates.

Collection runs a fixed number of lanes in lockstep (one process, batched
network forwards) and writes each lane's transitions as one contiguous
block, so episodes never interleave and runs are bit-reproducible.
"""

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .demos import WINDOW_DIM, WindowTracker
from .models import ACTION_DIM, CODE_DIM, OBS_DIM
from .nn import GradientError, clip_global_norm
from .rngs import T_ACTION, T_BATCH, T_CODE, T_RESET, derive_rng


@dataclass
class PPOConfig:
    lr: float = 3e-4
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip: float = 0.2
    epochs: int = 10
    minibatch: int = 256
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    grad_norm_clip: float = 0.5

    def validate(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0,1)")
        if self.clip <= 0.0:
            raise ValueError("clip must be positive")
        if self.epochs < 1 or self.minibatch < 1:
            raise ValueError("epochs and minibatch must be positive")
        return self


class RolloutBuffer:
    """Fixed-capacity transition store for one collection phase.

    `dones` marks terminal steps; `truncs` marks lane-end cuts whose value
    is bootstrapped from `bootstraps`.  Actions are stored pre-clamp so the
    saved logprob is the exact density of the saved sample.
    """

    def __init__(self, capacity: int, obs_dim: int = OBS_DIM,
                 z_dim: int = CODE_DIM, action_dim: int = ACTION_DIM,
                 window_dim: int = WINDOW_DIM):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.z = np.zeros((capacity, z_dim))
        self.windows = np.zeros((capacity, window_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.logprobs = np.zeros(capacity)
        self.values = np.zeros(capacity)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity, dtype=bool)
        self.truncs = np.zeros(capacity, dtype=bool)
        self.bootstraps = np.zeros(capacity)
        self.advantages = np.zeros(capacity)
        self.returns = np.zeros(capacity)
        self.ptr = 0

    def __len__(self):
        return self.ptr

    @property
    def full(self) -> bool:
        return self.ptr >= self.capacity

    def add(self, obs, z, window, action, logprob, value, reward,
            done: bool, trunc: bool = False, bootstrap: float = 0.0):
        if self.full:
            raise ValueError("buffer full")
        i = self.ptr
        self.obs[i] = obs
        self.z[i] = z
        if window is not None:
            self.windows[i] = window
        self.actions[i] = action
        self.logprobs[i] = logprob
        self.values[i] = value
        self.rewards[i] = reward
        self.dones[i] = done
        self.truncs[i] = trunc
        self.bootstraps[i] = bootstrap
        self.ptr += 1

    def obs_z(self) -> np.ndarray:
        return np.concatenate([self.obs[:self.ptr], self.z[:self.ptr]], axis=1)

    def sample_batch(self, size: int, rng) -> dict:
        """Uniform transition sample with env-executed (clamped) actions."""
        idx = rng.integers(0, self.ptr, size)
        act = np.clip(self.actions[idx], -1.0, 1.0)
        return {
            "obs": self.obs[idx],
            "ah": act[:, :2],
            "ar": act[:, 2:],
            "windows": self.windows[idx],
            "z": self.z[idx],
        }


def collect_rollouts(env, policy, sampler, buffer: RolloutBuffer, *,
                     seed: int, episode: int, workers: int = 20) -> dict:
    """Fill the buffer with co-policy rollouts under per-episode codes.

    Lane w owns the contiguous block [w*L, (w+1)*L) of the buffer; its last
    episode is cut at the block boundary and bootstrapped with the critic.
    """
    if buffer.ptr != 0:
        raise ValueError("buffer must be empty")
    if buffer.capacity % workers != 0:
        raise ValueError("capacity %d not divisible by %d workers"
                         % (buffer.capacity, workers))
    per_lane = buffer.capacity // workers
    code_rng = derive_rng(seed, T_CODE, episode)
    lane_rngs = [derive_rng(seed, T_ACTION, episode, w) for w in range(workers)]

    def env_seed(w, k):
        return int(np.random.SeedSequence(
            (seed, T_RESET, episode, w, k)).generate_state(1)[0])

    lengths = []
    n_done = 0
    for w in range(workers):
        k = 0
        state = env.reset(env_seed(w, k))
        z = sampler.sample(code_rng)
        obs = env.observe(state)
        tracker = WindowTracker()
        tracker.push_obs(obs)
        ep_len = 0
        for t in range(per_lane):
            window = tracker.window()
            aH, aR, logprob, value = policy.act(obs, z, rng=lane_rngs[w])
            state, done, success = env.step(state, aH, aR)
            ep_len += 1
            action = np.concatenate([aH, aR])
            last_slot = t == per_lane - 1
            if done:
                if success:
                    buffer.add(obs, z, window, action, logprob, value, 0.0,
                               True)
                else:
                    # step-limit cut, not a real terminal: bootstrap so the
                    # value targets stay consistent across the horizon
                    next_obs = env.observe(state)
                    _, v_next = policy.mean_value(
                        np.concatenate([next_obs, z])[None])
                    buffer.add(obs, z, window, action, logprob, value, 0.0,
                               False, trunc=True, bootstrap=float(v_next[0]))
                lengths.append(ep_len)
                n_done += 1
                ep_len = 0
                if not last_slot:
                    k += 1
                    state = env.reset(env_seed(w, k))
                    z = sampler.sample(code_rng)
                    obs = env.observe(state)
                    tracker.reset()
                    tracker.push_obs(obs)
            else:
                next_obs = env.observe(state)
                if last_slot:
                    _, v_next = policy.mean_value(
                        np.concatenate([next_obs, z])[None])
                    buffer.add(obs, z, window, action, logprob, value, 0.0,
                               False, trunc=True, bootstrap=float(v_next[0]))
                    lengths.append(ep_len)
                else:
                    buffer.add(obs, z, window, action, logprob, value, 0.0,
                               False)
                    tracker.push_action(np.clip(aH, -1.0, 1.0))
                    tracker.push_obs(next_obs)
                    obs = next_obs
    return {"episodes_finished": n_done, "mean_length": float(np.mean(lengths))}


def compute_gae(buffer: RolloutBuffer, gamma: float, lam: float):
    """Generalized advantage estimation with per-episode resets.

    Advantages are normalized in place; returns stay on the raw scale.
    """
    n = buffer.ptr
    adv = np.zeros(n)
    gae = 0.0
    for t in range(n - 1, -1, -1):
        if buffer.dones[t]:
            gae = buffer.rewards[t] - buffer.values[t]
        elif buffer.truncs[t]:
            gae = (buffer.rewards[t] + gamma * buffer.bootstraps[t]
                   - buffer.values[t])
        else:
            delta = (buffer.rewards[t] + gamma * buffer.values[t + 1]
                     - buffer.values[t])
            gae = delta + gamma * lam * gae
        adv[t] = gae
    buffer.returns[:n] = adv + buffer.values[:n]
    mu = adv.mean()
    sigma = adv.std()
    buffer.advantages[:n] = (adv - mu) / (sigma + 1e-8)


def ppo_update(policy, optimizer, buffer: RolloutBuffer, cfg: PPOConfig,
               *, seed: int, episode: int, lr: float) -> dict:
    """Clipped-surrogate epochs over shuffled minibatches."""
    optimizer.lr = lr
    n = buffer.ptr
    obs_z = buffer.obs_z()
    actions = buffer.actions[:n]
    old_logprob = buffer.logprobs[:n]
    adv = buffer.advantages[:n]
    returns = buffer.returns[:n].reshape(-1, 1)
    params = policy.params()

    surrogates, value_losses, entropies = [], [], []
    for epoch in range(cfg.epochs):
        order = derive_rng(seed, T_BATCH, episode, epoch).permutation(n)
        for start in range(0, n, cfg.minibatch):
            mb = order[start:start + cfg.minibatch]
            lp, value, entropy = policy.logprob_value(obs_z[mb], actions[mb])
            ratio = ad.exp(lp - old_logprob[mb])
            adv_mb = Tensor(adv[mb])
            clipped = ad.clip(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip)
            surrogate = ad.tmean(ad.minimum(ratio * adv_mb, clipped * adv_mb))
            v_loss = ad.tmean(ad.square(value - returns[mb]))
            loss = (ad.neg(surrogate) + v_loss * cfg.value_coef
                    + entropy * (-cfg.entropy_coef))
            if not np.isfinite(float(loss.data)):
                raise GradientError("non-finite PPO loss (episode %d epoch %d)"
                                    % (episode, epoch))
            optimizer.zero_grad()
            ad.backward(loss, params)
            clip_global_norm(params, cfg.grad_norm_clip)
            optimizer.step()
            policy.head.clamp()
            surrogates.append(float(surrogate.data))
            value_losses.append(float(v_loss.data))
            entropies.append(float(entropy.data))
    return {
        "ppo_surrogate": float(np.mean(surrogates)),
        "value_loss": float(np.mean(value_losses)),
        "entropy": float(np.mean(entropies)),
    }
