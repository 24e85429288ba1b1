"""Training modes, checkpoint bundles, and the run loop.

Five modes share one entry point: the adversarial co-policy family
(cogail, mainfogail, magail) runs the collect / inner-update / on-policy
cycle; bc_single regresses the robot head on demo actions; bc_gail learns
a human clone first and then a robot-only adversarial policy against it.
"""

import json
import os
import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import autodiff as ad
from .checkpoint import load_checkpoint, save_checkpoint
from .demos import DemoDataset
from .env import ENV_VERSION, FetchQuestEnv, Layout, ReachGoalTask, layout_hash
from .models import (CODE_DIM, OBS_DIM, CodeSampler, CoPolicy, Discriminator,
                     StrategyRecognizer, combined_update, disc_loss,
                     gail_reward)
from .nn import MLP, Adam
from .ppo import (PPOConfig, RolloutBuffer, collect_rollouts, compute_gae,
                  ppo_update)
from .rngs import (T_ACTION, T_BATCH, T_INIT, T_RESET, T_SHUFFLE,
                   T_WARMSTART, derive_rng)

MODES = ("cogail", "mainfogail", "magail", "bc_single", "bc_gail")
GAIL_MODES = ("cogail", "mainfogail", "magail")
METRIC_FIELDS = ("episode", "disc_loss", "L_z", "L_a", "ppo_surrogate",
                 "value_loss", "mean_reward", "lr", "wall_time")


@dataclass
class TrainConfig:
    mode: str = "cogail"
    episodes: int = 200
    steps_per_episode: int = 6000
    lam1: float = 1.0
    lam2: float = 0.5
    seed: int = 300
    disc_mode: str = "cross_entropy"
    checkpoint_interval: int = 10
    inner_steps: int = 10
    inner_batch: int = 256
    workers: int = 20
    log_std_init: float = -1.9
    warmstart_epochs: int = 150
    bc_lr: float = 1e-3
    bc_epochs: int = 100

    def validate(self):
        if self.mode not in MODES:
            raise ValueError("unknown mode %r" % (self.mode,))
        if self.episodes < 1 or self.steps_per_episode < 1:
            raise ValueError("episodes and steps_per_episode must be positive")
        if self.steps_per_episode % self.workers != 0:
            raise ValueError("steps_per_episode must divide into workers")
        if self.lam1 < 0 or self.lam2 < 0:
            raise ValueError("lambda weights must be non-negative")
        if self.checkpoint_interval < 1:
            raise ValueError("checkpoint_interval must be positive")
        if self.warmstart_epochs < 0:
            raise ValueError("warmstart_epochs must be non-negative")
        return self

    def effective_lambdas(self):
        """Per-mode loss weights; flags outside the mode are ignored."""
        if self.mode == "cogail":
            return self.lam1, self.lam2
        if self.mode == "mainfogail":
            return self.lam1, 0.0
        return 0.0, 0.0


# ----------------------------------------------------------------- bundles

class PolicyBundle:
    """A loaded checkpoint: the nets plus enough metadata to drive them."""

    def __init__(self, mode: str, layout: Layout, policy: CoPolicy,
                 recognizer=None, discriminator=None, human_bc=None, meta=None):
        self.mode = mode
        self.layout = layout
        self.policy = policy
        self.recognizer = recognizer
        self.discriminator = discriminator
        self.human_bc = human_bc
        self.meta = meta or {}

    def code_estimate(self, window) -> np.ndarray:
        if self.recognizer is None:
            return np.zeros(CODE_DIM)
        return self.recognizer.transform(np.asarray(window))

    def joint_action(self, obs, z) -> np.ndarray:
        """Deterministic 4-dim action for a given strategy code."""
        if self.policy.in_dim != OBS_DIM + CODE_DIM:
            raise ValueError("mode %r has no code-conditioned joint policy"
                             % (self.mode,))
        x = np.concatenate([np.asarray(obs, float), np.asarray(z, float)])
        mean, _ = self.policy.mean_value(x[None])
        return np.clip(mean[0], -1.0, 1.0)

    def robot_action(self, obs, window) -> np.ndarray:
        """Deterministic robot action from live history (no demo robot data)."""
        obs = np.asarray(obs, float)
        if self.mode == "bc_gail":
            mean, _ = self.policy.mean_value(obs[None])
            return np.clip(mean[0], -1.0, 1.0)
        if self.mode == "bc_single":
            z = np.zeros(CODE_DIM)
        else:
            z = self.code_estimate(window)
        return self.joint_action(obs, z)[2:]

    def human_action(self, obs) -> np.ndarray:
        if self.human_bc is None:
            raise ValueError("bundle has no behavior-cloned human policy")
        return np.clip(self.human_bc.forward_np(np.asarray(obs, float)), -1.0, 1.0)


def save_bundle(path, bundle: PolicyBundle, episode: int, cfg: TrainConfig):
    meta = {
        "kind": "cogail-checkpoint",
        "mode": bundle.mode,
        "episode": episode,
        "seed": cfg.seed,
        "env_version": ENV_VERSION,
        "layout_hash": layout_hash(bundle.layout),
        "layout": json.loads(bundle.layout.to_json()),
        "disc_mode": cfg.disc_mode,
        "lam1": cfg.lam1,
        "lam2": cfg.lam2,
        "log_std_init": cfg.log_std_init,
        "policy_in_dim": bundle.policy.in_dim,
        "policy_action_dim": bundle.policy.action_dim,
        "components": [],
    }
    arrays = bundle.policy.state_arrays("policy")
    meta["components"].append("policy")
    if bundle.recognizer is not None:
        arrays.update(bundle.recognizer.state_arrays("recognizer"))
        meta["components"].append("recognizer")
    if bundle.discriminator is not None:
        arrays.update(bundle.discriminator.state_arrays("disc"))
        meta["disc_in_dim"] = bundle.discriminator.in_dim
        meta["components"].append("disc")
    if bundle.human_bc is not None:
        arrays.update(bundle.human_bc.state_arrays("human_bc"))
        meta["components"].append("human_bc")
    save_checkpoint(path, meta, arrays)


def load_bundle(path) -> PolicyBundle:
    meta, arrays = load_checkpoint(path)
    if meta.get("kind") != "cogail-checkpoint":
        raise ValueError("not a policy checkpoint: %s" % (path,))
    if meta.get("env_version") != ENV_VERSION:
        raise ValueError("checkpoint env version %r does not match %r"
                         % (meta.get("env_version"), ENV_VERSION))
    layout = Layout.from_dict(meta["layout"])
    rng = derive_rng(0, T_INIT)
    policy = CoPolicy(rng, in_dim=meta["policy_in_dim"],
                      action_dim=meta["policy_action_dim"])
    policy.load_state_arrays("policy", arrays)
    recognizer = discriminator = human_bc = None
    if "recognizer" in meta["components"]:
        recognizer = StrategyRecognizer(rng)
        recognizer.load_state_arrays("recognizer", arrays)
    if "disc" in meta["components"]:
        discriminator = Discriminator(rng, meta["disc_mode"],
                                      in_dim=meta.get("disc_in_dim", 14))
        discriminator.load_state_arrays("disc", arrays)
    if "human_bc" in meta["components"]:
        human_bc = _human_bc_net(rng)
        human_bc.load_state_arrays("human_bc", arrays)
    return PolicyBundle(meta["mode"], layout, policy, recognizer,
                        discriminator, human_bc, meta)


# ------------------------------------------------------------ run plumbing

class RunWriter:
    """Owns the output directory: metrics rows and checkpoint files."""

    def __init__(self, out_dir=None):
        self.out_dir = out_dir
        self.rows = []
        self.checkpoint_paths = []
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            self._metrics = open("%s/metrics.jsonl" % out_dir, "w")
        else:
            self._metrics = None

    def log(self, **row):
        row = {k: row.get(k, 0.0) for k in METRIC_FIELDS}
        self.rows.append(row)
        if self._metrics is not None:
            self._metrics.write(json.dumps(row, sort_keys=True) + "\n")
            self._metrics.flush()

    def maybe_checkpoint(self, bundle, episode, cfg):
        done = episode + 1 == cfg.episodes
        on_interval = (episode + 1) % cfg.checkpoint_interval == 0
        if self.out_dir is None or not (on_interval or done):
            return
        path = "%s/checkpoint_%05d.ckpt" % (self.out_dir, episode + 1)
        if path not in self.checkpoint_paths:
            save_bundle(path, bundle, episode + 1, cfg)
            self.checkpoint_paths.append(path)

    def close(self):
        if self._metrics is not None:
            self._metrics.close()


def _lr_at(base_lr: float, episode: int, episodes: int) -> float:
    return base_lr * (1.0 - episode / episodes)


def _warmstart_co_policy(policy: CoPolicy, recognizer, dataset: DemoDataset,
                         cfg: TrainConfig):
    """Supervised initialization of the co-policy before the adversarial loop.

    Regresses the joint actor mean at (s, z) onto the recorded joint action.
    The code input mirrors each mode's own latent machinery: cogail reads
    z = psi(h) and trains the recognizer jointly with the actor (the same
    auto-encoder path its L_a loss uses), while the baselines marginalize
    the actor over uniform codes and leave their recognizers to whatever
    their own losses do later.  The critic and the discriminator keep their
    random init.
    """
    if cfg.warmstart_epochs < 1:
        return
    rng = derive_rng(cfg.seed, T_WARMSTART)
    ground_psi = cfg.mode == "cogail"
    params = policy.actor.params()
    if ground_psi:
        params = params + recognizer.net.params()
    opt = Adam(params, cfg.bc_lr)
    total = sum(len(d) for d in dataset.demos)
    batches = max(1, total // cfg.inner_batch)
    for _ in range(cfg.warmstart_epochs):
        for _ in range(batches):
            batch = dataset.sample_batch(cfg.inner_batch, rng)
            if ground_psi:
                z = recognizer.forward(batch["windows"])
            else:
                z = rng.uniform(-1.0, 1.0, (len(batch["obs"]), CODE_DIM))
            mean = policy.joint_mean(batch["obs"], z)
            target = np.concatenate([batch["ah"], batch["ar"]], axis=1)
            loss = ad.tmean(ad.square(mean - target))
            ad.zero_grads(params)
            ad.backward(loss, params)
            opt.step()


# ------------------------------------------------------- adversarial modes

def train_gail_family(cfg: TrainConfig, ppo_cfg: PPOConfig,
                      dataset: DemoDataset, out_dir=None) -> PolicyBundle:
    """Algorithm: per episode, collect code-conditioned rollouts, run the
    inner recognition/reconstruction/discriminator steps, then the
    on-policy update with discriminator rewards."""
    cfg.validate()
    ppo_cfg.validate()
    layout = dataset.layout
    env = FetchQuestEnv(layout)
    rng_init = derive_rng(cfg.seed, T_INIT)
    policy = CoPolicy(rng_init, log_std_init=cfg.log_std_init)
    recognizer = StrategyRecognizer(rng_init)
    disc = Discriminator(rng_init, cfg.disc_mode)
    opt_policy = Adam(policy.params(), ppo_cfg.lr)
    opt_rec = Adam(recognizer.params(), ppo_cfg.lr)
    opt_disc = Adam(disc.params(), ppo_cfg.lr)
    sampler = CodeSampler()
    lam1, lam2 = cfg.effective_lambdas()
    bundle = PolicyBundle(cfg.mode, layout, policy, recognizer, disc)
    _warmstart_co_policy(policy, recognizer, dataset, cfg)
    writer = RunWriter(out_dir)
    start = time.time()

    for e in range(cfg.episodes):
        lr = _lr_at(ppo_cfg.lr, e, cfg.episodes)
        opt_policy.lr = opt_rec.lr = opt_disc.lr = lr
        buffer = RolloutBuffer(cfg.steps_per_episode)
        collect_rollouts(env, policy, sampler, buffer,
                         seed=cfg.seed, episode=e, workers=cfg.workers)

        inner_rng = derive_rng(cfg.seed, T_SHUFFLE, e)
        reports = []
        for _ in range(cfg.inner_steps):
            demo_batch = dataset.sample_batch(cfg.inner_batch, inner_rng)
            buf_batch = buffer.sample_batch(cfg.inner_batch, inner_rng)
            reports.append(combined_update(
                policy, recognizer, disc, opt_policy, opt_rec, opt_disc,
                demo_batch, buf_batch, lam1, lam2))

        act = np.clip(buffer.actions, -1.0, 1.0)
        buffer.rewards[:] = gail_reward(disc, buffer.obs, act[:, :2], act[:, 2:])
        compute_gae(buffer, ppo_cfg.gamma, ppo_cfg.gae_lambda)
        pm = ppo_update(policy, opt_policy, buffer, ppo_cfg,
                        seed=cfg.seed, episode=e, lr=lr)

        writer.log(episode=e,
                   disc_loss=float(np.mean([r["disc_loss"] for r in reports])),
                   L_z=float(np.mean([r["L_z"] for r in reports])),
                   L_a=float(np.mean([r["L_a"] for r in reports])),
                   ppo_surrogate=pm["ppo_surrogate"],
                   value_loss=pm["value_loss"],
                   mean_reward=float(buffer.rewards.mean()),
                   lr=lr, wall_time=time.time() - start)
        writer.maybe_checkpoint(bundle, e, cfg)
    writer.close()
    bundle.metrics = writer.rows
    bundle.checkpoint_paths = writer.checkpoint_paths
    return bundle


# --------------------------------------------------------------- BC modes

def _dataset_steps(dataset: DemoDataset):
    obs = np.concatenate([d.obs for d in dataset.demos])
    ah = np.concatenate([d.actions_h for d in dataset.demos])
    ar = np.concatenate([d.actions_r for d in dataset.demos])
    return obs, ah, ar


def _bc_epoch(net_forward, params, optimizer, inputs, targets, batch, rng):
    """One epoch of minibatch MSE regression; returns post-epoch full loss."""
    n = inputs.shape[0]
    order = rng.permutation(n)
    for start in range(0, n, batch):
        mb = order[start:start + batch]
        pred = net_forward(inputs[mb])
        loss = ad.tmean(ad.square(pred - targets[mb]))
        ad.zero_grads(params)
        ad.backward(loss, params)
        optimizer.step()
    final = net_forward(inputs)
    return float(ad.tmean(ad.square(final - targets)).data)


def train_bc_single(cfg: TrainConfig, dataset: DemoDataset,
                    out_dir=None) -> PolicyBundle:
    """Robot-head regression on demo (obs -> aR); the code input is zero."""
    cfg.validate()
    layout = dataset.layout
    policy = CoPolicy(derive_rng(cfg.seed, T_INIT),
                      log_std_init=cfg.log_std_init)
    opt = Adam(policy.actor.params(), cfg.bc_lr)
    obs, _, ar = _dataset_steps(dataset)
    x = np.concatenate([obs, np.zeros((obs.shape[0], CODE_DIM))], axis=1)
    bundle = PolicyBundle(cfg.mode, layout, policy)
    writer = RunWriter(out_dir)
    start = time.time()

    def forward(xb):
        return ad.slice_cols(policy.actor.forward(ad.Tensor(xb)), 2, 4)

    for e in range(cfg.episodes):
        rng = derive_rng(cfg.seed, T_BATCH, e)
        loss = _bc_epoch(forward, policy.actor.params(), opt,
                         x, ar, cfg.inner_batch, rng)
        writer.log(episode=e, value_loss=loss,
                   lr=cfg.bc_lr, wall_time=time.time() - start)
        writer.maybe_checkpoint(bundle, e, cfg)
    writer.close()
    bundle.metrics = writer.rows
    bundle.checkpoint_paths = writer.checkpoint_paths
    return bundle


def _human_bc_net(rng) -> MLP:
    return MLP([OBS_DIM, 128, 128, 2], ["tanh", "tanh", "identity"], rng)


def collect_robot_rollouts(env, human_fn, policy, buffer: RolloutBuffer, *,
                           seed: int, episode: int, workers: int):
    """Rollouts where the human is a fixed driver and only aR is on-policy."""
    if buffer.ptr != 0:
        raise ValueError("buffer must be empty")
    per_lane = buffer.capacity // workers
    lane_rngs = [derive_rng(seed, T_ACTION, episode, w) for w in range(workers)]

    def env_seed(w, k):
        return int(np.random.SeedSequence(
            (seed, T_RESET, episode, w, k)).generate_state(1)[0])

    z0 = np.zeros(0)
    for w in range(workers):
        k = 0
        state = env.reset(env_seed(w, k))
        obs = env.observe(state)
        for t in range(per_lane):
            aH = human_fn(obs)
            mean, value = policy.mean_value(obs[None])
            policy.head.clamp()
            aR = policy.head.sample(mean[0], lane_rngs[w])
            logprob = float(policy.head.logprob_np(mean[0], aR))
            state, done, _ = env.step(state, aH, aR)
            last_slot = t == per_lane - 1
            if done:
                buffer.add(obs, z0, None, aR, logprob, value[0], 0.0, True)
                if not last_slot:
                    k += 1
                    state = env.reset(env_seed(w, k))
                    obs = env.observe(state)
            else:
                next_obs = env.observe(state)
                if last_slot:
                    _, v_next = policy.mean_value(next_obs[None])
                    buffer.add(obs, z0, None, aR, logprob, value[0], 0.0,
                               False, trunc=True, bootstrap=float(v_next[0]))
                else:
                    buffer.add(obs, z0, None, aR, logprob, value[0], 0.0, False)
                    obs = next_obs


def train_bc_gail(cfg: TrainConfig, ppo_cfg: PPOConfig, dataset: DemoDataset,
                  out_dir=None) -> PolicyBundle:
    """Stage 1 clones the human; stage 2 trains the robot adversarially
    against open-loop interaction with the frozen clone."""
    cfg.validate()
    ppo_cfg.validate()
    layout = dataset.layout
    env = FetchQuestEnv(layout)
    rng_init = derive_rng(cfg.seed, T_INIT)
    human_bc = _human_bc_net(rng_init)
    obs_all, ah_all, ar_all = _dataset_steps(dataset)

    opt_h = Adam(human_bc.params(), cfg.bc_lr)
    for e in range(cfg.bc_epochs):
        rng = derive_rng(cfg.seed, T_BATCH, e)
        _bc_epoch(lambda xb: human_bc.forward(ad.Tensor(xb)),
                  human_bc.params(), opt_h, obs_all, ah_all,
                  cfg.inner_batch, rng)

    policy = CoPolicy(rng_init, in_dim=OBS_DIM, action_dim=2,
                      log_std_init=cfg.log_std_init)
    disc = Discriminator(rng_init, cfg.disc_mode, in_dim=OBS_DIM + 2)
    opt_policy = Adam(policy.params(), ppo_cfg.lr)
    opt_disc = Adam(disc.params(), ppo_cfg.lr)
    bundle = PolicyBundle(cfg.mode, layout, policy, discriminator=disc,
                          human_bc=human_bc)
    writer = RunWriter(out_dir)
    start = time.time()
    empty = np.zeros((0,))

    def human_fn(obs):
        return np.clip(human_bc.forward_np(obs), -1.0, 1.0)

    for e in range(cfg.episodes):
        lr = _lr_at(ppo_cfg.lr, e, cfg.episodes)
        opt_policy.lr = opt_disc.lr = lr
        buffer = RolloutBuffer(cfg.steps_per_episode, z_dim=0, action_dim=2)
        collect_robot_rollouts(env, human_fn, policy, buffer,
                               seed=cfg.seed, episode=e, workers=cfg.workers)

        inner_rng = derive_rng(cfg.seed, T_SHUFFLE, e)
        d_losses = []
        for _ in range(cfg.inner_steps):
            di = inner_rng.integers(0, obs_all.shape[0], cfg.inner_batch)
            expert = {"obs": obs_all[di], "ah": np.zeros((cfg.inner_batch, 0)),
                      "ar": ar_all[di]}
            bi = inner_rng.integers(0, len(buffer), cfg.inner_batch)
            pol = {"obs": buffer.obs[bi], "ah": np.zeros((cfg.inner_batch, 0)),
                   "ar": np.clip(buffer.actions[bi], -1.0, 1.0)}
            opt_disc.zero_grad()
            dl = disc_loss(disc, expert, pol)
            ad.backward(dl)
            opt_disc.step()
            d_losses.append(float(dl.data))

        act = np.clip(buffer.actions, -1.0, 1.0)
        buffer.rewards[:] = gail_reward(
            disc, buffer.obs, np.zeros((buffer.capacity, 0)), act)
        compute_gae(buffer, ppo_cfg.gamma, ppo_cfg.gae_lambda)
        pm = ppo_update(policy, opt_policy, buffer, ppo_cfg,
                        seed=cfg.seed, episode=e, lr=lr)
        writer.log(episode=e, disc_loss=float(np.mean(d_losses)),
                   ppo_surrogate=pm["ppo_surrogate"],
                   value_loss=pm["value_loss"],
                   mean_reward=float(buffer.rewards.mean()),
                   lr=lr, wall_time=time.time() - start)
        writer.maybe_checkpoint(bundle, e, cfg)
    writer.close()
    bundle.metrics = writer.rows
    bundle.checkpoint_paths = writer.checkpoint_paths
    return bundle


# ----------------------------------------------------------- sanity task

def train_reach_goal(seed: int = 0, updates: int = 50, steps: int = 2000,
                     workers: int = 20, ppo_cfg: PPOConfig = None):
    """Dense-reward training used to sanity-check the optimizer end to end.

    Returns (policy, per-update mean episode returns).
    """
    ppo_cfg = (ppo_cfg or PPOConfig()).validate()
    task = ReachGoalTask()
    policy = CoPolicy(derive_rng(seed, T_INIT))
    opt = Adam(policy.params(), ppo_cfg.lr)
    z0 = np.zeros(CODE_DIM)
    per_lane = steps // workers
    mean_returns = []

    for e in range(updates):
        lr = _lr_at(ppo_cfg.lr, e, updates)
        buffer = RolloutBuffer(steps)
        lane_rngs = [derive_rng(seed, T_ACTION, e, w) for w in range(workers)]
        returns = []
        for w in range(workers):
            k = 0
            state = task.reset(int(np.random.SeedSequence(
                (seed, T_RESET, e, w, k)).generate_state(1)[0]))
            obs = task.observe(state)
            ep_ret = 0.0
            for t in range(per_lane):
                aH, aR, logprob, value = policy.act(obs, z0, rng=lane_rngs[w])
                state, reward, done = task.step(state, aH, aR)
                ep_ret += reward
                action = np.concatenate([aH, aR])
                last_slot = t == per_lane - 1
                if done:
                    buffer.add(obs, z0, None, action, logprob, value, reward, True)
                    returns.append(ep_ret)
                    ep_ret = 0.0
                    if not last_slot:
                        k += 1
                        state = task.reset(int(np.random.SeedSequence(
                            (seed, T_RESET, e, w, k)).generate_state(1)[0]))
                        obs = task.observe(state)
                else:
                    next_obs = task.observe(state)
                    if last_slot:
                        _, v_next = policy.mean_value(
                            np.concatenate([next_obs, z0])[None])
                        buffer.add(obs, z0, None, action, logprob, value,
                                   reward, False, trunc=True,
                                   bootstrap=float(v_next[0]))
                    else:
                        buffer.add(obs, z0, None, action, logprob, value,
                                   reward, False)
                        obs = next_obs
        compute_gae(buffer, ppo_cfg.gamma, ppo_cfg.gae_lambda)
        ppo_update(policy, opt, buffer, ppo_cfg, seed=seed, episode=e, lr=lr)
        mean_returns.append(float(np.mean(returns)) if returns
                            else float(buffer.rewards.sum()))
    return policy, mean_returns


def random_reach_goal_baseline(seed: int = 0, episodes: int = 20) -> float:
    """Mean episode return of an untrained policy on the sanity task."""
    task = ReachGoalTask()
    policy = CoPolicy(derive_rng(seed, T_INIT))
    z0 = np.zeros(CODE_DIM)
    rng = derive_rng(seed, T_ACTION)
    returns = []
    for k in range(episodes):
        state = task.reset(int(np.random.SeedSequence(
            (seed, T_RESET, k)).generate_state(1)[0]))
        obs = task.observe(state)
        total, done = 0.0, False
        while not done:
            aH, aR, _, _ = policy.act(obs, z0, rng=rng)
            state, reward, done = task.step(state, aH, aR)
            total += reward
            if not done:
                obs = task.observe(state)
        returns.append(total)
    return float(np.mean(returns))


# ------------------------------------------------------------- dispatcher

def train(cfg: TrainConfig, ppo_cfg: PPOConfig, dataset: DemoDataset,
          out_dir=None) -> PolicyBundle:
    cfg.validate()
    if dataset is None or not dataset.demos:
        raise ValueError("training mode %r needs a demo dataset" % (cfg.mode,))
    if cfg.mode in GAIL_MODES:
        return train_gail_family(cfg, ppo_cfg, dataset, out_dir)
    if cfg.mode == "bc_single":
        return train_bc_single(cfg, dataset, out_dir)
    return train_bc_gail(cfg, ppo_cfg, dataset, out_dir)


class Trainer(BaseEstimator):
    """Estimator facade over the training modes.

    fit(dataset) trains per the constructor's hyperparameters and exposes
    policy_, recognizer_, discriminator_, metrics_, checkpoint_paths_.
    """

    def __init__(self, mode="cogail", episodes=200, steps_per_episode=6000,
                 lam1=1.0, lam2=0.5, seed=300, disc_mode="cross_entropy",
                 checkpoint_interval=10, inner_steps=10, inner_batch=256,
                 workers=20, log_std_init=0.0, bc_lr=1e-3, bc_epochs=100,
                 lr=3e-4, gamma=0.99, gae_lambda=0.95, clip=0.2,
                 ppo_epochs=10, minibatch=256, value_coef=0.5,
                 entropy_coef=0.01, grad_norm_clip=0.5):
        self.mode = mode
        self.episodes = episodes
        self.steps_per_episode = steps_per_episode
        self.lam1 = lam1
        self.lam2 = lam2
        self.seed = seed
        self.disc_mode = disc_mode
        self.checkpoint_interval = checkpoint_interval
        self.inner_steps = inner_steps
        self.inner_batch = inner_batch
        self.workers = workers
        self.log_std_init = log_std_init
        self.bc_lr = bc_lr
        self.bc_epochs = bc_epochs
        self.lr = lr
        self.gamma = gamma
        self.gae_lambda = gae_lambda
        self.clip = clip
        self.ppo_epochs = ppo_epochs
        self.minibatch = minibatch
        self.value_coef = value_coef
        self.entropy_coef = entropy_coef
        self.grad_norm_clip = grad_norm_clip

    def _configs(self):
        cfg = TrainConfig(
            mode=self.mode, episodes=self.episodes,
            steps_per_episode=self.steps_per_episode, lam1=self.lam1,
            lam2=self.lam2, seed=self.seed, disc_mode=self.disc_mode,
            checkpoint_interval=self.checkpoint_interval,
            inner_steps=self.inner_steps, inner_batch=self.inner_batch,
            workers=self.workers, log_std_init=self.log_std_init,
            bc_lr=self.bc_lr, bc_epochs=self.bc_epochs)
        ppo_cfg = PPOConfig(
            lr=self.lr, gamma=self.gamma, gae_lambda=self.gae_lambda,
            clip=self.clip, epochs=self.ppo_epochs, minibatch=self.minibatch,
            value_coef=self.value_coef, entropy_coef=self.entropy_coef,
            grad_norm_clip=self.grad_norm_clip)
        return cfg, ppo_cfg

    def fit(self, dataset: DemoDataset, out_dir=None):
        cfg, ppo_cfg = self._configs()
        bundle = train(cfg, ppo_cfg, dataset, out_dir)
        self.bundle_ = bundle
        self.policy_ = bundle.policy
        self.recognizer_ = bundle.recognizer
        self.discriminator_ = bundle.discriminator
        self.metrics_ = bundle.metrics
        self.checkpoint_paths_ = bundle.checkpoint_paths
        return self
