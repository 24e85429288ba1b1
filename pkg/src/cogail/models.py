"""Learning components: co-policy, recognition net, discriminator, code sampler.

The co-policy emits a joint 4-dim action (human first, robot second)
conditioned on the observation and a 2-dim strategy code.  The recognition
net maps a history window back to a code estimate; the discriminator scores
(obs, aH, aR) triples.
"""

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .demos import WINDOW_DIM
from .nn import MLP, Adam, GaussianHead, GradientError

OBS_DIM = 10
CODE_DIM = 2
ACTION_DIM = 4   # aH (2) then aR (2); the split is fixed
DISC_IN = OBS_DIM + ACTION_DIM


def _check_finite(name, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise GradientError("non-finite %s output" % name)


def _data(x) -> Tensor:
    return Tensor(np.asarray(x, dtype=np.float64))


def _l2_mean(diff: Tensor) -> Tensor:
    # mean over the batch of per-row Euclidean norms; the gradient is
    # undefined at an exactly-zero row (never hit in training)
    return ad.tmean(ad.sqrt(ad.tsum(ad.square(diff), axis=1)))


class CoPolicy:
    """Gaussian policy over the joint human+robot action, plus a critic.

    Both heads see [obs, z].  Actions are sampled without squashing; the
    environment clamps on ingestion, and log-densities always refer to the
    un-clamped sample.
    """

    def __init__(self, rng, hidden=(128, 128, 128, 128), log_std_init: float = 0.0,
                 in_dim: int = OBS_DIM + CODE_DIM, action_dim: int = ACTION_DIM):
        self.in_dim = in_dim
        self.action_dim = action_dim
        sizes = [in_dim, *hidden]
        acts = ["tanh"] * len(hidden) + ["identity"]
        self.actor = MLP(sizes + [action_dim], acts, rng, out_gain=0.01)
        self.critic = MLP(sizes + [1], acts, rng, out_gain=1.0)
        self.head = GaussianHead(action_dim, init=log_std_init)

    # ------------------------------------------------------- numpy paths

    def mean_value(self, obs_z: np.ndarray):
        """Batched deterministic forward: (mean [B,4], value [B])."""
        x = np.atleast_2d(np.asarray(obs_z, dtype=np.float64))
        mean = self.actor.forward_np(x)
        value = self.critic.forward_np(x)
        _check_finite("policy", mean, value)
        return mean, value.reshape(-1)

    def act(self, obs, z, rng=None, deterministic: bool = False):
        """One action draw: (aH, aR, logprob, value).

        The returned action is the raw Gaussian sample (or the mean when
        deterministic); logprob is its pre-clamp log-density.
        """
        x = np.concatenate([np.asarray(obs, float), np.asarray(z, float)])
        mean, value = self.mean_value(x[None])
        mean = mean[0]
        self.head.clamp()
        if deterministic:
            action = mean.copy()
        else:
            action = self.head.sample(mean, rng)
        logprob = float(self.head.logprob_np(mean, action))
        return action[:2], action[2:], logprob, float(value[0])

    # ------------------------------------------------------- graph paths

    def logprob_value(self, obs_z: np.ndarray, actions: np.ndarray):
        """(logprob [B], value [B,1], entropy scalar) with gradients."""
        x = _data(obs_z)
        mean = self.actor.forward(x)
        value = self.critic.forward(x)
        logprob = self.head.logprob(mean, np.asarray(actions, dtype=np.float64))
        return logprob, value, self.head.entropy()

    def human_mean(self, obs: np.ndarray, z: Tensor) -> Tensor:
        """Deterministic human head at (obs, z); z may carry gradients."""
        x = ad.concat([_data(obs), z], axis=1)
        mean = self.actor.forward(x)
        return ad.slice_cols(mean, 0, 2)

    def joint_mean(self, obs: np.ndarray, z) -> Tensor:
        """Deterministic joint mean at (obs, z); z may carry gradients."""
        zt = z if isinstance(z, Tensor) else _data(np.atleast_2d(z))
        x = ad.concat([_data(obs), zt], axis=1)
        return self.actor.forward(x)

    # ------------------------------------------------------ housekeeping

    def params(self):
        return self.actor.params() + self.critic.params() + [self.head.log_std]

    def state_arrays(self, prefix: str = "policy") -> dict:
        out = self.actor.state_arrays(prefix + ".actor")
        out.update(self.critic.state_arrays(prefix + ".critic"))
        out[prefix + ".log_std"] = self.head.log_std.data
        return out

    def load_state_arrays(self, prefix: str, arrays: dict):
        self.actor.load_state_arrays(prefix + ".actor", arrays)
        self.critic.load_state_arrays(prefix + ".critic", arrays)
        self.head.log_std.data = np.asarray(arrays[prefix + ".log_std"],
                                            dtype=np.float64)


class StrategyRecognizer:
    """Maps a history window to a strategy-code estimate in (-1,1)^2."""

    def __init__(self, rng, hidden=(128, 128), out_gain: float = 1.0):
        sizes = [WINDOW_DIM, *hidden, CODE_DIM]
        self.net = MLP(sizes, ["tanh"] * (len(hidden) + 1), rng,
                       out_gain=out_gain)

    def forward(self, windows) -> Tensor:
        x = windows if isinstance(windows, Tensor) else _data(np.atleast_2d(windows))
        return self.net.forward(x)

    def transform(self, windows) -> np.ndarray:
        """Deterministic code estimates, [B,2] (or [2] for a single window)."""
        w = np.asarray(windows, dtype=np.float64)
        out = self.net.forward_np(np.atleast_2d(w))
        _check_finite("recognizer", out)
        return out[0] if w.ndim == 1 else out

    def params(self):
        return self.net.params()

    def state_arrays(self, prefix: str = "recognizer") -> dict:
        return self.net.state_arrays(prefix)

    def load_state_arrays(self, prefix: str, arrays: dict):
        self.net.load_state_arrays(prefix, arrays)


class Discriminator:
    """Scores (obs, aH, aR) triples; higher raw score = more expert-like."""

    MODES = ("cross_entropy", "least_squares")

    def __init__(self, rng, mode: str = "cross_entropy", hidden=(64, 64),
                 in_dim: int = DISC_IN):
        if mode not in self.MODES:
            raise ValueError("unknown discriminator mode %r" % (mode,))
        self.mode = mode
        self.in_dim = in_dim
        sizes = [in_dim, *hidden, 1]
        # the final tanh keeps the score in (-1, 1): the discriminator can
        # never saturate far from its decision boundary, so the policy always
        # sees a usable reward gradient
        acts = ["tanh"] * (len(hidden) + 1)
        self.net = MLP(sizes, acts, rng, out_gain=1.0)

    @staticmethod
    def _stack(obs, ah, ar) -> np.ndarray:
        x = np.concatenate([np.atleast_2d(np.asarray(p, dtype=np.float64))
                            for p in (obs, ah, ar)], axis=1)
        if x.shape[0] == 0:
            raise ValueError("empty discriminator batch")
        return x

    def raw(self, obs, ah, ar) -> np.ndarray:
        out = self.net.forward_np(self._stack(obs, ah, ar))
        _check_finite("discriminator", out)
        return out.reshape(-1)

    def raw_graph(self, obs, ah, ar) -> Tensor:
        return self.net.forward(_data(self._stack(obs, ah, ar)))

    def params(self):
        return self.net.params()

    def state_arrays(self, prefix: str = "disc") -> dict:
        return self.net.state_arrays(prefix)

    def load_state_arrays(self, prefix: str, arrays: dict):
        self.net.load_state_arrays(prefix, arrays)


def disc_loss(disc: Discriminator, expert_batch: dict, policy_batch: dict) -> Tensor:
    """Discriminator training loss (graph scalar).

    cross_entropy: E[softplus(-score_e)] + E[softplus(score_p)], the
    minimized negative of the usual GAN objective with the bounded score
    as the logit.  least_squares: squared distance of the score from the
    +1 (expert) / -1 (policy) targets.
    """
    raw_e = disc.raw_graph(expert_batch["obs"], expert_batch["ah"], expert_batch["ar"])
    raw_p = disc.raw_graph(policy_batch["obs"], policy_batch["ah"], policy_batch["ar"])
    if disc.mode == "cross_entropy":
        return ad.tmean(ad.softplus(ad.neg(raw_e))) + ad.tmean(ad.softplus(raw_p))
    return ad.tmean(ad.square(raw_e - 1.0)) + ad.tmean(ad.square(raw_p + 1.0))


def gail_reward(disc: Discriminator, obs, ah, ar) -> np.ndarray:
    """Imitation reward from the discriminator; monotone in the raw score.

    The mapping must straddle zero: episodes end at task success, so a
    strictly positive reward would pay the policy to stall one step short
    of finishing forever.  The tanh head's raw score is already bounded,
    zero-centered, and (for the sigmoid reading) equal to
    log D - log(1 - D), so it serves both loss modes directly.
    """
    return disc.raw(obs, ah, ar)


def loss_Lz(recognizer: StrategyRecognizer, windows, z) -> Tensor:
    """Mean Euclidean error of the code estimate against the rollout code."""
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0 or np.atleast_2d(z).shape[1] != CODE_DIM:
        raise ValueError("buffer batch is missing strategy codes")
    zhat = recognizer.forward(np.atleast_2d(windows))
    return _l2_mean(zhat - np.atleast_2d(z))


def loss_La(recognizer: StrategyRecognizer, policy: CoPolicy,
            windows, obs, ah) -> Tensor:
    """Human-action reconstruction error through the recognizer code."""
    zhat = recognizer.forward(np.atleast_2d(windows))
    mean_h = policy.human_mean(np.atleast_2d(obs), zhat)
    return _l2_mean(mean_h - np.atleast_2d(np.asarray(ah, dtype=np.float64)))


class CodeSampler:
    """Cycles through a 5x5 grid of code centers, adding uniform noise.

    Every center is visited once per 25 draws, so a rollout batch covers
    the code square evenly instead of clumping like i.i.d. sampling would.
    """

    GRID = (-0.8, -0.4, 0.0, 0.4, 0.8)

    def __init__(self, noise: float = 0.2):
        self.centers = np.array([(a, b) for a in self.GRID for b in self.GRID])
        self.noise = float(noise)
        self.idx = 0

    def sample(self, rng) -> np.ndarray:
        c = self.centers[self.idx]
        self.idx = (self.idx + 1) % len(self.centers)
        z = c + rng.uniform(-self.noise, self.noise, CODE_DIM)
        return np.clip(z, -1.0, 1.0)

    def state_arrays(self, prefix: str = "code_sampler") -> dict:
        return {prefix + ".idx": np.array([self.idx], dtype=np.float64)}

    def load_state_arrays(self, prefix: str, arrays: dict):
        self.idx = int(arrays[prefix + ".idx"][0])


def combined_update(policy: CoPolicy, recognizer: StrategyRecognizer,
                    disc: Discriminator, opt_policy: Adam, opt_recognizer: Adam,
                    opt_disc: Adam, demo_batch: dict, buffer_batch: dict,
                    lam1: float = 1.0, lam2: float = 0.5) -> dict:
    """One recognition/reconstruction step followed by one discriminator step.

    lam1 weighs the code-recovery loss on rollout data, lam2 the human-action
    reconstruction on demo data.  With both zero the policy and recognizer
    are left untouched and only the discriminator trains.
    """
    report = {"L_z": 0.0, "L_a": 0.0}
    if lam1 > 0.0 or lam2 > 0.0:
        opt_policy.zero_grad()
        opt_recognizer.zero_grad()
        total = None
        if lam1 > 0.0:
            lz = loss_Lz(recognizer, buffer_batch["windows"], buffer_batch["z"])
            report["L_z"] = float(lz.data)
            total = lz * lam1
        if lam2 > 0.0:
            la = loss_La(recognizer, policy, demo_batch["windows"],
                         demo_batch["obs"], demo_batch["ah"])
            report["L_a"] = float(la.data)
            total = la * lam2 if total is None else total + la * lam2
        ad.backward(total)
        opt_recognizer.step()
        opt_policy.step()   # only the actor carries grads here

    opt_disc.zero_grad()
    dl = disc_loss(disc, demo_batch, buffer_batch)
    report["disc_loss"] = float(dl.data)
    ad.backward(dl)
    opt_disc.step()
    return report
