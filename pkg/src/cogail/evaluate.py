"""Evaluation protocols over trained checkpoints.

Three protocols: interpolation rolls out the joint policy across uniform
strategy codes; replay pairs the robot head with open-loop recorded human
actions on held-out demos; latent export maps demos into the code space.
aggregate_seeds folds per-seed report series into a best-checkpoint pick.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .demos import WindowTracker, history_window
from .env import FetchQuestEnv
from .experts import classify_strategy
from .rngs import T_EVAL, T_RESET, derive_rng
from .train import PolicyBundle, load_bundle

STRATEGIES = (1, 2, 3, 4)


@dataclass
class EvalReport:
    protocol: str
    n_trials: int
    successes: int
    histogram: tuple         # counts for strategies 1..4, then unclassified
    trials: list = field(default_factory=list)
    seed: int = 0
    checkpoint: str = ""

    def validate(self):
        if len(self.histogram) != 5 or sum(self.histogram) != self.n_trials:
            raise ValueError("histogram must cover every trial")
        if not 0 <= self.successes <= self.n_trials:
            raise ValueError("successes out of range")
        return self

    @property
    def success_rate(self) -> float:
        return self.successes / self.n_trials if self.n_trials else 0.0

    def strategy_proportions(self) -> np.ndarray:
        """Per-strategy share of the successful rollouts."""
        if self.successes == 0:
            return np.zeros(4)
        return np.asarray(self.histogram[:4], dtype=np.float64) / self.successes

    def save(self, path):
        header = {"protocol": self.protocol, "n_trials": self.n_trials,
                  "successes": self.successes,
                  "histogram": list(self.histogram),
                  "seed": self.seed, "checkpoint": self.checkpoint}
        with open(path, "w") as f:
            f.write(json.dumps(header, sort_keys=True) + "\n")
            for row in self.trials:
                f.write(json.dumps(row, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "EvalReport":
        with open(path) as f:
            header = json.loads(f.readline())
            trials = [json.loads(line) for line in f if line.strip()]
        return cls(protocol=header["protocol"], n_trials=header["n_trials"],
                   successes=header["successes"],
                   histogram=tuple(header["histogram"]), trials=trials,
                   seed=header["seed"],
                   checkpoint=header["checkpoint"]).validate()


def _as_bundle(checkpoint) -> PolicyBundle:
    if isinstance(checkpoint, PolicyBundle):
        return checkpoint
    return load_bundle(checkpoint)


def _trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence(
        (seed, T_RESET, trial)).generate_state(1)[0])


def _bucket(success: bool, label) -> int:
    if success and label in STRATEGIES:
        return label - 1
    return 4


def eval_interpolation(checkpoint, n_codes: int = 100,
                       seed: int = 0) -> EvalReport:
    """Roll out the joint policy once per uniformly drawn strategy code.

    Both heads act deterministically; each rollout records success and
    the strategy label read off the treasure tracks.
    """
    if n_codes < 1:
        raise ValueError("n_codes must be positive")
    bundle = _as_bundle(checkpoint)
    env = FetchQuestEnv(bundle.layout)
    code_rng = derive_rng(seed, T_EVAL)
    hist = [0] * 5
    successes = 0
    trials = []
    for i in range(n_codes):
        z = code_rng.uniform(-1.0, 1.0, 2)
        state = env.reset(_trial_seed(seed, i))
        obs_rows = []
        done = False
        while not done:
            obs = env.observe(state)
            obs_rows.append(obs)
            a = bundle.joint_action(obs, z)
            state, done, _ = env.step(state, a[:2], a[2:])
        obs_rows.append(env.observe(state))
        label = classify_strategy(np.array(obs_rows))
        successes += int(state.success)
        hist[_bucket(state.success, label)] += 1
        trials.append({"trial": i, "z": [float(z[0]), float(z[1])],
                       "success": bool(state.success),
                       "strategy": label, "steps": int(state.step)})
    return EvalReport("interpolation", n_codes, successes, tuple(hist),
                      trials, seed=seed,
                      checkpoint=str(bundle.meta.get("episode", ""))).validate()


def eval_replay(checkpoint, demos, *, use_recorded_robot: bool = False
                ) -> EvalReport:
    """Pair the robot head with open-loop replays of recorded human actions.

    Each trial resets the environment from the demo's recorded seed, feeds
    the recorded human action stream (zero action once it runs out), and
    lets the checkpoint drive the robot from live observations only.  The
    recorded robot actions are never read unless use_recorded_robot is
    set (a fidelity probe, not an evaluation mode).
    """
    bundle = _as_bundle(checkpoint)
    env = FetchQuestEnv(bundle.layout)
    hist = [0] * 5
    successes = 0
    trials = []
    zero = np.zeros(2)
    for demo in demos:
        state = env.reset(demo.meta["seed"])
        tracker = WindowTracker()
        obs_rows = []
        done = False
        t = 0
        while not done:
            obs = env.observe(state)
            obs_rows.append(obs)
            tracker.push_obs(obs)
            ah = demo.actions_h[t] if t < len(demo) else zero
            if use_recorded_robot and t < len(demo):
                ar = demo.actions_r[t]
            else:
                ar = bundle.robot_action(obs, tracker.window())
            state, done, _ = env.step(state, ah, ar)
            tracker.push_action(np.clip(ah, -1.0, 1.0))
            t += 1
        obs_rows.append(env.observe(state))
        label = classify_strategy(np.array(obs_rows))
        successes += int(state.success)
        hist[_bucket(state.success, label)] += 1
        trials.append({"demo_id": demo.meta["id"],
                       "success": bool(state.success),
                       "strategy": label, "steps": int(state.step)})
    return EvalReport("replay", len(trials), successes, tuple(hist), trials,
                      checkpoint=str(bundle.meta.get("episode", ""))).validate()


# -------------------------------------------------------------- latents

@dataclass
class LatentExport:
    rows: list               # per demo: {"demo_id", "strategy", "z": [2]}

    def save(self, path):
        with open(path, "w") as f:
            f.write("demo_id\tstrategy\tz0\tz1\n")
            for r in self.rows:
                f.write("%s\t%s\t%r\t%r\n" % (r["demo_id"], r["strategy"],
                                              r["z"][0], r["z"][1]))

    @classmethod
    def load(cls, path) -> "LatentExport":
        rows = []
        with open(path) as f:
            next(f)
            for line in f:
                demo_id, strategy, z0, z1 = line.rstrip("\n").split("\t")
                rows.append({"demo_id": demo_id,
                             "strategy": None if strategy == "None"
                             else int(strategy),
                             "z": [float(z0), float(z1)]})
        return cls(rows)

    def dispersion(self) -> dict:
        """Cluster-separation summary of the exported codes.

        within: mean over strategies of the mean squared distance to the
        strategy centroid.  between: mean pairwise centroid distance.
        """
        by_label = {}
        for r in self.rows:
            if r["strategy"] in STRATEGIES:
                by_label.setdefault(r["strategy"], []).append(r["z"])
        if len(by_label) < 2:
            raise ValueError("need at least two labeled strategies")
        centroids = {}
        within = []
        for k, zs in sorted(by_label.items()):
            zs = np.asarray(zs)
            c = zs.mean(axis=0)
            centroids[k] = c
            within.append(float(np.mean(np.sum((zs - c) ** 2, axis=1))))
        keys = sorted(centroids)
        dists = [float(np.linalg.norm(centroids[a] - centroids[b]))
                 for i, a in enumerate(keys) for b in keys[i + 1:]]
        w, b = float(np.mean(within)), float(np.mean(dists))
        return {"within": w, "between": b,
                "ratio": w / b if b > 0 else float("inf")}


def export_latent(checkpoint, demos) -> LatentExport:
    """Mean recognized code per demo, with the classifier's label attached."""
    bundle = _as_bundle(checkpoint)
    if bundle.recognizer is None:
        raise ValueError("mode %r has no recognition network" % (bundle.mode,))
    rows = []
    for demo in demos:
        windows = np.stack([history_window(demo.obs, demo.actions_h, t)
                            for t in range(len(demo))])
        zs = bundle.recognizer.transform(windows)
        zbar = zs.mean(axis=0)
        rows.append({"demo_id": demo.meta["id"],
                     "strategy": classify_strategy(demo.obs),
                     "z": [float(zbar[0]), float(zbar[1])]})
    return LatentExport(rows)


# ------------------------------------------------------------ aggregation

def aggregate_seeds(reports_by_seed) -> dict:
    """Fold per-seed report series into per-checkpoint statistics.

    reports_by_seed: one list of EvalReports per seed, aligned on the
    checkpoint schedule.  Returns mean and population std per checkpoint
    plus the index maximizing the mean success rate.
    """
    series = [list(s) for s in reports_by_seed]
    if not series or not series[0]:
        raise ValueError("no reports to aggregate")
    schedule = [r.checkpoint for r in series[0]]
    protocol = series[0][0].protocol
    for s in series:
        if [r.checkpoint for r in s] != schedule:
            raise ValueError("checkpoint schedules differ across seeds")
        if any(r.protocol != protocol for r in s):
            raise ValueError("protocols differ across reports")
    rates = np.array([[r.success_rate for r in s] for s in series])
    mean = rates.mean(axis=0)
    # population std via shifted two-pass so agreeing seeds give exactly 0
    shifted = rates - rates[0]
    var = (shifted ** 2).mean(axis=0) - shifted.mean(axis=0) ** 2
    std = np.sqrt(np.maximum(var, 0.0))
    best = int(np.argmax(mean))
    return {"protocol": protocol, "checkpoints": schedule,
            "mean": mean.tolist(), "std": std.tolist(),
            "rates": rates.tolist(), "best_index": best,
            "best_checkpoint": schedule[best],
            "best_mean": float(mean[best]), "best_std": float(std[best])}
