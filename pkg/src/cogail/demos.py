"""Demonstration datasets: generation, storage, splits, history windows.

Datasets are stored as line-delimited JSON: a header record, one record
per demonstration, and a trailing checksum line over all preceding
bytes.  Floats serialize via repr (shortest round-trip), so a
save/load/save cycle is byte-identical.
"""

import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np

from .env import ENV_VERSION, FetchQuestEnv, Layout, layout_hash
from .experts import ScriptedExpert, build_plans, classify_strategy, run_episode
from .rngs import T_EXPERT, T_SPLIT, derive_rng

FORMAT_VERSION = 1
HISTORY_K = 4          # window = K+1 observations + previous human action
WINDOW_DIM = (HISTORY_K + 1) * 10 + 2


class DatasetError(ValueError):
    pass


@dataclass
class Demonstration:
    obs: np.ndarray          # [T, 10]
    actions_h: np.ndarray    # [T, 2]
    actions_r: np.ndarray    # [T, 2]
    meta: dict

    def __len__(self):
        return self.obs.shape[0]


@dataclass
class DatasetSpec:
    n: int
    proportions: tuple       # per-strategy fractions, sum to 1
    seed: int
    split_fraction: float = 0.5

    def validate(self):
        if self.n <= 0:
            raise DatasetError("dataset size must be positive")
        p = np.asarray(self.proportions, dtype=np.float64)
        if p.shape != (4,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-6:
            raise DatasetError("proportions must be 4 non-negative values summing to 1")
        if not (0.0 < self.split_fraction < 1.0):
            raise DatasetError("split fraction must be in (0,1)")
        return self


def strategy_counts(n: int, proportions) -> tuple:
    """Largest-remainder apportionment of n demos over 4 strategies."""
    p = np.asarray(proportions, dtype=np.float64)
    exact = n * p
    counts = np.floor(exact).astype(int)
    order = sorted(range(4), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[: n - int(counts.sum())]:
        counts[i] += 1
    return tuple(counts.tolist())


class DemoDataset:
    def __init__(self, demos, layout: Layout = None):
        self.demos = list(demos)
        self.layout = layout or Layout()
        self._index = None

    def __len__(self):
        return len(self.demos)

    def __iter__(self):
        return iter(self.demos)

    def labels(self):
        return [d.meta.get("strategy") for d in self.demos]

    def ids(self):
        return [d.meta["id"] for d in self.demos]

    # ------------------------------------------------- batch sampling

    def _ensure_index(self):
        if self._index is not None:
            return
        lengths = np.array([len(d) for d in self.demos])
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
        self._index = {
            "obs": np.concatenate([d.obs for d in self.demos]),
            "ah": np.concatenate([d.actions_h for d in self.demos]),
            "ar": np.concatenate([d.actions_r for d in self.demos]),
            "starts": starts,
            "lengths": lengths,
            "total": int(lengths.sum()),
        }

    def sample_batch(self, batch_size: int, rng: np.random.Generator,
                     K: int = HISTORY_K) -> dict:
        """Uniform over all (demo, t) pairs; windows padded per the rule."""
        if not self.demos:
            raise DatasetError("empty dataset")
        self._ensure_index()
        ix = self._index
        flat = rng.integers(0, ix["total"], size=batch_size)
        demo_of = np.searchsorted(ix["starts"], flat, side="right") - 1
        t_loc = flat - ix["starts"][demo_of]

        offsets = np.arange(K + 1) - K
        rows = np.maximum(t_loc[:, None] + offsets[None, :], 0) \
            + ix["starts"][demo_of][:, None]
        windows = ix["obs"][rows].reshape(batch_size, (K + 1) * 10)
        prev_rows = np.maximum(t_loc - 1, 0) + ix["starts"][demo_of]
        prev = np.where((t_loc > 0)[:, None], ix["ah"][prev_rows], 0.0)
        return {
            "windows": np.concatenate([windows, prev], axis=1),
            "obs": ix["obs"][flat],
            "ah": ix["ah"][flat],
            "ar": ix["ar"][flat],
        }


def history_window(obs: np.ndarray, actions_h: np.ndarray, t: int,
                   K: int = HISTORY_K) -> np.ndarray:
    """Flattened (s_{t-K:t}, aH_{t-1}); repeats s_0 and zero-pads at t=0."""
    T = obs.shape[0]
    if not 0 <= t < T:
        raise IndexError("t out of range")
    rows = np.maximum(np.arange(t - K, t + 1), 0)
    prev = actions_h[t - 1] if t > 0 else np.zeros(2)
    return np.concatenate([obs[rows].reshape(-1), prev])


class WindowTracker:
    """Incremental history windows for a live episode.

    Produces the same vectors as history_window on the trajectory so far:
    push the current observation, read the window, then record the executed
    human action before the next push.
    """

    def __init__(self, K: int = HISTORY_K):
        self.K = K
        self._obs: list = []
        self._prev_ah = np.zeros(2)

    def reset(self):
        self._obs.clear()
        self._prev_ah = np.zeros(2)

    def push_obs(self, obs: np.ndarray):
        self._obs.append(np.asarray(obs, dtype=np.float64))
        if len(self._obs) > self.K + 1:
            del self._obs[0]

    def push_action(self, ah):
        self._prev_ah = np.asarray(ah, dtype=np.float64)

    def window(self) -> np.ndarray:
        if not self._obs:
            raise DatasetError("window requested before any observation")
        stack = [self._obs[0]] * (self.K + 1 - len(self._obs)) + self._obs
        return np.concatenate([np.concatenate(stack), self._prev_ah])


# ------------------------------------------------------------ generate

def generate_dataset(spec: DatasetSpec, layout: Layout = None,
                     noise: float = 0.05, max_consecutive_failures: int = 50
                     ) -> DemoDataset:
    """Scripted demos per strategy mix; failures discarded, not stored."""
    spec.validate()
    lay = layout or Layout()
    env = FetchQuestEnv(lay)
    plans = build_plans(lay)
    counts = strategy_counts(spec.n, spec.proportions)
    lhash = layout_hash(lay)
    demos = []
    for k in (1, 2, 3, 4):
        plan = plans[k]
        if noise != plan.noise:
            plan = replace(plan, noise=noise)
        produced, attempt, failures = 0, 0, 0
        while produced < counts[k - 1]:
            env_seed = int(np.random.SeedSequence(
                (spec.seed, 11, k, attempt)).generate_state(1)[0])
            rng = derive_rng(spec.seed, T_EXPERT, k, attempt)
            obs, ah, ar, success = run_episode(env, ScriptedExpert(plan),
                                               env_seed, rng)
            attempt += 1
            if not success:
                failures += 1
                if failures >= max_consecutive_failures:
                    raise DatasetError(
                        "scripted expert failed %d consecutive times on "
                        "strategy %d" % (failures, k))
                continue
            failures = 0
            label = classify_strategy(obs)
            if label != k:
                raise DatasetError("generated demo classified as %r, "
                                   "expected %d" % (label, k))
            demos.append(Demonstration(obs, ah, ar, meta={
                "id": "scripted-%d-%d-%d" % (spec.seed, k, attempt - 1),
                "env_version": ENV_VERSION,
                "layout_hash": lhash,
                "seed": env_seed,
                "source": "scripted",
                "strategy": k,
                "success": True,
            }))
            produced += 1
    return DemoDataset(demos, lay)


# ------------------------------------------------------------- storage

def save(dataset: DemoDataset, path):
    header = {
        "format_version": FORMAT_VERSION,
        "env_version": ENV_VERSION,
        "layout_hash": layout_hash(dataset.layout),
        "layout": json.loads(dataset.layout.to_json()),
        "count": len(dataset),
    }
    lines = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
    for d in dataset:
        lines.append(json.dumps({
            "meta": d.meta,
            "obs": d.obs.tolist(),
            "ah": d.actions_h.tolist(),
            "ar": d.actions_r.tolist(),
        }, sort_keys=True, separators=(",", ":")))
    body = ("\n".join(lines) + "\n").encode("utf-8")
    digest = hashlib.sha256(body).hexdigest()
    with open(path, "wb") as f:
        f.write(body)
        f.write(json.dumps({"sha256": digest}).encode("utf-8") + b"\n")


def load(path) -> DemoDataset:
    with open(path, "rb") as f:
        blob = f.read()
    try:
        body, tail, _ = blob.rsplit(b"\n", 2)
    except ValueError:
        raise DatasetError("%s: not a demo file" % (path,))
    body += b"\n"
    try:
        want = json.loads(tail)["sha256"]
    except (json.JSONDecodeError, KeyError):
        raise DatasetError("%s: missing checksum line" % (path,))
    if hashlib.sha256(body).hexdigest() != want:
        raise DatasetError("%s: checksum mismatch (truncated or edited?)" % (path,))
    lines = body.decode("utf-8").splitlines()
    header = json.loads(lines[0])
    if header.get("env_version") != ENV_VERSION:
        raise DatasetError("%s: environment version %r, expected %r"
                           % (path, header.get("env_version"), ENV_VERSION))
    layout = Layout.from_dict(header["layout"])
    if layout_hash(layout) != header["layout_hash"]:
        raise DatasetError("%s: layout hash mismatch" % (path,))
    demos = []
    for line in lines[1:]:
        rec = json.loads(line)
        demos.append(Demonstration(
            obs=np.asarray(rec["obs"], dtype=np.float64),
            actions_h=np.asarray(rec["ah"], dtype=np.float64),
            actions_r=np.asarray(rec["ar"], dtype=np.float64),
            meta=rec["meta"]))
    if len(demos) != header["count"]:
        raise DatasetError("%s: demo count mismatch" % (path,))
    return DemoDataset(demos, layout)


def split(dataset: DemoDataset, fraction: float, seed: int):
    """Stratified (train, test) split by strategy label."""
    if not 0.0 < fraction < 1.0:
        raise DatasetError("fraction must be in (0,1)")
    by_label: dict = {}
    for i, d in enumerate(dataset):
        by_label.setdefault(d.meta.get("strategy"), []).append(i)
    train_idx, test_idx = [], []
    for label in sorted(by_label, key=str):
        idx = by_label[label]
        if len(idx) < 2:
            raise DatasetError("stratum %r has fewer than 2 demos" % (label,))
        rng = derive_rng(seed, T_SPLIT, label if label else 0)
        order = rng.permutation(len(idx))
        n_train = int(round(fraction * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train_idx += [idx[j] for j in order[:n_train]]
        test_idx += [idx[j] for j in order[n_train:]]
    train = DemoDataset([dataset.demos[i] for i in sorted(train_idx)],
                        dataset.layout)
    test = DemoDataset([dataset.demos[i] for i in sorted(test_idx)],
                       dataset.layout)
    return train, test


def replay_demo(env: FetchQuestEnv, demo: Demonstration):
    """Re-simulate from the recorded seed and actions.

    Returns (max observation deviation, reached success).  The fidelity
    bar for recorded data is 1e-9 per component.
    """
    state = env.reset(demo.meta["seed"])
    max_dev = 0.0
    for t in range(len(demo)):
        obs = env.observe(state)
        max_dev = max(max_dev, float(np.abs(obs - demo.obs[t]).max()))
        state, _, _ = env.step(state, demo.actions_h[t], demo.actions_r[t])
    return max_dev, state.success
