import numpy as np
import pytest

from cogail.demos import DatasetSpec, generate_dataset
from cogail.evaluate import (EvalReport, LatentExport, aggregate_seeds,
                             eval_interpolation, eval_replay, export_latent)
from cogail.ppo import PPOConfig
from cogail.train import TrainConfig, train

MINI = dict(episodes=2, steps_per_episode=400, workers=4,
            inner_steps=2, inner_batch=64, checkpoint_interval=2)


@pytest.fixture(scope="module")
def dataset():
    return generate_dataset(DatasetSpec(n=8, proportions=(0.25,) * 4, seed=11))


@pytest.fixture(scope="module")
def bundle(dataset):
    return train(TrainConfig(mode="cogail", seed=5, **MINI),
                 PPOConfig(epochs=2, minibatch=128), dataset)


class NoRobotActions:
    """Demo proxy that fails the test if recorded robot actions are read."""

    def __init__(self, demo):
        self._demo = demo
        self.obs = demo.obs
        self.actions_h = demo.actions_h
        self.meta = demo.meta

    def __len__(self):
        return len(self._demo)

    @property
    def actions_r(self):
        raise AssertionError("replay read the recorded robot actions")


# ------------------------------------------------------------- reports

def test_report_validates_histogram():
    with pytest.raises(ValueError):
        EvalReport("replay", 10, 3, (1, 1, 1, 1, 1)).validate()
    r = EvalReport("replay", 5, 3, (1, 1, 1, 0, 2)).validate()
    assert r.success_rate == pytest.approx(0.6)


def test_report_proportions_over_successes():
    r = EvalReport("interpolation", 10, 4, (2, 1, 1, 0, 6))
    assert r.strategy_proportions() == pytest.approx([0.5, 0.25, 0.25, 0.0])
    empty = EvalReport("interpolation", 3, 0, (0, 0, 0, 0, 3))
    assert np.all(empty.strategy_proportions() == 0.0)


def test_report_save_load_round_trip(tmp_path, bundle):
    rep = eval_interpolation(bundle, n_codes=5, seed=1)
    path = str(tmp_path / "rep.jsonl")
    rep.save(path)
    back = EvalReport.load(path)
    assert back == rep


# -------------------------------------------------------- interpolation

def test_interpolation_histogram_conserved(bundle):
    rep = eval_interpolation(bundle, n_codes=12, seed=0)
    assert rep.n_trials == 12
    assert sum(rep.histogram) == 12
    assert len(rep.trials) == 12
    assert all(abs(v) <= 1.0 for row in rep.trials for v in row["z"])


def test_interpolation_deterministic(bundle):
    a = eval_interpolation(bundle, n_codes=6, seed=3)
    b = eval_interpolation(bundle, n_codes=6, seed=3)
    assert a == b
    c = eval_interpolation(bundle, n_codes=6, seed=4)
    assert c.trials[0]["z"] != a.trials[0]["z"]


def test_interpolation_near_random_init_rarely_succeeds(bundle):
    # barely trained checkpoint stands in for the null model
    rep = eval_interpolation(bundle, n_codes=40, seed=0)
    assert rep.success_rate < 0.05


def test_interpolation_rejects_bad_n(bundle):
    with pytest.raises(ValueError):
        eval_interpolation(bundle, n_codes=0)


# -------------------------------------------------------------- replay

def test_replay_never_reads_recorded_robot(bundle, dataset):
    demos = [NoRobotActions(d) for d in dataset.demos[:3]]
    rep = eval_replay(bundle, demos)
    assert rep.n_trials == 3
    assert sum(rep.histogram) == 3


def test_replay_with_recorded_robot_is_faithful(bundle, dataset):
    rep = eval_replay(bundle, dataset.demos, use_recorded_robot=True)
    assert rep.success_rate == 1.0
    assert rep.histogram[4] == 0


def test_replay_deterministic(bundle, dataset):
    demos = dataset.demos[:2]
    assert eval_replay(bundle, demos) == eval_replay(bundle, demos)


def test_replay_outlives_short_demo(bundle, dataset):
    d = dataset.demos[0]
    stub = type(d)(obs=d.obs[:3], actions_h=d.actions_h[:3],
                   actions_r=d.actions_r[:3], meta=d.meta)
    rep = eval_replay(bundle, [stub])
    assert rep.trials[0]["steps"] >= 3   # zero-hold keeps the episode alive


# -------------------------------------------------------------- latents

def test_export_latent_rows_and_range(bundle, dataset):
    exp = export_latent(bundle, dataset.demos)
    assert len(exp.rows) == len(dataset.demos)
    for row in exp.rows:
        assert row["strategy"] in (1, 2, 3, 4)
        assert all(-1.0 < v < 1.0 for v in row["z"])


def test_export_latent_zero_head_gives_origin(bundle, dataset):
    rec = bundle.recognizer
    keep = {k: v.copy() for k, v in rec.state_arrays("r").items()}
    rec.net.weights[-1].data[:] = 0.0
    rec.net.biases[-1].data[:] = 0.0
    try:
        exp = export_latent(bundle, dataset.demos[:2])
        assert all(v == 0.0 for row in exp.rows for v in row["z"])
    finally:
        rec.load_state_arrays("r", keep)


def test_export_latent_requires_recognizer(dataset):
    b = train(TrainConfig(mode="bc_single", seed=5, episodes=2,
                          steps_per_episode=400, workers=4), PPOConfig(),
              dataset)
    with pytest.raises(ValueError):
        export_latent(b, dataset.demos)


def test_latent_export_save_load(tmp_path, bundle, dataset):
    exp = export_latent(bundle, dataset.demos[:4])
    path = str(tmp_path / "latent.tsv")
    exp.save(path)
    back = LatentExport.load(path)
    assert back.rows == exp.rows


def test_dispersion_separated_clusters():
    rows = []
    centers = {1: (0.5, 0.5), 2: (-0.5, 0.5), 3: (0.5, -0.5), 4: (-0.5, -0.5)}
    for k, (cx, cy) in centers.items():
        for i in range(5):
            rows.append({"demo_id": "d%d%d" % (k, i), "strategy": k,
                         "z": [cx + 0.01 * i, cy - 0.01 * i]})
    d = LatentExport(rows).dispersion()
    assert d["within"] < d["between"]
    assert d["ratio"] < 0.01


def test_dispersion_needs_two_strategies():
    rows = [{"demo_id": "a", "strategy": 1, "z": [0.0, 0.0]}]
    with pytest.raises(ValueError):
        LatentExport(rows).dispersion()


# ---------------------------------------------------------- aggregation

def rep(rate, checkpoint, protocol="replay", n=10):
    s = int(round(rate * n))
    return EvalReport(protocol, n, s, (s, 0, 0, 0, n - s),
                      checkpoint=checkpoint)


def test_aggregate_identical_reports_zero_std():
    series = [[rep(0.4, "10"), rep(0.6, "20")] for _ in range(3)]
    out = aggregate_seeds(series)
    assert out["std"] == [0.0, 0.0]
    assert out["best_index"] == 1
    assert out["best_checkpoint"] == "20"


def test_aggregate_population_std():
    series = [[rep(0.4, "10")], [rep(0.5, "10")], [rep(0.6, "10")]]
    out = aggregate_seeds(series)
    assert out["best_mean"] == pytest.approx(0.5)
    assert out["best_std"] == pytest.approx(0.0816496580927726)


def test_aggregate_monotone_series_picks_last():
    series = [[rep(0.1, "10"), rep(0.2, "20"), rep(0.3, "30")]
              for _ in range(2)]
    assert aggregate_seeds(series)["best_index"] == 2


def test_aggregate_rejects_schedule_mismatch():
    with pytest.raises(ValueError):
        aggregate_seeds([[rep(0.4, "10")], [rep(0.4, "20")]])
    with pytest.raises(ValueError):
        aggregate_seeds([[rep(0.4, "10")],
                         [rep(0.4, "10", protocol="interpolation")]])
    with pytest.raises(ValueError):
        aggregate_seeds([])
