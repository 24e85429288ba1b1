import numpy as np
import pytest
import scipy.stats

from cogail import autodiff as ad
from cogail import nn
from cogail.autodiff import Tensor
from cogail.rngs import derive_rng


def test_mlp_identity_layer():
    m = nn.MLP([2, 2], ["identity"], derive_rng(0))
    m.weights[0].data = np.eye(2)
    m.biases[0].data = np.zeros(2)
    out = m.forward_np(np.array([0.3, -0.7]))
    assert np.allclose(out, [0.3, -0.7])


def test_mlp_single_tanh_layer():
    m = nn.MLP([1, 1], ["tanh"], derive_rng(0))
    m.weights[0].data = np.array([[2.0]])
    m.biases[0].data = np.array([1.0])
    out = m.forward_np(np.array([0.0]))
    assert out[0] == pytest.approx(0.76159, abs=1e-5)


def test_mlp_zero_weights_give_zero_output():
    m = nn.MLP([3, 4], ["tanh"], derive_rng(0))
    m.weights[0].data[:] = 0.0
    out = m.forward_np(np.array([5.0, -2.0, 0.1]))
    assert np.all(out == 0.0)


def test_mlp_rejects_bad_spec():
    with pytest.raises(ValueError):
        nn.MLP([3, 4, 2], ["tanh"], derive_rng(0))
    with pytest.raises(ValueError):
        nn.MLP([3, 4], ["relu"], derive_rng(0))


def test_mlp_graph_and_np_paths_agree():
    rng = derive_rng(1)
    m = nn.MLP([10, 16, 16, 4], ["tanh", "tanh", "identity"], rng)
    x = rng.standard_normal((7, 10))
    graph_out = m.forward(Tensor(x)).data
    np_out = m.forward_np(x)
    assert np.array_equal(graph_out, np_out)


def test_orthogonal_init_is_orthogonal():
    w = nn.orthogonal_init(derive_rng(3), (128, 128), 1.0)
    assert np.allclose(w @ w.T, np.eye(128), atol=1e-10)
    tall = nn.orthogonal_init(derive_rng(4), (64, 16), 1.0)
    assert np.allclose(tall.T @ tall, np.eye(16), atol=1e-10)


def test_gaussian_logprob_pinned_values():
    assert nn.gaussian_logprob(np.zeros(1), np.zeros(1), np.zeros(1)) == \
        pytest.approx(-0.91894, abs=1e-5)
    assert nn.gaussian_logprob(np.zeros(2), np.zeros(2), np.zeros(2)) == \
        pytest.approx(-1.83788, abs=1e-5)
    got = nn.gaussian_logprob(np.array([1.0]), np.log(np.array([0.5])),
                              np.array([1.5]))
    assert got == pytest.approx(-0.72579, abs=1e-5)


def test_gaussian_logprob_matches_scipy():
    rng = derive_rng(5)
    for _ in range(20):
        d = int(rng.integers(1, 5))
        mean = rng.standard_normal(d)
        log_std = rng.uniform(-2, 1, d)
        a = rng.standard_normal(d)
        want = scipy.stats.multivariate_normal(
            mean=mean, cov=np.diag(np.exp(2 * log_std))).logpdf(a)
        assert nn.gaussian_logprob(mean, log_std, a) == pytest.approx(want, rel=1e-10)


def test_gaussian_logprob_integrates_to_one():
    # MC estimate of the density mass over a +-3 sigma box, d=1
    mean, log_std = np.array([0.3]), np.array([0.2])
    sigma = float(np.exp(log_std[0]))
    rng = derive_rng(6)
    xs = rng.uniform(mean[0] - 3 * sigma, mean[0] + 3 * sigma, size=(100_000, 1))
    lp = nn.gaussian_logprob(mean, log_std, xs)
    est = float(np.exp(lp).mean() * 6 * sigma)
    assert abs(est - 1.0) < 0.05


def test_gaussian_head_graph_logprob_matches_np():
    rng = derive_rng(7)
    head = nn.GaussianHead(4, init=-0.3)
    mean = rng.standard_normal((6, 4))
    act = rng.standard_normal((6, 4))
    graph = head.logprob(Tensor(mean), act).data
    assert np.allclose(graph, head.logprob_np(mean, act), atol=1e-12)


def test_gaussian_sample_properties():
    head = nn.GaussianHead(2, init=-5.0)
    mu = np.array([0.4, -0.2])
    s = head.sample(mu, derive_rng(9))
    assert np.all(np.abs(s - mu) < 1e-2)
    s1 = head.sample(mu, derive_rng(9))
    s2 = head.sample(mu, derive_rng(9))
    assert np.array_equal(s1, s2)


def test_gaussian_head_clamp():
    head = nn.GaussianHead(3, init=0.0)
    head.log_std.data[:] = [-9.0, 0.0, 9.0]
    head.clamp()
    assert np.allclose(head.log_std.data, [-5.0, 0.0, 0.0])


def test_gaussian_entropy_value():
    head = nn.GaussianHead(2, init=0.0)
    want = 2 * 0.5 * (1 + np.log(2 * np.pi))
    assert head.entropy().item() == pytest.approx(want, rel=1e-12)


def test_adam_zero_grad_keeps_params():
    p = Tensor(np.ones(3), requires_grad=True)
    opt = nn.Adam([p], lr=0.1)
    p.grad = np.zeros(3)
    opt.step()
    assert np.allclose(p.data, 1.0)


def test_adam_first_step_is_lr_times_sign():
    p = Tensor(np.array([1.0, 1.0]), requires_grad=True)
    opt = nn.Adam([p], lr=0.01)
    p.grad = np.array([0.3, -2.0])
    opt.step()
    assert np.allclose(p.data, [1.0 - 0.01, 1.0 + 0.01], atol=1e-6)


def test_adam_matches_scalar_hand_computation():
    # two steps with constant gradient g, checked against the textbook recursion
    g, lr, b1, b2, eps = 0.5, 0.1, 0.9, 0.999, 1e-8
    p = Tensor(np.array([0.0]), requires_grad=True)
    opt = nn.Adam([p], lr=lr)
    theta, m, v = 0.0, 0.0, 0.0
    for t in (1, 2):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta -= lr * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
        p.grad = np.array([g])
        opt.step()
        assert p.data[0] == pytest.approx(theta, rel=1e-12)


def test_adam_missing_grad_param_skipped():
    p = Tensor(np.ones(2), requires_grad=True)
    q = Tensor(np.ones(2), requires_grad=True)
    opt = nn.Adam([p, q], lr=0.1)
    p.grad = np.ones(2)
    q.grad = None
    opt.step()
    assert np.allclose(q.data, 1.0)
    assert not np.allclose(p.data, 1.0)
    # the skipped param accumulates no momentum: a later lone step on q
    # starting from zero moments moves it by exactly -lr*sign(g)
    q.grad = np.full(2, 0.7)
    p.grad = None
    opt.step()
    assert np.allclose(q.data, 1.0 - 0.1, atol=1e-6)


def test_adam_nan_gradient_aborts():
    p = Tensor(np.ones(2), requires_grad=True)
    opt = nn.Adam([p], lr=0.1)
    p.grad = np.array([np.nan, 0.0])
    with pytest.raises(nn.GradientError):
        opt.step()


def test_clip_global_norm():
    a = Tensor(np.zeros(3), requires_grad=True)
    b = Tensor(np.zeros(4), requires_grad=True)
    a.grad = np.full(3, 3.0)
    b.grad = np.full(4, 4.0)
    norm = nn.clip_global_norm([a, b], 0.5)
    assert norm == pytest.approx(np.sqrt(27 + 64))
    joint = np.sqrt((a.grad ** 2).sum() + (b.grad ** 2).sum())
    assert joint == pytest.approx(0.5)
    # already small -> untouched
    a.grad = np.array([0.1, 0.0, 0.0])
    b.grad = np.zeros(4)
    nn.clip_global_norm([a, b], 0.5)
    assert a.grad[0] == pytest.approx(0.1)


def test_finite_diff_quadratic():
    theta = Tensor(np.arange(1.0, 6.0), requires_grad=True)

    def loss_fn():
        return ad.tsum(ad.square(theta))

    err, n = nn.finite_diff_check(loss_fn, [theta], rng=derive_rng(10))
    assert n == 5
    assert err < 1e-8


def test_finite_diff_constant_loss():
    theta = Tensor(np.ones(4), requires_grad=True)

    def loss_fn():
        return ad.tsum(ad.mul(theta, Tensor(np.zeros(4))))

    err, _ = nn.finite_diff_check(loss_fn, [theta], rng=derive_rng(11))
    assert err == 0.0


def test_finite_diff_two_layer_net():
    rng = derive_rng(12)
    m = nn.MLP([6, 8, 1], ["tanh", "identity"], rng)
    x = rng.standard_normal((16, 6))

    def loss_fn():
        return ad.tmean(ad.square(m.forward(Tensor(x))))

    err, n = nn.finite_diff_check(loss_fn, m.params(), rng=rng, min_coords=64)
    assert n == 64
    assert err < 1e-4
