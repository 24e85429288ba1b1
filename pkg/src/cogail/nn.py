"""Small neural-network toolkit on top of the autodiff engine.

Everything is float64 numpy.  Each module exposes two forward paths:
``forward`` builds the differentiable graph for training updates, and
``forward_np`` runs the same math on raw arrays for rollouts and
evaluation where no gradients are needed.
"""

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

_LOG_2PI = float(np.log(2.0 * np.pi))

ACTIVATIONS = ("tanh", "identity")


class GradientError(RuntimeError):
    """Raised when an optimizer step encounters non-finite gradients."""


def orthogonal_init(rng: np.random.Generator, shape, gain: float) -> np.ndarray:
    """Orthogonal weight matrix of `shape` (rows, cols), scaled by `gain`."""
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    # fix the sign ambiguity of the decomposition so init is deterministic
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return np.ascontiguousarray(gain * q[:rows, :cols], dtype=np.float64)


class MLP:
    """Fully connected stack.

    sizes: [in, h1, ..., out]; activations: one tag per layer output,
    each "tanh" or "identity".  Weights are orthogonal (gain sqrt(2) on
    hidden layers unless overridden), biases start at zero.
    """

    def __init__(self, sizes, activations, rng: np.random.Generator,
                 out_gain: float = 1.0):
        if len(activations) != len(sizes) - 1:
            raise ValueError("need one activation per layer")
        for act in activations:
            if act not in ACTIVATIONS:
                raise ValueError("unknown activation %r" % (act,))
        self.sizes = list(sizes)
        self.activations = list(activations)
        self.weights = []
        self.biases = []
        n_layers = len(sizes) - 1
        for i in range(n_layers):
            gain = out_gain if i == n_layers - 1 else np.sqrt(2.0)
            w = Tensor(orthogonal_init(rng, (sizes[i], sizes[i + 1]), gain),
                       requires_grad=True)
            b = Tensor(np.zeros(sizes[i + 1]), requires_grad=True)
            self.weights.append(w)
            self.biases.append(b)

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def forward(self, x: Tensor) -> Tensor:
        for w, b, act in zip(self.weights, self.biases, self.activations):
            x = ad.add(ad.matmul(x, w), b)
            if act == "tanh":
                x = ad.tanh(x)
        return x

    def forward_np(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        for w, b, act in zip(self.weights, self.biases, self.activations):
            x = x @ w.data + b.data
            if act == "tanh":
                x = np.tanh(x)
        return x[0] if squeeze else x

    def state_arrays(self, prefix: str) -> dict:
        out = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out["%s.w%d" % (prefix, i)] = w.data
            out["%s.b%d" % (prefix, i)] = b.data
        return out

    def load_state_arrays(self, prefix: str, arrays: dict):
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            w.data = np.asarray(arrays["%s.w%d" % (prefix, i)], dtype=np.float64)
            b.data = np.asarray(arrays["%s.b%d" % (prefix, i)], dtype=np.float64)


def gaussian_logprob(mean: np.ndarray, log_std: np.ndarray,
                     action: np.ndarray) -> np.ndarray:
    """Log-density of a diagonal Gaussian; sums over the last axis."""
    mean = np.asarray(mean, dtype=np.float64)
    action = np.asarray(action, dtype=np.float64)
    z = (action - mean) / np.exp(log_std)
    return -0.5 * ((z * z).sum(axis=-1)
                   + 2.0 * np.sum(log_std)
                   + mean.shape[-1] * _LOG_2PI)


class GaussianHead:
    """Diagonal Gaussian with a state-independent, clamped log-std.

    The ceiling matters: the entropy bonus pushes log-std up whenever the
    surrogate gradient is flat, and unit-clipped actions stop carrying any
    information once the std grows past 1.
    """

    def __init__(self, dim: int, init: float = 0.0,
                 lo: float = -5.0, hi: float = 0.0):
        self.dim = dim
        self.lo = lo
        self.hi = hi
        self.log_std = Tensor(np.full(dim, float(init)), requires_grad=True)
        self.clamp()

    def clamp(self):
        np.clip(self.log_std.data, self.lo, self.hi, out=self.log_std.data)

    def std(self) -> np.ndarray:
        return np.exp(self.log_std.data)

    def sample(self, mean: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return mean + rng.standard_normal(mean.shape) * self.std()

    def logprob_np(self, mean, action) -> np.ndarray:
        return gaussian_logprob(mean, self.log_std.data, action)

    def logprob(self, mean: Tensor, action: np.ndarray) -> Tensor:
        """Graph version; `action` is data, gradients flow to mean/log_std."""
        act = Tensor(action)
        z = ad.div(ad.sub(act, mean), ad.exp(self.log_std))
        quad = ad.tsum(ad.square(z), axis=1)
        const = ad.add(ad.tsum(ad.mul(self.log_std, Tensor(2.0))),
                       Tensor(self.dim * _LOG_2PI))
        return ad.mul(ad.add(quad, const), Tensor(-0.5))

    def entropy(self) -> Tensor:
        """Differential entropy, summed over dimensions."""
        per_dim = ad.add(self.log_std, Tensor(0.5 * (1.0 + _LOG_2PI)))
        return ad.tsum(per_dim)


class Adam:
    """Adam with bias correction.

    Parameters whose grad is None are skipped entirely (no moment decay),
    so a loss that touches only part of the parameter set leaves the rest
    bit-identical.
    """

    def __init__(self, params, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = [0] * len(self.params)
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            g = p.grad
            if not np.all(np.isfinite(g)):
                raise GradientError(
                    "non-finite gradient in parameter %d (shape %s, "
                    "|g|_max=%r)" % (i, p.data.shape, float(np.abs(g).max())))
            self.t[i] += 1
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[i] / (1.0 - self.beta1 ** self.t[i])
            v_hat = self.v[i] / (1.0 - self.beta2 ** self.t[i])
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self):
        ad.zero_grads(self.params)

    def state_arrays(self, prefix: str) -> dict:
        out = {"%s.t" % prefix: np.array(self.t, dtype=np.float64)}
        for i in range(len(self.params)):
            out["%s.m%d" % (prefix, i)] = self.m[i]
            out["%s.v%d" % (prefix, i)] = self.v[i]
        return out

    def load_state_arrays(self, prefix: str, arrays: dict):
        self.t = [int(x) for x in arrays["%s.t" % prefix]]
        for i in range(len(self.params)):
            self.m[i] = np.asarray(arrays["%s.m%d" % (prefix, i)], dtype=np.float64)
            self.v[i] = np.asarray(arrays["%s.v%d" % (prefix, i)], dtype=np.float64)


def clip_global_norm(params, max_norm: float) -> float:
    """Scale all gradients so their joint L2 norm is at most max_norm."""
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float((p.grad * p.grad).sum())
    norm = float(np.sqrt(total))
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= scale
    return norm


def finite_diff_check(loss_fn, params, *, eps: float = 1e-5,
                      rng: np.random.Generator, min_coords: int = 64):
    """Compare backward() gradients against central finite differences.

    loss_fn must rebuild the graph from current parameter data on every
    call and be deterministic.  Returns (max relative error, n checked).
    """
    params = list(params)
    ad.zero_grads(params)
    loss = loss_fn()
    ad.backward(loss, params)
    analytic = [p.grad.copy() for p in params]

    coords = []
    for pi, p in enumerate(params):
        for fi in range(p.data.size):
            coords.append((pi, fi))
    if len(coords) > min_coords:
        idx = rng.choice(len(coords), size=min_coords, replace=False)
        coords = [coords[i] for i in idx]

    max_rel = 0.0
    for pi, fi in coords:
        p = params[pi]
        orig = p.data.flat[fi]
        p.data.flat[fi] = orig + eps
        up = float(loss_fn().data)
        p.data.flat[fi] = orig - eps
        down = float(loss_fn().data)
        p.data.flat[fi] = orig
        numeric = (up - down) / (2.0 * eps)
        ga = analytic[pi].flat[fi]
        rel = abs(ga - numeric) / max(abs(ga), abs(numeric), 1e-8)
        max_rel = max(max_rel, rel)
    return max_rel, len(coords)
