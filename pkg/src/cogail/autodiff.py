"""Reverse-mode automatic differentiation on numpy float64 arrays.

The graph is built eagerly: each op returns a Tensor that remembers its
parent tensors and a closure routing the output gradient back to them.
``backward`` walks the graph once in reverse topological order and
accumulates gradients on every tensor that requires them.

Only the ops needed by the training losses are provided.  matmul is
strictly 2-D; elementwise ops broadcast like numpy and gradients are
summed back down to each parent's shape.
"""

import numpy as np

_LOG_2PI = float(np.log(2.0 * np.pi))


class Tensor:
    """A node in the computation graph wrapping a float64 ndarray."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_bwd")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._bwd = None

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def backward(self):
        """Seed this (scalar) tensor with gradient 1 and propagate."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar tensor, got shape %s"
                             % (self.data.shape,))
        if not self.requires_grad:
            raise ValueError("backward() on a tensor with no gradient path")
        self.grad = np.ones_like(self.data)
        for node in reversed(_topo_order(self)):
            if node._bwd is not None:
                node._bwd(node.grad)

    def __repr__(self):
        return "Tensor(shape=%s, requires_grad=%s)" % (self.data.shape, self.requires_grad)

    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __truediv__(self, other):
        return div(self, _as_tensor(other))

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, bwd):
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._bwd = bwd
    return out


def _accum(t: Tensor, g):
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(g, shape):
    """Sum gradient g down to `shape` (undo numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, (gs, ss) in enumerate(zip(g.shape, shape)):
        if ss == 1 and gs != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _topo_order(root):
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss: Tensor, params=()):
    """Run backprop from `loss`; parameters off the graph get zero grads."""
    loss.backward()
    for p in params:
        if p.requires_grad and p.grad is None:
            p.grad = np.zeros_like(p.data)


def zero_grads(params):
    for p in params:
        p.grad = None


# ---------------------------------------------------------------- ops

def add(a: Tensor, b: Tensor):
    def bwd(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))
    return _make(a.data + b.data, (a, b), bwd)


def sub(a: Tensor, b: Tensor):
    def bwd(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(-g, b.data.shape))
    return _make(a.data - b.data, (a, b), bwd)


def mul(a: Tensor, b: Tensor):
    def bwd(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))
    return _make(a.data * b.data, (a, b), bwd)


def div(a: Tensor, b: Tensor):
    out_data = a.data / b.data

    def bwd(g):
        _accum(a, _unbroadcast(g / b.data, a.data.shape))
        _accum(b, _unbroadcast(-g * out_data / b.data, b.data.shape))
    return _make(out_data, (a, b), bwd)


def neg(a: Tensor):
    def bwd(g):
        _accum(a, -g)
    return _make(-a.data, (a,), bwd)


def matmul(a: Tensor, b: Tensor):
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError("matmul expects 2-D operands")

    def bwd(g):
        _accum(a, g @ b.data.T)
        _accum(b, a.data.T @ g)
    return _make(a.data @ b.data, (a, b), bwd)


def tanh(a: Tensor):
    out_data = np.tanh(a.data)

    def bwd(g):
        _accum(a, g * (1.0 - out_data * out_data))
    return _make(out_data, (a,), bwd)


def sigmoid(a: Tensor):
    # numerically stable logistic
    x = a.data
    out_data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                        np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

    def bwd(g):
        _accum(a, g * out_data * (1.0 - out_data))
    return _make(out_data, (a,), bwd)


def softplus(a: Tensor):
    out_data = np.logaddexp(0.0, a.data)
    sig = np.where(a.data >= 0, 1.0 / (1.0 + np.exp(-np.abs(a.data))),
                   np.exp(-np.abs(a.data)) / (1.0 + np.exp(-np.abs(a.data))))

    def bwd(g):
        _accum(a, g * sig)
    return _make(out_data, (a,), bwd)


def exp(a: Tensor):
    out_data = np.exp(a.data)

    def bwd(g):
        _accum(a, g * out_data)
    return _make(out_data, (a,), bwd)


def log(a: Tensor):
    def bwd(g):
        _accum(a, g / a.data)
    return _make(np.log(a.data), (a,), bwd)


def square(a: Tensor):
    def bwd(g):
        _accum(a, g * 2.0 * a.data)
    return _make(a.data * a.data, (a,), bwd)


def sqrt(a: Tensor):
    out_data = np.sqrt(a.data)

    def bwd(g):
        _accum(a, g * 0.5 / out_data)
    return _make(out_data, (a,), bwd)


def clip(a: Tensor, lo: float, hi: float):
    """Clamp values; gradient passes through inside [lo, hi], zero outside."""
    mask = (a.data >= lo) & (a.data <= hi)

    def bwd(g):
        _accum(a, g * mask)
    return _make(np.clip(a.data, lo, hi), (a,), bwd)


def tsum(a: Tensor, axis=None, keepdims=False):
    def bwd(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, a.data.shape).copy())
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            _accum(a, np.broadcast_to(gg, a.data.shape).copy())
    return _make(a.data.sum(axis=axis, keepdims=keepdims), (a,), bwd)


def tmean(a: Tensor, axis=None, keepdims=False):
    n = a.data.size if axis is None else a.data.shape[axis]

    def bwd(g):
        if axis is None:
            _accum(a, np.broadcast_to(g / n, a.data.shape).copy())
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            _accum(a, np.broadcast_to(gg / n, a.data.shape).copy())
    return _make(a.data.mean(axis=axis, keepdims=keepdims), (a,), bwd)


def minimum(a: Tensor, b: Tensor):
    """Elementwise min; ties route the gradient to the first argument."""
    take_a = a.data <= b.data

    def bwd(g):
        _accum(a, _unbroadcast(g * take_a, a.data.shape))
        _accum(b, _unbroadcast(g * ~take_a, b.data.shape))
    return _make(np.minimum(a.data, b.data), (a, b), bwd)


def concat(parts, axis=1):
    parts = list(parts)
    sizes = [p.data.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        for p, piece in zip(parts, np.split(g, splits, axis=axis)):
            _accum(p, piece)
    return _make(np.concatenate([p.data for p in parts], axis=axis), tuple(parts), bwd)


def slice_cols(a: Tensor, start: int, stop: int):
    def bwd(g):
        full = np.zeros_like(a.data)
        full[:, start:stop] = g
        _accum(a, full)
    return _make(a.data[:, start:stop], (a,), bwd)
