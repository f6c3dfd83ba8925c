"""Dense float64 tensors with reverse-mode differentiation.

Every differentiable operation appends itself to the computation record of
its output tensor (parent links plus a backward closure). ``backward`` walks
that record once, in reverse topological order, and accumulates gradients
into every leaf with ``requires_grad``. All data is float64; forward results
are deterministic functions of their inputs.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeError

DTYPE = np.float64


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=DTYPE)


class Tensor:
    """An n-d float64 array plus gradient bookkeeping.

    ``data`` is treated as immutable once the tensor has been used in an
    operation; optimizers rewrite leaf ``data`` in place only between graph
    builds. ``grad`` always shape-matches ``data`` when populated.
    """

    __slots__ = ("data", "requires_grad", "grad", "op", "parents", "_backward")

    def __init__(self, data, requires_grad=False, op="leaf", parents=(), backward=None):
        self.data = _as_array(data)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.op = op
        self.parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(op={self.op!r}, shape={self.data.shape}, requires_grad={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return power(self, p)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def swapaxes(self, a, b):
        return swapaxes(self, a, b)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand's shape."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _accum(t: Tensor, g: np.ndarray):
    if not t.requires_grad and t._backward is None:
        return
    t.grad = g if t.grad is None else t.grad + g


def _make(op, data, parents, backward) -> Tensor:
    # Only record the op when a gradient can flow through it.
    tracked = tuple(p for p in parents if p.requires_grad or p._backward is not None)
    if not tracked:
        return Tensor(data, op=op)
    return Tensor(data, requires_grad=True, op=op, parents=tracked, backward=backward)


def record(root: Tensor) -> list:
    """Computation record of ``root``: its DAG in topological order, leaves first."""
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor):
    """Populate ``grad`` on every requires_grad leaf reachable from ``loss``.

    ``loss`` must be scalar. Each node in the record is visited exactly once.
    """
    if loss.data.size != 1:
        raise ShapeError("backward", loss.data.shape, detail="loss must be scalar")
    order = record(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
            if node is not loss:
                node.grad = None  # free interior grads; leaves keep theirs


def zero_grads(params):
    values = params.values() if isinstance(params, dict) else params
    for p in values:
        p.grad = None


# ---------------------------------------------------------------------------
# elementwise arithmetic

def _binary(op, a, b, fwd, bwd_a, bwd_b):
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = fwd(a.data, b.data)
    except ValueError:
        raise ShapeError(op, a.data.shape, b.data.shape) from None

    def _bwd(g):
        if a.requires_grad or a._backward is not None:
            _accum(a, _unbroadcast(bwd_a(g, a.data, b.data), a.data.shape))
        if b.requires_grad or b._backward is not None:
            _accum(b, _unbroadcast(bwd_b(g, a.data, b.data), b.data.shape))

    return _make(op, data, (a, b), _bwd)


def add(a, b):
    return _binary("add", a, b, lambda x, y: x + y, lambda g, x, y: g, lambda g, x, y: g)


def sub(a, b):
    return _binary("sub", a, b, lambda x, y: x - y, lambda g, x, y: g, lambda g, x, y: -g)


def mul(a, b):
    return _binary("mul", a, b, lambda x, y: x * y, lambda g, x, y: g * y, lambda g, x, y: g * x)


def div(a, b):
    return _binary(
        "div", a, b,
        lambda x, y: x / y,
        lambda g, x, y: g / y,
        lambda g, x, y: -g * x / (y * y),
    )


def neg(a):
    a = as_tensor(a)
    return _make("neg", -a.data, (a,), lambda g: _accum(a, -g))


def power(a, p):
    a = as_tensor(a)
    p = float(p)
    data = a.data ** p

    def _bwd(g):
        _accum(a, g * p * a.data ** (p - 1.0))

    return _make("pow", data, (a,), _bwd)


def texp(a):
    a = as_tensor(a)
    data = np.exp(a.data)
    return _make("exp", data, (a,), lambda g: _accum(a, g * data))


def tlog(a):
    a = as_tensor(a)
    return _make("log", np.log(a.data), (a,), lambda g: _accum(a, g / a.data))


def tsqrt(a):
    a = as_tensor(a)
    data = np.sqrt(a.data)
    return _make("sqrt", data, (a,), lambda g: _accum(a, g * 0.5 / data))


def sigmoid(a):
    a = as_tensor(a)
    x = a.data
    data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                    np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    return _make("sigmoid", data, (a,), lambda g: _accum(a, g * data * (1.0 - data)))


def swish(a):
    """x * sigmoid(x); smooth, swish(0) == 0."""
    a = as_tensor(a)
    return mul(a, sigmoid(a))


def relu(a):
    a = as_tensor(a)
    data = np.maximum(a.data, 0.0)
    return _make("relu", data, (a,), lambda g: _accum(a, g * (a.data > 0)))


# ---------------------------------------------------------------------------
# reductions and shape ops

def tsum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def _bwd(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, a.data.shape).copy())
            return
        axes = axis if isinstance(axis, tuple) else (axis,)
        if not keepdims:
            g = np.expand_dims(g, axes)
        _accum(a, np.broadcast_to(g, a.data.shape).copy())

    return _make("sum", data, (a,), _bwd)


def tmean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    if axis is None:
        n = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        n = int(np.prod([a.data.shape[ax] for ax in axes]))
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def reshape(a, shape):
    a = as_tensor(a)
    old = a.data.shape
    try:
        data = a.data.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", old, shape) from None
    return _make("reshape", data, (a,), lambda g: _accum(a, g.reshape(old)))


def swapaxes(a, ax1, ax2):
    a = as_tensor(a)
    data = np.swapaxes(a.data, ax1, ax2)
    return _make("swapaxes", data, (a,), lambda g: _accum(a, np.swapaxes(g, ax1, ax2)))


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError("concat", *[t.data.shape for t in tensors]) from None
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def _bwd(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            _accum(t, g[tuple(idx)])

    return _make("concat", data, tuple(tensors), _bwd)


def getitem(a, idx):
    a = as_tensor(a)
    data = a.data[idx]

    def _bwd(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        _accum(a, full)

    return _make("slice", data, (a,), _bwd)


def gather_rows(table, ids):
    """Rows ``table[ids]`` with scatter-add backward (embedding lookup)."""
    table = as_tensor(table)
    ids = np.asarray(ids, dtype=np.intp)
    data = table.data[ids]

    def _bwd(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids, g)
        _accum(table, full)

    return _make("gather", data, (table,), _bwd)


# ---------------------------------------------------------------------------
# linear algebra

def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError("matmul", a.data.shape, b.data.shape, detail="operands must be >= 2-d")
    if a.data.shape[-1] != b.data.shape[-2]:
        raise ShapeError("matmul", a.data.shape, b.data.shape)
    data = np.matmul(a.data, b.data)

    def _bwd(g):
        if a.requires_grad or a._backward is not None:
            ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
            _accum(a, _unbroadcast(ga, a.data.shape))
        if b.requires_grad or b._backward is not None:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            _accum(b, _unbroadcast(gb, b.data.shape))

    return _make("matmul", data, (a, b), _bwd)


def softmax(a, axis=-1):
    """Softmax along ``axis``; the stabilizing max-shift carries no gradient."""
    a = as_tensor(a)
    shift = Tensor(a.data.max(axis=axis, keepdims=True))
    e = texp(sub(a, shift))
    return div(e, tsum(e, axis=axis, keepdims=True))


def layer_norm(a, gain, bias, axis=-1, eps=1e-5):
    """Normalize to zero mean / unit variance along ``axis``, then affine."""
    a = as_tensor(a)
    mu = tmean(a, axis=axis, keepdims=True)
    centered = sub(a, mu)
    var = tmean(mul(centered, centered), axis=axis, keepdims=True)
    normed = div(centered, tsqrt(add(var, eps)))
    return add(mul(normed, gain), bias)


def conv2d(x, w):
    """2-d cross-correlation, stride 1, zero-padded so output size equals input.

    ``x`` is [batch, in_ch, H, W]; ``w`` is [out_ch, in_ch, kh, kw] with
    arbitrary kernel height/width. Even kernels pad one extra cell on the
    bottom/right.
    """
    x, w = as_tensor(x), as_tensor(w)
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ShapeError("conv2d", x.data.shape, w.data.shape, detail="need 4-d input and kernel")
    B, cin, H, W = x.data.shape
    cout, cin_w, kh, kw = w.data.shape
    if cin != cin_w:
        raise ShapeError("conv2d", x.data.shape, w.data.shape, detail="channel mismatch")
    pt, pl = (kh - 1) // 2, (kw - 1) // 2
    pb, pr = kh - 1 - pt, kw - 1 - pl
    xp = np.pad(x.data, ((0, 0), (0, 0), (pt, pb), (pl, pr)))
    # one full H x W view per kernel tap: [B, cin, kh, kw, H, W]
    win = sliding_window_view(xp, (H, W), axis=(2, 3))
    data = np.einsum("ocab,bcabhw->bohw", w.data, win, optimize=True)

    def _bwd(g):
        if w.requires_grad or w._backward is not None:
            gw = np.einsum("bohw,bcabhw->ocab", g, win, optimize=True)
            _accum(w, gw)
        if x.requires_grad or x._backward is not None:
            gxp = np.zeros_like(xp)
            for a_ in range(kh):
                for b_ in range(kw):
                    gxp[:, :, a_:a_ + H, b_:b_ + W] += np.einsum(
                        "bohw,oc->bchw", g, w.data[:, :, a_, b_], optimize=True)
            _accum(x, gxp[:, :, pt:pt + H, pl:pl + W])

    return _make("conv2d", data, (x, w), _bwd)
