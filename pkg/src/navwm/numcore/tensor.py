"""Dense float64 tensors with tape-based reverse-mode differentiation.

Ops record onto the active :class:`Tape` (a Wengert list, appended in
creation order, so the list is already topologically ordered). ``backward``
sweeps the tape once in reverse and accumulates gradients into the ``grad``
buffer of every reachable leaf tensor with ``requires_grad``. With no tape
active, ops run in plain inference mode and record nothing.
"""

from __future__ import annotations

import numpy as np

LARGE = 1e9  # additive-mask "minus infinity"

_TAPES: list["Tape"] = []
_CHECKED = False


class ShapeError(ValueError):
    pass


class NumericsError(FloatingPointError):
    pass


def set_checked(flag: bool):
    """Enable NaN/Inf checking after every op forward (slow; off by default)."""
    global _CHECKED
    _CHECKED = bool(flag)


def _check(name, arr):
    if _CHECKED and not np.all(np.isfinite(arr)):
        raise NumericsError(f"op {name} produced non-finite values")


class Tensor:
    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def zero_grad(self):
        self.grad = None

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    __add__ = lambda self, other: add(self, other)
    __sub__ = lambda self, other: sub(self, other)
    __mul__ = lambda self, other: mul(self, other)
    __neg__ = lambda self: scale(self, -1.0)
    __matmul__ = lambda self, other: matmul(self, other)
    __getitem__ = lambda self, key: index(self, key)


class Tape:
    """Recorded op list; enter to capture, then call backward(loss)."""

    __slots__ = ("ops", "produced")

    def __init__(self):
        self.ops = []        # (out, parents, backward_fn)
        self.produced = set()

    def __enter__(self):
        _TAPES.append(self)
        return self

    def __exit__(self, *exc):
        _TAPES.pop()
        return False

    def record(self, out, parents, backward_fn):
        self.ops.append((out, parents, backward_fn))
        self.produced.add(id(out))


def active_tape() -> Tape | None:
    return _TAPES[-1] if _TAPES else None


def grad_enabled() -> bool:
    return bool(_TAPES)


def _make(data, parents, backward_fn, name):
    """Wrap an op result; record on the tape when any parent needs grad."""
    _check(name, data)
    out = Tensor(data)
    tape = _TAPES[-1] if _TAPES else None
    if tape is not None and any(p.requires_grad for p in parents if isinstance(p, Tensor)):
        out.requires_grad = True
        tape.record(out, parents, backward_fn)
    return out


def backward(loss: Tensor, tape: Tape | None = None):
    """Reverse sweep from a scalar loss; accumulates into leaf .grad buffers."""
    tape = tape or active_tape()
    if tape is None:
        raise RuntimeError("backward() called with no active tape")
    if loss.data.shape != ():
        raise ShapeError(f"backward() needs a scalar loss, got shape {loss.data.shape}")
    grads = {id(loss): np.ones(())}
    produced = tape.produced
    for out, parents, fn in reversed(tape.ops):
        g = grads.pop(id(out), None)
        if g is None:
            continue
        for p, pg in zip(parents, fn(g)):
            if pg is None or not isinstance(p, Tensor) or not p.requires_grad:
                continue
            if id(p) in produced:
                acc = grads.get(id(p))
                grads[id(p)] = pg if acc is None else acc + pg
            else:
                p.grad = pg.copy() if p.grad is None else p.grad + pg


def _unbroadcast(g, shape):
    """Sum a broadcast gradient back down to the original operand shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def _data(x):
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


# ---------------------------------------------------------------------------
# arithmetic


def add(a, b):
    ad, bd = _data(a), _data(b)
    try:
        out = ad + bd
    except ValueError:
        raise ShapeError(f"add: incompatible shapes {ad.shape} and {bd.shape}") from None

    def bwd(g):
        return _unbroadcast(g, ad.shape), _unbroadcast(g, bd.shape)

    return _make(out, (a, b), bwd, "add")


def sub(a, b):
    ad, bd = _data(a), _data(b)
    try:
        out = ad - bd
    except ValueError:
        raise ShapeError(f"sub: incompatible shapes {ad.shape} and {bd.shape}") from None

    def bwd(g):
        return _unbroadcast(g, ad.shape), -_unbroadcast(g, bd.shape)

    return _make(out, (a, b), bwd, "sub")


def mul(a, b):
    ad, bd = _data(a), _data(b)
    try:
        out = ad * bd
    except ValueError:
        raise ShapeError(f"mul: incompatible shapes {ad.shape} and {bd.shape}") from None

    def bwd(g):
        return _unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)

    return _make(out, (a, b), bwd, "mul")


def scale(a, s: float):
    s = float(s)

    def bwd(g):
        return (g * s,)

    return _make(a.data * s, (a,), bwd, "scale")


def matmul(a, b):
    ad, bd = _data(a), _data(b)
    if ad.shape[-1] != bd.shape[-2 if bd.ndim > 1 else 0]:
        raise ShapeError(f"matmul: incompatible shapes {ad.shape} and {bd.shape}")
    if not (ad.ndim == bd.ndim or bd.ndim == 2):
        raise ShapeError(f"matmul: unsupported rank combination {ad.shape} @ {bd.shape}")
    out = ad @ bd
    need_a = isinstance(a, Tensor) and a.requires_grad
    need_b = isinstance(b, Tensor) and b.requires_grad

    def bwd(g):
        ga = gb = None
        if need_a:
            ga = g @ np.swapaxes(bd, -1, -2)
        if need_b:
            if bd.ndim == 2 and ad.ndim > 2:
                gb = ad.reshape(-1, ad.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            else:
                gb = np.swapaxes(ad, -1, -2) @ g
        return ga, gb

    return _make(out, (a, b), bwd, "matmul")


def powc(a, p: float):
    p = float(p)
    ad = a.data

    def bwd(g):
        return (g * p * ad ** (p - 1.0),)

    return _make(ad ** p, (a,), bwd, "powc")


# ---------------------------------------------------------------------------
# shape ops


def transpose(a, axes=None):
    if axes is None:
        axes = tuple(range(a.ndim - 2)) + (a.ndim - 1, a.ndim - 2)
    inv = tuple(np.argsort(axes))

    def bwd(g):
        return (np.transpose(g, inv),)

    return _make(np.transpose(a.data, axes), (a,), bwd, "transpose")


def reshape(a, shape):
    old = a.data.shape

    def bwd(g):
        return (g.reshape(old),)

    return _make(a.data.reshape(shape), (a,), bwd, "reshape")


def concat(tensors, axis=0):
    datas = [_data(t) for t in tensors]
    sizes = [d.shape[axis] for d in datas]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        return tuple(np.split(g, splits, axis=axis))

    return _make(np.concatenate(datas, axis=axis), tuple(tensors), bwd, "concat")


def index(a, key):
    out = a.data[key]
    shape = a.data.shape
    fancy = isinstance(key, np.ndarray) or (
        isinstance(key, tuple) and any(isinstance(k, np.ndarray) for k in key))

    def bwd(g):
        ga = np.zeros(shape)
        if fancy:
            np.add.at(ga, key, g)
        else:
            ga[key] += g
        return (ga,)

    return _make(out, (a,), bwd, "index")


def embedding_lookup(table, ids):
    ids = np.asarray(ids, dtype=np.int64)
    if ids.min(initial=0) < 0 or (ids.size and ids.max() >= table.shape[0]):
        raise ShapeError(f"embedding_lookup: ids out of range for table {table.shape}")
    vshape = table.shape

    def bwd(g):
        gt = np.zeros(vshape)
        np.add.at(gt, ids, g)
        return (gt,)

    return _make(table.data[ids], (table,), bwd, "embedding_lookup")


# ---------------------------------------------------------------------------
# nonlinearities


def relu(a):
    ad = a.data
    pos = ad > 0

    def bwd(g):
        return (g * pos,)

    return _make(np.where(pos, ad, 0.0), (a,), bwd, "relu")


def sigmoid(a):
    out = 1.0 / (1.0 + np.exp(-a.data))

    def bwd(g):
        return (g * out * (1.0 - out),)

    return _make(out, (a,), bwd, "sigmoid")


def tanh(a):
    out = np.tanh(a.data)

    def bwd(g):
        return (g * (1.0 - out * out),)

    return _make(out, (a,), bwd, "tanh")


_GELU_C = np.sqrt(2.0 / np.pi)


def gelu(a):
    x = a.data
    u = _GELU_C * (x + 0.044715 * x ** 3)
    t = np.tanh(u)
    out = 0.5 * x * (1.0 + t)

    def bwd(g):
        du = _GELU_C * (1.0 + 3 * 0.044715 * x * x)
        return (g * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du),)

    return _make(out, (a,), bwd, "gelu")


def softplus(a):
    x = a.data
    out = np.logaddexp(0.0, x)

    def bwd(g):
        return (g / (1.0 + np.exp(-x)),)

    return _make(out, (a,), bwd, "softplus")


def log(a):
    ad = a.data
    if np.any(ad <= 0):
        raise NumericsError("log: non-positive input")

    def bwd(g):
        return (g / ad,)

    return _make(np.log(ad), (a,), bwd, "log")


def exp(a):
    out = np.exp(a.data)

    def bwd(g):
        return (g * out,)

    return _make(out, (a,), bwd, "exp")


# ---------------------------------------------------------------------------
# reductions


def sum_(a, axis=None):
    shape = a.data.shape

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return _make(np.asarray(a.data.sum(axis=axis)), (a,), bwd, "sum")


def mean(a, axis=None):
    shape = a.data.shape
    n = a.data.size if axis is None else shape[axis]

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g / n, shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis) / n, shape).copy(),)

    return _make(np.asarray(a.data.mean(axis=axis)), (a,), bwd, "mean")


# ---------------------------------------------------------------------------
# normalization and attention


def layer_norm(x, gain, bias, eps=1e-5):
    """Normalize over the last axis, then scale and shift."""
    xd = x.data
    mu = xd.mean(axis=-1, keepdims=True)
    var = xd.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (xd - mu) * inv
    out = xhat * gain.data + bias.data

    def bwd(g):
        dxhat = g * gain.data
        gx = inv * (dxhat
                    - dxhat.mean(axis=-1, keepdims=True)
                    - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
        axes = tuple(range(g.ndim - 1))
        ggain = (g * xhat).sum(axis=axes)
        gbias = g.sum(axis=axes)
        return gx, ggain, gbias

    return _make(out, (x, gain, bias), bwd, "layer_norm")


def softmax_masked(logits, additive_mask):
    """Row softmax over the last axis after adding a {0, -LARGE} mask.

    Rows whose mask entries are all -LARGE come back as all-zero rows and
    contribute zero gradient.
    """
    mask = np.asarray(additive_mask, dtype=np.float64)
    try:
        z = logits.data + mask
    except ValueError:
        raise ShapeError(
            f"softmax_masked: incompatible shapes {logits.data.shape} and {mask.shape}") from None
    dead = np.broadcast_to(mask, z.shape).max(axis=-1) <= -LARGE / 2
    m = z.max(axis=-1, keepdims=True)
    e = np.exp(z - m)
    s = e.sum(axis=-1, keepdims=True)
    s[dead] = 1.0  # avoid 0/0 on fully masked rows
    out = e / s
    out[dead] = 0.0

    def bwd(g):
        dot = (g * out).sum(axis=-1, keepdims=True)
        return (out * (g - dot),)

    return _make(out, (logits,), bwd, "softmax_masked")
