"""Training losses: MSE, cross-entropy, and the scale-invariant log depth loss."""

from __future__ import annotations

import numpy as np

from .tensor import NumericsError, ShapeError, Tensor, _make


def mse_loss(pred: Tensor, target) -> Tensor:
    """Mean squared difference over all elements."""
    td = np.asarray(target, dtype=np.float64)
    if pred.data.shape != td.shape:
        raise ShapeError(f"mse_loss: shape mismatch {pred.data.shape} vs {td.shape}")
    diff = pred.data - td
    n = diff.size

    def bwd(g):
        return (g * 2.0 * diff / n,)

    return _make(np.asarray(np.mean(diff * diff)), (pred,), bwd, "mse_loss")


def cross_entropy(logits: Tensor, cls: int) -> Tensor:
    """Negative log-softmax of a 1-D logit vector at the target class."""
    z = logits.data
    if z.ndim != 1:
        raise ShapeError(f"cross_entropy: expected 1-D logits, got {z.shape}")
    cls = int(cls)
    if not 0 <= cls < z.shape[0]:
        raise ShapeError(f"cross_entropy: class {cls} out of range for logits {z.shape}")
    m = z.max()
    e = np.exp(z - m)
    p = e / e.sum()
    loss = np.asarray(m + np.log(e.sum()) - z[cls])

    def bwd(g):
        gz = p.copy()
        gz[cls] -= 1.0
        return (g * gz,)

    return _make(loss, (logits,), bwd, "cross_entropy")


def silog_loss(pred: Tensor, target, lam: float = 0.5) -> Tensor:
    """Scale-invariant log loss: mean(d^2) - lam * mean(d)^2, d = ln pred - ln target."""
    td = np.asarray(target, dtype=np.float64)
    if pred.data.shape != td.shape:
        raise ShapeError(f"silog_loss: shape mismatch {pred.data.shape} vs {td.shape}")
    if np.any(pred.data <= 0):
        raise NumericsError("silog_loss: non-positive predicted depth")
    if np.any(td <= 0):
        raise NumericsError("silog_loss: non-positive target depth")
    d = np.log(pred.data) - np.log(td)
    n = d.size
    md = d.mean()
    loss = np.asarray(np.mean(d * d) - lam * md * md)

    def bwd(g):
        return (g * (2.0 * d / n - 2.0 * lam * md / n) / pred.data,)

    return _make(loss, (pred,), bwd, "silog_loss")
