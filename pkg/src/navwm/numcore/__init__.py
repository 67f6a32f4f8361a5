from .tensor import (LARGE, NumericsError, ShapeError, Tape, Tensor, active_tape, add,
                     backward, concat, embedding_lookup, exp, gelu, grad_enabled, index,
                     layer_norm, log, matmul, mean, mul, powc, relu, reshape, scale,
                     set_checked, sigmoid, softmax_masked, softplus, sub, sum_, tanh,
                     transpose)
from .losses import cross_entropy, mse_loss, silog_loss
from .optim import AdamW
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "LARGE", "NumericsError", "ShapeError", "Tape", "Tensor", "active_tape", "add",
    "backward", "concat", "embedding_lookup", "exp", "gelu", "grad_enabled", "index",
    "layer_norm", "log", "matmul", "mean", "mul", "powc", "relu", "reshape", "scale",
    "set_checked", "sigmoid", "softmax_masked", "softplus", "sub", "sum_", "tanh",
    "transpose", "cross_entropy", "mse_loss", "silog_loss", "AdamW", "CheckpointError",
    "load_checkpoint", "save_checkpoint",
]
