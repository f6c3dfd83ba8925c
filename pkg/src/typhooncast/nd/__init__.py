"""Minimal dense-tensor arithmetic with reverse-mode gradients."""

from .checkpoint import load_checkpoint, save_checkpoint
from .optim import Adam, CosineSchedule
from .tensor import (
    DTYPE,
    Tensor,
    add,
    as_tensor,
    backward,
    concat,
    conv2d,
    div,
    gather_rows,
    getitem,
    layer_norm,
    matmul,
    mul,
    neg,
    power,
    record,
    relu,
    reshape,
    sigmoid,
    softmax,
    sub,
    swapaxes,
    swish,
    texp,
    tlog,
    tmean,
    tsqrt,
    tsum,
    zero_grads,
)

__all__ = [
    "DTYPE", "Tensor", "Adam", "CosineSchedule",
    "add", "as_tensor", "backward", "concat", "conv2d", "div", "gather_rows",
    "getitem", "layer_norm", "load_checkpoint", "matmul", "mul", "neg",
    "power", "record", "relu", "reshape", "save_checkpoint", "sigmoid",
    "softmax", "sub", "swapaxes", "swish", "texp", "tlog", "tmean", "tsqrt",
    "tsum", "zero_grads",
]
