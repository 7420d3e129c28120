from .adam import AdamState, adam_step
from .checkpoint import load_tensors, save_tensors
from .core import Tensor, as_tensor, backward, no_grad, tape_size
from .ops import (
    add,
    add_channel_bias,
    attention,
    avg_pool2,
    concat,
    conv2d,
    embed,
    group_norm,
    matmul,
    mean,
    mul,
    reshape,
    scale,
    silu,
    smooth_l1,
    softmax,
    sub,
    sum_all,
    transpose_last2,
    upsample_nearest2,
)

__all__ = [
    "AdamState",
    "Tensor",
    "adam_step",
    "add",
    "add_channel_bias",
    "as_tensor",
    "attention",
    "avg_pool2",
    "backward",
    "concat",
    "conv2d",
    "embed",
    "group_norm",
    "load_tensors",
    "matmul",
    "mean",
    "mul",
    "no_grad",
    "reshape",
    "save_tensors",
    "scale",
    "silu",
    "smooth_l1",
    "softmax",
    "sub",
    "sum_all",
    "tape_size",
    "transpose_last2",
    "upsample_nearest2",
]
