"""Adam optimizer over named parameter dicts."""

import numpy as np

from ..errors import ContractViolation


class AdamState:
    """First/second moment estimates plus the shared step counter."""

    def __init__(self, params):
        self.step = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}


def adam_step(params, grads, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Apply one Adam update in-place and advance the step counter.

    params: dict name -> Tensor. grads: dict name -> array (missing or
    None entries are treated as zero gradients, so the moments still
    decay). A NaN gradient aborts immediately, naming the parameter.
    """
    state.step += 1
    t = state.step
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p.data)
        if not np.all(np.isfinite(g)):
            raise ContractViolation(f"adam_step: non-finite gradient for '{name}'")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return state
