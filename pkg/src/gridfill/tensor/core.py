"""Dense tensors with reverse-mode automatic differentiation.

A Tensor wraps a numpy float array. Operations (see ops.py) record a
closure on a thread-local tape whenever gradients are enabled and at
least one input requires them. backward() replays the tape in reverse
execution order, which is a valid topological order because an op's
output is always created after its inputs.

Default dtype is float32. Arrays passed in as float64 are kept as
float64 so numerical tests can run the whole stack in double precision.
"""

import threading
from contextlib import contextmanager

import numpy as np

from ..errors import ContractViolation

_state = threading.local()


def _tape():
    tape = getattr(_state, "tape", None)
    if tape is None:
        tape = _state.tape = []
    return tape


def grad_enabled():
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad():
    """Disable tape recording inside the block (inference mode)."""
    prev = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


def tape_size():
    return len(_tape())


class Tensor:
    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad=False):
        arr = np.asarray(data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def zero_grad(self):
        self.grad = None

    def detach(self):
        return Tensor(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def accumulate_grad(t, g):
    """Add g into t.grad (allocating zeros on first touch)."""
    if not (isinstance(t, Tensor) and t.requires_grad):
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def record(out, inputs, backward_fn):
    """Mark out as requiring grad and push backward_fn if recording.

    backward_fn takes the output gradient array and is responsible for
    calling accumulate_grad on each differentiable input.
    """
    if grad_enabled() and any(
        isinstance(t, Tensor) and t.requires_grad for t in inputs
    ):
        out.requires_grad = True

        def node():
            if out.grad is not None:
                backward_fn(out.grad)

        _tape().append(node)
    return out


def backward(loss):
    """Backpropagate from a scalar loss through the recorded tape.

    Gradients accumulate additively into each tensor's .grad. The tape
    is cleared afterwards, so each recorded op runs exactly once.
    """
    if not isinstance(loss, Tensor):
        raise ContractViolation("backward expects a Tensor loss")
    if loss.size != 1:
        raise ContractViolation(
            f"backward expects a scalar loss, got shape {loss.shape}"
        )
    tape = _tape()
    try:
        loss.grad = np.ones_like(loss.data)
        for node in reversed(tape):
            node()
    finally:
        tape.clear()
