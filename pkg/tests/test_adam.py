import numpy as np
import pytest

from gridfill.errors import ContractViolation
from gridfill.tensor import AdamState, Tensor, adam_step


def make_params():
    return {"w": Tensor(np.array([1.0, -2.0], np.float32), requires_grad=True)}


def test_zero_gradient_leaves_params_and_decays_moments():
    params = make_params()
    state = AdamState(params)
    before = params["w"].data.copy()
    adam_step(params, {"w": np.zeros(2, np.float32)}, state, lr=0.1)
    np.testing.assert_array_equal(params["w"].data, before)
    assert np.all(state.m["w"] == 0) and np.all(state.v["w"] == 0)
    # after a nonzero gradient the moments decay toward zero on zero grads
    adam_step(params, {"w": np.ones(2, np.float32)}, state, lr=0.1)
    m1 = state.m["w"].copy()
    adam_step(params, {"w": np.zeros(2, np.float32)}, state, lr=0.1)
    assert np.all(np.abs(state.m["w"]) < np.abs(m1))


def test_first_step_is_minus_lr():
    # closed form: m_hat = g, v_hat = g^2 -> delta = -lr * g/(|g| + eps)
    params = make_params()
    state = AdamState(params)
    before = params["w"].data.copy()
    adam_step(params, {"w": np.array([1.0, 1.0], np.float32)}, state, lr=1e-2)
    delta = params["w"].data - before
    np.testing.assert_allclose(delta, [-1e-2, -1e-2], rtol=1e-5)


def test_constant_gradient_update_tends_to_lr_sign():
    params = make_params()
    state = AdamState(params)
    g = np.array([3.0, -0.25], np.float32)
    lr = 1e-3
    for _ in range(300):
        prev = params["w"].data.copy()
        adam_step(params, {"w": g}, state, lr=lr)
    delta = params["w"].data - prev
    np.testing.assert_allclose(delta, -lr * np.sign(g), rtol=1e-3)


def test_missing_grad_treated_as_zero():
    params = make_params()
    state = AdamState(params)
    before = params["w"].data.copy()
    adam_step(params, {}, state, lr=0.1)
    np.testing.assert_array_equal(params["w"].data, before)
    assert state.step == 1


def test_nan_gradient_aborts_naming_parameter():
    params = make_params()
    state = AdamState(params)
    bad = {"w": np.array([np.nan, 0.0], np.float32)}
    with pytest.raises(ContractViolation, match="'w'"):
        adam_step(params, bad, state, lr=0.1)
