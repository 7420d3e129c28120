import numpy as np
import pytest

from gridfill.errors import ContractViolation
from gridfill.tensor import (
    Tensor,
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
    silu,
    smooth_l1,
    softmax,
    sub,
    sum_all,
    upsample_nearest2,
)


def test_matmul_identity():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 3)).astype(np.float32)
    out = matmul(Tensor(np.eye(3, dtype=np.float32)), Tensor(a))
    np.testing.assert_array_equal(out.data, a)


def test_softmax_symmetry():
    out = softmax(Tensor([0.0, 0.0]))
    np.testing.assert_allclose(out.data, [0.5, 0.5])


def test_conv2d_ones_center_is_nine():
    x = Tensor(np.ones((1, 3, 3, 1), np.float32))
    w = Tensor(np.ones((3, 3, 1, 1), np.float32))
    y = conv2d(x, w)
    assert y.data.shape == (1, 3, 3, 1)
    # hand-computed convolution sums with zero padding
    assert y.data[0, 1, 1, 0] == 9.0
    assert y.data[0, 0, 0, 0] == 4.0
    assert y.data[0, 0, 1, 0] == 6.0


def test_conv2d_shape_mismatch_names_op():
    x = Tensor(np.ones((1, 4, 4, 3), np.float32))
    w = Tensor(np.ones((3, 3, 2, 5), np.float32))
    with pytest.raises(ContractViolation, match="conv2d"):
        conv2d(x, w)


def test_elementwise_shape_errors_name_op():
    a = Tensor(np.zeros((2, 3)))
    b = Tensor(np.zeros((3, 2)))
    for op, name in [(add, "add"), (sub, "sub"), (mul, "mul")]:
        with pytest.raises(ContractViolation, match=name):
            op(a, b)


def test_matmul_shape_error():
    with pytest.raises(ContractViolation, match="matmul"):
        matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))


def test_smooth_l1_branches():
    x = Tensor(np.array([0.5, 2.0, -2.0, 0.0], np.float32))
    y = smooth_l1(x, beta=1.0)
    np.testing.assert_allclose(y.data, [0.125, 1.5, 1.5, 0.0])


def test_silu_values():
    x = Tensor(np.array([0.0], np.float32))
    assert silu(x).data[0] == 0.0
    big = silu(Tensor(np.array([20.0], np.float32))).data[0]
    assert abs(big - 20.0) < 1e-4


def test_pool_and_upsample_are_adjoint_shapes():
    x = Tensor(np.arange(16, dtype=np.float32).reshape(1, 4, 4, 1))
    p = avg_pool2(x)
    assert p.data.shape == (1, 2, 2, 1)
    assert p.data[0, 0, 0, 0] == np.mean([0, 1, 4, 5])
    u = upsample_nearest2(p)
    assert u.data.shape == (1, 4, 4, 1)
    assert np.all(u.data[0, :2, :2, 0] == p.data[0, 0, 0, 0])


def test_group_norm_normalizes_groups():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2, 4, 4, 8)).astype(np.float32)
    y = group_norm(Tensor(x), Tensor(np.ones(8, np.float32)), Tensor(np.zeros(8, np.float32)), groups=2)
    g0 = y.data[0, :, :, :4]
    assert abs(g0.mean()) < 1e-5
    assert abs(g0.var() - 1.0) < 1e-3


def test_concat_and_reshape_roundtrip():
    a = Tensor(np.ones((1, 2, 2, 3), np.float32))
    b = Tensor(np.zeros((1, 2, 2, 1), np.float32))
    c = concat([a, b], axis=-1)
    assert c.data.shape == (1, 2, 2, 4)
    r = reshape(c, (1, 4, 4))
    assert r.data.shape == (1, 4, 4)


def test_attention_single_key_returns_value():
    rng = np.random.default_rng(2)
    q = Tensor(rng.standard_normal((1, 5, 4)).astype(np.float32))
    k = Tensor(rng.standard_normal((1, 1, 4)).astype(np.float32))
    v = Tensor(rng.standard_normal((1, 1, 4)).astype(np.float32))
    out = attention(q, k, v)
    # softmax over one key is 1, so each position receives v
    np.testing.assert_allclose(out.data, np.repeat(v.data, 5, axis=1), rtol=1e-6)


def test_embed_selects_rows():
    table = Tensor(np.arange(12, dtype=np.float32).reshape(4, 3))
    out = embed(table, np.array([2, 0]))
    np.testing.assert_array_equal(out.data, table.data[[2, 0]])
    with pytest.raises(ContractViolation, match="embed"):
        embed(table, np.array([4]))


def test_reductions():
    x = Tensor(np.array([1.0, 2.0, 3.0], np.float32))
    assert mean(x).data == 2.0
    assert sum_all(x).data == 6.0


def test_add_channel_bias_forms():
    x = Tensor(np.zeros((2, 3, 3, 4), np.float32))
    per_c = add_channel_bias(x, Tensor(np.arange(4, dtype=np.float32)))
    assert np.all(per_c.data[..., 3] == 3.0)
    per_bc = add_channel_bias(x, Tensor(np.ones((2, 4), np.float32)))
    assert np.all(per_bc.data == 1.0)
    with pytest.raises(ContractViolation, match="add_channel_bias"):
        add_channel_bias(x, Tensor(np.ones((3, 4), np.float32)))


def test_finite_outputs_on_finite_inputs():
    rng = np.random.default_rng(3)
    x = Tensor(rng.standard_normal((2, 4, 4, 8)).astype(np.float32) * 50)
    for t in (
        silu(x),
        softmax(x),
        smooth_l1(x),
        group_norm(x, Tensor(np.ones(8, np.float32)), Tensor(np.zeros(8, np.float32)), 4),
    ):
        assert np.all(np.isfinite(t.data))
