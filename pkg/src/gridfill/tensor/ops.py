"""Differentiable tensor operations.

Layout convention for image tensors is NHWC, which keeps the channel
axis contiguous for the BLAS-backed convolution and makes per-channel
broadcasts natural. Convolutions are stride 1 with zero padding that
preserves spatial size; downsampling is 2x2 average pooling and
upsampling is 2x nearest-neighbour.

Broadcasting is deliberately restricted: elementwise ops require equal
shapes (or a python scalar), and the only broadcast form is a
per-channel bias via add_channel_bias. scale() multiplies by a
non-differentiated constant and may broadcast.
"""

import math

import numpy as np
from scipy.special import expit

from ..errors import ContractViolation
from .core import Tensor, accumulate_grad, as_tensor, record


def _shapes(*ts):
    return ", ".join(str(tuple(t.data.shape)) for t in ts)


# ---------------------------------------------------------------------------
# elementwise


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape and b.size != 1:
        raise ContractViolation(f"add: shape mismatch {_shapes(a, b)}")
    out = Tensor(a.data + b.data)

    def bwd(g):
        accumulate_grad(a, g)
        accumulate_grad(b, g if b.shape == a.shape else g.sum().reshape(b.shape))

    return record(out, (a, b), bwd)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape and b.size != 1:
        raise ContractViolation(f"sub: shape mismatch {_shapes(a, b)}")
    out = Tensor(a.data - b.data)

    def bwd(g):
        accumulate_grad(a, g)
        accumulate_grad(b, -g if b.shape == a.shape else -g.sum().reshape(b.shape))

    return record(out, (a, b), bwd)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape and b.size != 1 and a.size != 1:
        raise ContractViolation(f"mul: shape mismatch {_shapes(a, b)}")
    out = Tensor(a.data * b.data)

    def bwd(g):
        ga = g * b.data
        gb = g * a.data
        accumulate_grad(a, ga if a.shape == out.shape else ga.sum().reshape(a.shape))
        accumulate_grad(b, gb if b.shape == out.shape else gb.sum().reshape(b.shape))

    return record(out, (a, b), bwd)


def scale(x, c):
    """Multiply by a constant scalar or broadcastable constant array.

    No gradient flows into c; use mul for tensor-tensor products.
    """
    x = as_tensor(x)
    c = np.asarray(c, dtype=x.dtype)
    out = Tensor(x.data * c)
    if out.shape != x.shape:
        raise ContractViolation(
            f"scale: constant {c.shape} does not broadcast onto {x.shape}"
        )

    def bwd(g):
        accumulate_grad(x, g * c)

    return record(out, (x,), bwd)


def add_channel_bias(x, v):
    """x (..., C) plus a bias of shape (C,) or (B, C) for x (B, ..., C)."""
    x, v = as_tensor(x), as_tensor(v)
    C = x.shape[-1]
    if v.shape == (C,):
        out = Tensor(x.data + v.data)
        red = tuple(range(x.ndim - 1))
    elif v.ndim == 2 and x.ndim > 2 and v.shape == (x.shape[0], C):
        vb = v.data.reshape((x.shape[0],) + (1,) * (x.ndim - 2) + (C,))
        out = Tensor(x.data + vb)
        red = tuple(range(1, x.ndim - 1))
    else:
        raise ContractViolation(f"add_channel_bias: shape mismatch {_shapes(x, v)}")

    def bwd(g):
        accumulate_grad(x, g)
        accumulate_grad(v, g.sum(axis=red))

    return record(out, (x, v), bwd)


def silu(x):
    x = as_tensor(x)
    s = expit(x.data)
    out = Tensor(x.data * s)

    def bwd(g):
        accumulate_grad(x, g * (s * (1.0 + x.data * (1.0 - s))))

    return record(out, (x,), bwd)


def smooth_l1(x, beta=1.0):
    """Elementwise smooth-L1 (quadratic below beta, linear above)."""
    x = as_tensor(x)
    ax = np.abs(x.data)
    quad = ax < beta
    out = Tensor(np.where(quad, 0.5 * x.data * x.data / beta, ax - 0.5 * beta))

    def bwd(g):
        accumulate_grad(x, g * np.where(quad, x.data / beta, np.sign(x.data)))

    return record(out, (x,), bwd)


def softmax(x, axis=-1):
    x = as_tensor(x)
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(y)

    def bwd(g):
        accumulate_grad(x, y * (g - (g * y).sum(axis=axis, keepdims=True)))

    return record(out, (x,), bwd)


# ---------------------------------------------------------------------------
# shape plumbing


def reshape(x, shape):
    x = as_tensor(x)
    out = Tensor(x.data.reshape(shape))

    def bwd(g):
        accumulate_grad(x, g.reshape(x.shape))

    return record(out, (x,), bwd)


def transpose_last2(x):
    x = as_tensor(x)
    out = Tensor(np.ascontiguousarray(x.data.swapaxes(-1, -2)))

    def bwd(g):
        accumulate_grad(x, g.swapaxes(-1, -2))

    return record(out, (x,), bwd)


def concat(tensors, axis=-1):
    ts = [as_tensor(t) for t in tensors]
    if not ts:
        raise ContractViolation("concat: empty input list")
    base = list(ts[0].shape)
    ax = axis % len(base)
    for t in ts[1:]:
        other = list(t.shape)
        if len(other) != len(base) or any(
            i != ax and other[i] != base[i] for i in range(len(base))
        ):
            raise ContractViolation(f"concat: shape mismatch {_shapes(*ts)}")
    out = Tensor(np.concatenate([t.data for t in ts], axis=ax))
    sizes = [t.shape[ax] for t in ts]

    def bwd(g):
        start = 0
        for t, n in zip(ts, sizes):
            sl = [slice(None)] * g.ndim
            sl[ax] = slice(start, start + n)
            accumulate_grad(t, g[tuple(sl)])
            start += n

    return record(out, tuple(ts), bwd)


# ---------------------------------------------------------------------------
# reductions


def mean(x):
    x = as_tensor(x)
    out = Tensor(np.asarray(x.data.mean(), dtype=x.dtype))
    n = x.size

    def bwd(g):
        accumulate_grad(x, np.full(x.shape, g / n, dtype=x.dtype))

    return record(out, (x,), bwd)


def sum_all(x):
    x = as_tensor(x)
    out = Tensor(np.asarray(x.data.sum(), dtype=x.dtype))

    def bwd(g):
        accumulate_grad(x, np.full(x.shape, g, dtype=x.dtype))

    return record(out, (x,), bwd)


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a, b):
    """a (..., M, K) @ b, where b is (K, N) or shares a's leading dims."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ContractViolation(f"matmul: shape mismatch {_shapes(a, b)}")
    shared_weight = b.ndim == 2 and a.ndim > 2
    if not shared_weight and a.shape[:-2] != b.shape[:-2]:
        raise ContractViolation(f"matmul: leading dims differ {_shapes(a, b)}")
    out = Tensor(a.data @ b.data)

    def bwd(g):
        accumulate_grad(a, g @ b.data.swapaxes(-1, -2))
        if shared_weight:
            K, N = b.shape
            accumulate_grad(b, a.data.reshape(-1, K).T @ g.reshape(-1, N))
        else:
            accumulate_grad(b, a.data.swapaxes(-1, -2) @ g)

    return record(out, (a, b), bwd)


def attention(q, k, v):
    """Scaled dot-product attention: softmax(q kᵀ / sqrt(d)) v.

    q (B, S, d), k and v (B, T, d); returns (B, S, d).
    """
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    if q.shape[-1] != k.shape[-1] or k.shape[:-1] != v.shape[:-1]:
        raise ContractViolation(f"attention: shape mismatch {_shapes(q, k, v)}")
    scores = scale(matmul(q, transpose_last2(k)), 1.0 / math.sqrt(q.shape[-1]))
    return matmul(softmax(scores, axis=-1), v)


# ---------------------------------------------------------------------------
# convolution and resampling


def conv2d(x, w, b=None):
    """Stride-1, zero-padded 2-d convolution preserving spatial size.

    x (N, H, W, Cin), w (kh, kw, Cin, Cout) with odd kh/kw, optional
    bias (Cout,). Implemented as kh*kw shifted GEMMs so both passes run
    through BLAS.
    """
    x, w = as_tensor(x), as_tensor(w)
    if x.ndim != 4 or w.ndim != 4 or x.shape[-1] != w.shape[2]:
        raise ContractViolation(f"conv2d: shape mismatch {_shapes(x, w)}")
    kh, kw, Ci, Co = w.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ContractViolation(f"conv2d: kernel must be odd, got {kh}x{kw}")
    N, H, W, _ = x.shape
    ph, pw = kh // 2, kw // 2
    if ph or pw:
        xp = np.pad(x.data, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    else:
        xp = x.data
    acc = np.zeros((N * H * W, Co), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            sl = xp[:, i : i + H, j : j + W, :].reshape(N * H * W, Ci)
            acc += sl @ w.data[i, j]
    y = acc.reshape(N, H, W, Co)
    bt = None
    if b is not None:
        bt = as_tensor(b)
        if bt.shape != (Co,):
            raise ContractViolation(f"conv2d: bias shape {bt.shape} != ({Co},)")
        y = y + bt.data
    out = Tensor(y)

    def bwd(g):
        g2 = g.reshape(N * H * W, Co)
        if bt is not None:
            accumulate_grad(bt, g2.sum(axis=0))
        if w.requires_grad:
            dw = np.empty_like(w.data)
            for i in range(kh):
                for j in range(kw):
                    sl = xp[:, i : i + H, j : j + W, :].reshape(N * H * W, Ci)
                    dw[i, j] = sl.T @ g2
            accumulate_grad(w, dw)
        if x.requires_grad:
            dxp = np.zeros_like(xp)
            for i in range(kh):
                for j in range(kw):
                    dxp[:, i : i + H, j : j + W, :] += (g2 @ w.data[i, j].T).reshape(
                        N, H, W, Ci
                    )
            accumulate_grad(x, dxp[:, ph : ph + H, pw : pw + W, :])

    inputs = (x, w) if bt is None else (x, w, bt)
    return record(out, inputs, bwd)


def avg_pool2(x):
    """2x2 average pooling with stride 2; H and W must be even."""
    x = as_tensor(x)
    N, H, W, C = x.shape
    if H % 2 or W % 2:
        raise ContractViolation(f"avg_pool2: odd spatial size {(H, W)}")
    out = Tensor(x.data.reshape(N, H // 2, 2, W // 2, 2, C).mean(axis=(2, 4)))

    def bwd(g):
        gx = np.repeat(np.repeat(g, 2, axis=1), 2, axis=2) * x.dtype.type(0.25)
        accumulate_grad(x, gx)

    return record(out, (x,), bwd)


def upsample_nearest2(x):
    """2x nearest-neighbour upsampling."""
    x = as_tensor(x)
    N, H, W, C = x.shape
    out = Tensor(np.repeat(np.repeat(x.data, 2, axis=1), 2, axis=2))

    def bwd(g):
        accumulate_grad(x, g.reshape(N, H, 2, W, 2, C).sum(axis=(2, 4)))

    return record(out, (x,), bwd)


def group_norm(x, gamma, beta, groups, eps=1e-5):
    """Group normalization over (H, W, channels-per-group) for NHWC x."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    N, H, W, C = x.shape
    if C % groups:
        raise ContractViolation(f"group_norm: {groups} groups do not divide C={C}")
    if gamma.shape != (C,) or beta.shape != (C,):
        raise ContractViolation(
            f"group_norm: affine params {_shapes(gamma, beta)} != ({C},)"
        )
    cg = C // groups
    xg = x.data.reshape(N, H, W, groups, cg)
    mu = xg.mean(axis=(1, 2, 4), keepdims=True)
    var = xg.var(axis=(1, 2, 4), keepdims=True)
    invstd = 1.0 / np.sqrt(var + eps)
    xhat = ((xg - mu) * invstd).reshape(N, H, W, C)
    out = Tensor(xhat * gamma.data + beta.data)

    def bwd(g):
        accumulate_grad(beta, g.sum(axis=(0, 1, 2)))
        accumulate_grad(gamma, (g * xhat).sum(axis=(0, 1, 2)))
        if x.requires_grad:
            m = H * W * cg
            dxh = (g * gamma.data).reshape(N, H, W, groups, cg)
            xh = xhat.reshape(N, H, W, groups, cg)
            s1 = dxh.sum(axis=(1, 2, 4), keepdims=True)
            s2 = (dxh * xh).sum(axis=(1, 2, 4), keepdims=True)
            dx = (invstd / m) * (m * dxh - s1 - xh * s2)
            accumulate_grad(x, dx.reshape(N, H, W, C))

    return record(out, (x, gamma, beta), bwd)


# ---------------------------------------------------------------------------
# lookup


def embed(table, ids):
    """Row lookup: table (R, E), ids int array (B,) -> (B, E)."""
    table = as_tensor(table)
    idx = np.asarray(ids)
    if idx.ndim != 1 or not np.issubdtype(idx.dtype, np.integer):
        raise ContractViolation(f"embed: ids must be 1-d ints, got {idx.dtype}")
    if idx.min(initial=0) < 0 or idx.max(initial=-1) >= table.shape[0]:
        raise ContractViolation(
            f"embed: id out of range for table with {table.shape[0]} rows"
        )
    out = Tensor(table.data[idx])

    def bwd(g):
        if table.requires_grad:
            dt = np.zeros_like(table.data)
            np.add.at(dt, idx, g)
            accumulate_grad(table, dt)

    return record(out, (table,), bwd)
