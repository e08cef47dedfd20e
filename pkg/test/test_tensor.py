"""Tests for the tensor operations, seeded rng and tensor serialization."""
import io

import numpy as np
import pytest

from iclab import error
from iclab.core import (
    Rng, SAME, VALID, add, conv2d, conv2d_backward, matmul, relu, reshape,
    sample_bernoulli, tensor_from_bytes, tensor_to_bytes, read_tensor,
    global_avg_pool
)


def naive_conv2d(x, kernel, stride, pad):
    n, c, h, w = x.shape
    f, _, kh, kw = kernel.shape
    if pad == SAME:
        out_h, out_w = -(-h // stride), -(-w // stride)
        ph = max((out_h - 1) * stride + kh - h, 0)
        pw = max((out_w - 1) * stride + kw - w, 0)
        x = np.pad(x, ((0, 0), (0, 0),
                       (ph // 2, ph - ph // 2), (pw // 2, pw - pw // 2)))
    else:
        out_h, out_w = (h - kh) // stride + 1, (w - kw) // stride + 1
    out = np.zeros((n, f, out_h, out_w))
    for b in range(n):
        for o in range(f):
            for i in range(out_h):
                for j in range(out_w):
                    for ch in range(c):
                        for u in range(kh):
                            for v in range(kw):
                                out[b, o, i, j] += \
                                    x[b, ch, i * stride + u, j * stride + v] \
                                    * kernel[o, ch, u, v]
    return out


def test_matmul_identity():
    A = Rng(0).normal(0.0, 1.0, (3, 4))
    np.testing.assert_array_equal(matmul(np.eye(3), A), A)


def test_matmul_hand_computed():
    out = matmul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[1.0], [1.0]]))
    np.testing.assert_array_equal(out, [[3.0], [7.0]])


# the loop oracles are compared on this many random shapes
ORACLE_CASES = range(100)


@pytest.mark.parametrize("seed", ORACLE_CASES)
def test_matmul_triple_loop(seed):
    rng = Rng(seed)
    m, k, n = (int(d) for d in rng.integers(1, 9, 3))
    a = rng.normal(0.0, 1.0, (m, k))
    b = rng.normal(0.0, 1.0, (k, n))
    expected = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            for t in range(k):
                expected[i, j] += a[i, t] * b[t, j]
    np.testing.assert_allclose(matmul(a, b), expected, rtol=0, atol=1e-12)


@pytest.mark.parametrize("shapes", [((2, 3), (4, 2)), ((3,), (3, 1))])
def test_matmul_shape_error(shapes):
    a, b = (np.ones(s) for s in shapes)
    with pytest.raises(error.ShapeError):
        matmul(a, b)


def test_elementwise_never_broadcasts():
    with pytest.raises(error.ShapeError):
        add(np.ones((2, 3)), np.ones(3))


def test_reshape_size_mismatch():
    with pytest.raises(error.ShapeError):
        reshape(np.ones(6), (4, 2))


def test_conv2d_scalar_kernel():
    out = conv2d(np.ones((1, 1, 3, 3)), np.full((1, 1, 1, 1), 2.0))
    np.testing.assert_array_equal(out, np.full((1, 1, 3, 3), 2.0))


def test_conv2d_valid_average():
    x = np.arange(9, dtype=np.float64).reshape(1, 1, 3, 3)
    out = conv2d(x, np.full((1, 1, 3, 3), 1.0 / 9), pad=VALID)
    assert out.shape == (1, 1, 1, 1)
    assert out[0, 0, 0, 0] == pytest.approx(4.0, abs=1e-12)


@pytest.mark.parametrize("seed", ORACLE_CASES)
def test_conv2d_matches_direct_loops(seed):
    rng = Rng(seed)
    kh, kw = (int(2 * d + 1) for d in rng.integers(0, 3, 2))
    stride = int(rng.integers(1, 4))
    pad = SAME if seed % 2 else VALID
    h = int(rng.integers(kh, kh + 5))
    w = int(rng.integers(kw, kw + 5))
    n, c, f = (int(d) for d in rng.integers(1, 4, 3))
    x = rng.normal(0.0, 1.0, (n, c, h, w))
    kernel = rng.normal(0.0, 1.0, (f, c, kh, kw))
    np.testing.assert_allclose(conv2d(x, kernel, stride, pad),
                               naive_conv2d(x, kernel, stride, pad),
                               rtol=0, atol=1e-10)


def test_conv2d_channel_mismatch():
    with pytest.raises(error.ShapeError):
        conv2d(np.ones((1, 2, 4, 4)), np.ones((1, 3, 3, 3)))


def test_conv2d_backward_shapes():
    rng = Rng(3)
    x = rng.normal(0.0, 1.0, (2, 3, 7, 7))
    kernel = rng.normal(0.0, 1.0, (5, 3, 3, 3))
    out = conv2d(x, kernel, stride=2)
    grad_x, grad_k = conv2d_backward(x, kernel, np.ones_like(out), stride=2)
    assert grad_x.shape == x.shape
    assert grad_k.shape == kernel.shape


def test_relu():
    np.testing.assert_array_equal(relu(np.array([-1.0, 0.0, 2.0])),
                                  [0.0, 0.0, 2.0])
    assert not relu(-Rng(0).random((4, 4)) - 0.1).any()


def test_global_avg_pool_rank():
    with pytest.raises(error.ShapeError):
        global_avg_pool(np.ones((2, 3)))


def test_bernoulli_keep_all():
    mask = sample_bernoulli(Rng(0), 1.0, (10, 10))
    assert np.all(mask == 1.0)


def test_bernoulli_mean():
    mask = sample_bernoulli(Rng(0), 0.5, 10**6)
    assert abs(mask.mean() - 0.5) <= 0.005


def test_bernoulli_deterministic():
    a = sample_bernoulli(Rng(42), 0.3, (64, 64))
    b = sample_bernoulli(Rng(42), 0.3, (64, 64))
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("p_keep", [0.0, -0.1, 1.5])
def test_bernoulli_invalid_probability(p_keep):
    with pytest.raises(error.ParameterError):
        sample_bernoulli(Rng(0), p_keep, 3)


def test_rng_spawn_is_deterministic():
    a = [r.random(5) for r in Rng(7).spawn(3)]
    b = [r.random(5) for r in Rng(7).spawn(3)]
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    assert not np.array_equal(a[0], a[1])


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
def test_rng_invalid_seed(seed):
    with pytest.raises(error.ParameterError):
        Rng(seed)


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_tensor_bytes_roundtrip(dtype):
    x = Rng(0).normal(0.0, 1.0, (2, 3, 4)).astype(dtype)
    y = tensor_from_bytes(tensor_to_bytes(x))
    assert y.dtype == x.dtype
    np.testing.assert_array_equal(x, y)


def test_tensor_bad_magic():
    with pytest.raises(error.FormatError) as e:
        read_tensor(io.BytesIO(b"NOPE" + bytes(16)))
    assert e.value.offset == 0


def test_tensor_truncated_payload():
    data = tensor_to_bytes(np.ones((4, 4)))
    with pytest.raises(error.FormatError):
        tensor_from_bytes(data[:-3])
