"""Dense tensor operations.

iclab tensors are :class:`numpy.ndarray` objects. Images use the row-major
``N x C x H x W`` layout, dense activations use ``N x F``. The functions in
this module are the shape-checked operations every other module builds on.
They never broadcast: elementwise operations require identical shapes.

All operations are pure, they never modify their inputs.
"""
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from iclab import error

# supported floating point precisions
FLOAT_DTYPES = (np.float32, np.float64)

SAME = "same"
VALID = "valid"
PADDING_MODES = (SAME, VALID)


def as_tensor(x, dtype=None):
    """Convert ``x`` to a floating point ndarray.

    Integer and boolean inputs are promoted to float64.
    """
    x = np.asarray(x, dtype=dtype)
    if dtype is None and not np.issubdtype(x.dtype, np.floating):
        x = x.astype(np.float64)
    return x


def is_finite(x):
    return bool(np.all(np.isfinite(x)))


def check_same_shape(a, b, op_name):
    if a.shape != b.shape:
        raise error.ShapeError(
            f"{op_name} requires equal shapes: {a.shape} != {b.shape}"
        )


def add(a, b):
    check_same_shape(a, b, "add")
    return a + b


def sub(a, b):
    check_same_shape(a, b, "sub")
    return a - b


def mul(a, b):
    check_same_shape(a, b, "mul")
    return a * b


def reduce_mean(x, axes=None):
    return np.mean(x, axis=_normalize_axes(x, axes))


def reduce_var(x, axes=None):
    """Biased (population) variance over ``axes``."""
    return np.var(x, axis=_normalize_axes(x, axes))


def _normalize_axes(x, axes):
    if axes is None:
        return None
    if isinstance(axes, int):
        axes = (axes,)
    for ax in axes:
        if not -x.ndim <= ax < x.ndim:
            raise error.ShapeError(
                f"axis {ax} out of range for tensor of rank {x.ndim}"
            )
    return tuple(axes)


def transpose(x, axes=None):
    return np.transpose(x, axes)


def reshape(x, shape):
    shape = tuple(shape)
    if -1 not in shape and math.prod(shape) != x.size:
        raise error.ShapeError(
            f"cannot reshape tensor of shape {x.shape} into {shape}"
        )
    return np.reshape(x, shape)


def argmax(x, axis=-1):
    return np.argmax(x, axis=axis)


def global_avg_pool(x):
    """Average over the spatial axes of an ``N x C x H x W`` tensor.

    Returns
    -------
    ndarray
        ``N x C`` tensor
    """
    if x.ndim != 4:
        raise error.ShapeError(
            f"global_avg_pool expects an N x C x H x W tensor, got {x.shape}"
        )
    return x.mean(axis=(2, 3))


def matmul(a, b):
    """Matrix product of an ``m x k`` and a ``k x n`` tensor.

    Raises
    ------
    ShapeError
        if either operand is not 2D or the inner dimensions differ
    """
    if a.ndim != 2 or b.ndim != 2:
        raise error.ShapeError(
            f"matmul expects 2D tensors, got {a.shape} and {b.shape}"
        )
    if a.shape[1] != b.shape[0]:
        raise error.ShapeError(
            f"matmul inner dimensions differ: {a.shape} x {b.shape}"
        )
    return a @ b


def relu(x):
    return np.maximum(x, 0)


def conv_output_size(size, kernel, stride, pad):
    if pad == SAME:
        return -(-size // stride)
    return (size - kernel) // stride + 1


def conv_padding(size, kernel, stride, pad):
    """Return the (before, after) zero padding applied along one axis.

    ``same`` padding follows the usual framework rule: the total padding makes
    the output ``ceil(size / stride)`` long and any odd remainder goes after.
    """
    if pad == VALID:
        return 0, 0
    out = conv_output_size(size, kernel, stride, pad)
    total = max((out - 1) * stride + kernel - size, 0)
    return total // 2, total - total // 2


def _check_conv_args(x, kernel, stride, pad):
    if x.ndim != 4 or kernel.ndim != 4:
        raise error.ShapeError(
            "conv2d expects N x C x H x W input and F x C x kh x kw kernel, "
            f"got {x.shape} and {kernel.shape}"
        )
    if x.shape[1] != kernel.shape[1]:
        raise error.ShapeError(
            f"conv2d channel mismatch: input has {x.shape[1]} channels, "
            f"kernel expects {kernel.shape[1]}"
        )
    if not isinstance(stride, (int, np.integer)) or stride < 1:
        raise error.ParameterError(f"conv2d stride must be >= 1: {stride}")
    if pad not in PADDING_MODES:
        raise error.ParameterError(
            f"conv2d padding must be one of {PADDING_MODES}: {pad}"
        )
    if pad == VALID and (kernel.shape[2] > x.shape[2]
                         or kernel.shape[3] > x.shape[3]):
        raise error.ShapeError(
            f"kernel {kernel.shape[2:]} larger than input {x.shape[2:]}"
        )


def _windows(x, kh, kw, stride, pad):
    """Pad ``x`` and return its strided kh x kw windows.

    Returns
    -------
    windows : ndarray
        view of shape ``N x C x out_h x out_w x kh x kw``
    padding : tuple
        ((top, bottom), (left, right)) zero padding used
    """
    _, _, h, w = x.shape
    pad_h = conv_padding(h, kh, stride, pad)
    pad_w = conv_padding(w, kw, stride, pad)
    if pad_h != (0, 0) or pad_w != (0, 0):
        x = np.pad(x, ((0, 0), (0, 0), pad_h, pad_w))
    out_h = conv_output_size(h, kh, stride, pad)
    out_w = conv_output_size(w, kw, stride, pad)
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride][:, :, :out_h, :out_w]
    return windows, (pad_h, pad_w)


def conv2d(x, kernel, stride=1, pad=SAME):
    """2D cross-correlation (no kernel flip) with zero padding.

    Parameters
    ----------
    x : ndarray
        ``N x C x H x W`` input
    kernel : ndarray
        ``F x C x kh x kw`` filters
    stride : int, optional
        spatial stride (default=1)
    pad : str, optional
        ``"same"`` (output is ``ceil(H / stride)``) or ``"valid"``
        (default="same")

    Returns
    -------
    ndarray
        ``N x F x out_h x out_w`` output

    Raises
    ------
    ShapeError
        if the kernel channel count differs from the input channel count
    """
    _check_conv_args(x, kernel, stride, pad)
    kh, kw = kernel.shape[2:]
    windows, _ = _windows(x, kh, kw, stride, pad)
    # (N, out_h, out_w, F)
    out = np.tensordot(windows, kernel, axes=([1, 4, 5], [1, 2, 3]))
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2))


def conv2d_backward(x, kernel, grad_out, stride=1, pad=SAME):
    """Gradients of :func:`conv2d` with respect to its input and kernel.

    Returns
    -------
    grad_x : ndarray
        same shape as ``x``
    grad_kernel : ndarray
        same shape as ``kernel``
    """
    _check_conv_args(x, kernel, stride, pad)
    n, c, h, w = x.shape
    kh, kw = kernel.shape[2:]
    windows, (pad_h, pad_w) = _windows(x, kh, kw, stride, pad)
    out_h, out_w = windows.shape[2:4]
    if grad_out.shape != (n, kernel.shape[0], out_h, out_w):
        raise error.ShapeError(
            f"conv2d upstream gradient has shape {grad_out.shape}, expected "
            f"{(n, kernel.shape[0], out_h, out_w)}"
        )

    # (C, kh, kw, F) -> (F, C, kh, kw)
    grad_kernel = np.tensordot(windows, grad_out, axes=([0, 2, 3], [0, 2, 3]))
    grad_kernel = grad_kernel.transpose(3, 0, 1, 2)

    # (N, out_h, out_w, C, kh, kw)
    grad_cols = np.tensordot(grad_out, kernel, axes=([1], [0]))
    grad_cols = grad_cols.transpose(0, 3, 1, 2, 4, 5)
    grad_padded = np.zeros(
        (n, c, h + sum(pad_h), w + sum(pad_w)), dtype=grad_cols.dtype
    )
    h_span = stride * (out_h - 1) + 1
    w_span = stride * (out_w - 1) + 1
    for i in range(kh):
        for j in range(kw):
            grad_padded[:, :, i:i + h_span:stride, j:j + w_span:stride] += \
                grad_cols[..., i, j]
    grad_x = grad_padded[:, :, pad_h[0]:pad_h[0] + h, pad_w[0]:pad_w[0] + w]
    return np.ascontiguousarray(grad_x), np.ascontiguousarray(grad_kernel)


def sample_bernoulli(rng, p_keep, shape, dtype=np.float64):
    """Sample i.i.d. {0, 1} gates, each 1 with probability ``p_keep``.

    Parameters
    ----------
    rng : Rng
        random number generator
    p_keep : float
        keep probability in (0, 1]
    shape : tuple
        output shape
    dtype : numpy dtype, optional
        output dtype (default=float64)

    Raises
    ------
    ParameterError
        if ``p_keep`` is outside (0, 1]
    """
    check_keep_probability(p_keep)
    return (rng.random(shape) < p_keep).astype(dtype)


def check_keep_probability(p_keep):
    if not (isinstance(p_keep, (int, float, np.floating))
            and 0 < p_keep <= 1):
        raise error.ParameterError(
            f"keep probability must be in (0, 1]: {p_keep} is invalid"
        )
