"""Finite-difference checks of every layer kind and of full networks."""
import numpy as np
import pytest

from iclab.core import Rng, SAME, VALID
from iclab.layers import (
    BatchNorm, Conv2D, Dense, Dropout, DropoutSpec, GlobalAvgPool, IC,
    INVERTED, ReLU, Sequential, THEOREM, softmax_cross_entropy
)
from iclab.layers.gradcheck import (
    check_gradients, numerical_gradient, projection_loss, relative_error
)
from iclab.resnet import NetSpec, ResidualUnit, build
from iclab.resnet.units import projection

LAYER_TOL = 1e-4
NET_TOL = 1e-3


def away_from_zero(rng, shape):
    """Normal samples pushed away from the ReLU kink."""
    x = rng.normal(0.0, 1.0, shape)
    return np.sign(x) * (0.1 + np.abs(x))


def assert_close(errors, tol):
    worst = max(errors, key=errors.get)
    assert errors[worst] <= tol, f"{worst}: {errors[worst]:.3g}"


def run_check(layer, x, seed):
    rng = Rng(seed)
    out = layer.forward(x, training=True)
    weights = rng.normal(0.0, 1.0, out.shape)
    return check_gradients(layer, x, projection_loss(weights), rng)


# every layer kind is checked on this many random instances
SEEDS = range(20)


def dim(rng, low, high):
    return int(rng.integers(low, high + 1))


@pytest.mark.parametrize("seed", SEEDS)
def test_dense_gradients(seed):
    rng = Rng(seed)
    batch, n_in, n_out = dim(rng, 2, 6), dim(rng, 1, 7), dim(rng, 1, 5)
    layer = Dense(n_in, n_out, rng, use_bias=bool(seed % 2))
    x = rng.normal(0.0, 1.0, (batch, n_in))
    assert_close(run_check(layer, x, seed + 100), LAYER_TOL)


@pytest.mark.parametrize("seed", SEEDS)
def test_conv_gradients(seed):
    rng = Rng(seed)
    kernel_size = int(rng.integers(1, 3)) * 2 - 1
    stride = dim(rng, 1, 2)
    pad = VALID if seed % 3 == 0 else SAME
    size = dim(rng, kernel_size + 1, 6)
    layer = Conv2D(dim(rng, 1, 3), dim(rng, 1, 3), kernel_size, rng,
                   stride=stride, pad=pad)
    x = rng.normal(0.0, 1.0, (dim(rng, 1, 3), layer.in_channels, size, size))
    assert_close(run_check(layer, x, seed + 100), LAYER_TOL)


@pytest.mark.parametrize("seed", SEEDS)
def test_relu_gradients(seed):
    rng = Rng(seed)
    x = away_from_zero(rng, (dim(rng, 1, 4), dim(rng, 1, 8)))
    assert_close(run_check(ReLU(), x, seed + 100), LAYER_TOL)


def batch_shape(rng, channels):
    if rng.random() < 0.5:
        return (dim(rng, 3, 8), channels)
    size = dim(rng, 1, 4)
    return (dim(rng, 2, 4), channels, size, size)


@pytest.mark.parametrize("seed", SEEDS)
def test_batchnorm_gradients(seed):
    rng = Rng(seed)
    channels = dim(rng, 1, 4)
    layer = BatchNorm(channels)
    layer.params["gamma"][...] = rng.normal(1.0, 0.2, channels)
    layer.params["beta"][...] = rng.normal(0.0, 0.2, channels)
    x = rng.normal(0.5, 2.0, batch_shape(rng, channels))
    assert_close(run_check(layer, x, seed + 100), LAYER_TOL)


@pytest.mark.parametrize("seed", SEEDS)
def test_dropout_gradients(seed):
    rng = Rng(seed)
    mode = THEOREM if seed % 2 else INVERTED
    layer = Dropout(DropoutSpec(float(rng.random() * 0.8 + 0.15), mode), rng)
    x = rng.normal(0.0, 1.0, (dim(rng, 1, 5), dim(rng, 1, 6)))
    assert_close(run_check(layer, x, seed + 100), LAYER_TOL)


@pytest.mark.parametrize("seed", SEEDS)
def test_ic_gradients(seed):
    rng = Rng(seed)
    mode = THEOREM if seed % 2 else INVERTED
    channels = dim(rng, 1, 4)
    layer = IC(channels, DropoutSpec(float(rng.random() * 0.5 + 0.45), mode),
               rng)
    x = rng.normal(0.0, 1.0, batch_shape(rng, channels))
    assert_close(run_check(layer, x, seed + 100), LAYER_TOL)


@pytest.mark.parametrize("seed", SEEDS)
def test_residual_unit_gradients(seed):
    rng = Rng(seed)
    in_ch, size = dim(rng, 1, 3), dim(rng, 3, 5)
    if seed % 2:
        out_ch, stride = dim(rng, 1, 4), 2
        shortcut = projection(in_ch, out_ch, stride, rng)
    else:
        out_ch, stride, shortcut = in_ch, 1, None
    branch = Sequential([
        BatchNorm(in_ch, name="bn1"),
        Conv2D(in_ch, out_ch, 3, rng, stride=stride, name="conv1"),
        IC(out_ch, DropoutSpec(0.8), rng, name="ic2"),
        Conv2D(out_ch, out_ch, 3, rng, name="conv2"),
    ], "branch")
    unit = ResidualUnit(branch, shortcut, name="unit")
    x = rng.normal(0.0, 1.0, (dim(rng, 2, 3), in_ch, size, size))
    errors = run_check(unit, x, seed + 100)
    assert "branch/conv2/kernel" in errors
    assert ("shortcut/kernel" in errors) == (shortcut is not None)
    assert_close(errors, LAYER_TOL)


@pytest.mark.parametrize("seed", SEEDS)
def test_avgpool_gradients(seed):
    rng = Rng(seed)
    size = dim(rng, 1, 4)
    x = rng.normal(0.0, 1.0, (dim(rng, 1, 3), dim(rng, 1, 3), size, size))
    assert_close(run_check(GlobalAvgPool(), x, seed + 100), LAYER_TOL)


def test_sequential_gradients():
    rng = Rng(16)
    model = Sequential([
        Dense(6, 5, rng, name="fc1"),
        IC(5, DropoutSpec(0.9), rng, name="ic"),
        Dense(5, 4, rng, name="fc2"),
    ])
    x = rng.normal(0.0, 1.0, (8, 6))
    errors = run_check(model, x, 17)
    assert set(errors) == {"input", "fc1/weight", "fc1/bias", "ic/gamma",
                           "ic/beta", "fc2/weight", "fc2/bias"}
    assert_close(errors, LAYER_TOL)


def test_softmax_cross_entropy_gradient():
    rng = Rng(18)
    logits = rng.normal(0.0, 1.0, (5, 4))
    labels = rng.integers(0, 4, 5)
    _, grad = softmax_cross_entropy(logits, labels)
    numeric = numerical_gradient(
        lambda: softmax_cross_entropy(logits, labels)[0], logits
    )
    assert relative_error(grad, numeric) <= LAYER_TOL


@pytest.mark.parametrize("layout", ["baseline", "v1", "v2", "v3"])
def test_full_network_gradients(layout):
    spec = NetSpec.from_dict({"n": 1, "layout": layout, "num_classes": 3,
                              "image_size": 8})
    network = build(spec, Rng(19))
    rng = Rng(20)
    x = rng.normal(0.0, 1.0, network.input_shape(4))
    labels = np.array([0, 1, 2, 1])

    def loss_fn(logits):
        return softmax_cross_entropy(logits, labels)

    errors = check_gradients(network, x, loss_fn, rng, h=1e-6, max_coords=8)
    assert "head/weight" in errors
    assert "stage1/unit1/branch/conv1/kernel" in errors
    assert_close(errors, NET_TOL)
