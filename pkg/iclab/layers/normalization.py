"""Batch normalization.

Statistics are taken per channel over the batch and spatial axes of
``N x C x H x W`` tensors, and per feature over the batch axis of ``N x F``
tensors. Defaults (``momentum=0.99``, ``epsilon=1e-3``) match the Keras
``BatchNormalization`` layer.
"""
from dataclasses import dataclass

import numpy as np

from iclab import error
from iclab.layers.base import Layer, BATCHNORM

DEFAULT_MOMENTUM = 0.99
DEFAULT_EPSILON = 1e-3


@dataclass
class BatchNormState:
    """Learnable and running parameters of a batch normalization layer.

    Attributes
    ----------
    gamma : ndarray
        learnable per-channel scale
    beta : ndarray
        learnable per-channel shift
    running_mean : ndarray
        moving average of batch means, used at inference
    running_var : ndarray
        moving average of batch variances, used at inference
    momentum : float
        moving average decay in (0, 1)
    epsilon : float
        positive variance regularizer
    """

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = DEFAULT_MOMENTUM
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.epsilon > 0:
            raise error.ParameterError(
                f"BatchNorm epsilon must be > 0: {self.epsilon}"
            )
        if not 0 < self.momentum < 1:
            raise error.ParameterError(
                f"BatchNorm momentum must be in (0, 1): {self.momentum}"
            )
        if np.any(self.running_var < 0):
            raise error.ParameterError("BatchNorm running_var must be >= 0")
        shapes = {a.shape for a in (self.gamma, self.beta,
                                    self.running_mean, self.running_var)}
        if len(shapes) != 1:
            raise error.ShapeError(
                f"BatchNorm state arrays have mismatched shapes: {shapes}"
            )

    @classmethod
    def initial(cls,
                num_features,
                momentum=DEFAULT_MOMENTUM,
                epsilon=DEFAULT_EPSILON,
                dtype=np.float64):
        """gamma=1, beta=0, running mean 0 and running variance 1."""
        return cls(gamma=np.ones(num_features, dtype=dtype),
                   beta=np.zeros(num_features, dtype=dtype),
                   running_mean=np.zeros(num_features, dtype=dtype),
                   running_var=np.ones(num_features, dtype=dtype),
                   momentum=momentum,
                   epsilon=epsilon)

    @property
    def num_features(self):
        return self.gamma.shape[0]


def _reduce_axes(x, num_features):
    if x.ndim == 2:
        axes, bshape = (0,), (1, -1)
    elif x.ndim == 4:
        axes, bshape = (0, 2, 3), (1, -1, 1, 1)
    else:
        raise error.ShapeError(
            f"BatchNorm expects N x F or N x C x H x W input, got {x.shape}"
        )
    if x.shape[1] != num_features:
        raise error.ShapeError(
            f"BatchNorm has {num_features} channels, input has {x.shape[1]}"
        )
    return axes, bshape


def batchnorm_forward_with_cache(x, state, training):
    """Batch normalization forward pass returning the backward cache.

    The cache is None in inference mode.
    """
    axes, bshape = _reduce_axes(x, state.num_features)
    gamma = state.gamma.reshape(bshape)
    beta = state.beta.reshape(bshape)

    if not training:
        inv_std = 1.0 / np.sqrt(state.running_var + state.epsilon)
        x_hat = (x - state.running_mean.reshape(bshape)) \
            * inv_std.reshape(bshape)
        return (gamma * x_hat + beta).astype(x.dtype, copy=False), None

    if x.shape[0] < 2:
        raise error.BatchTooSmallError(
            f"BatchNorm needs a batch of at least 2 samples in training "
            f"mode, got {x.shape[0]}"
        )
    mean = x.mean(axis=axes)
    var = x.var(axis=axes)
    inv_std = 1.0 / np.sqrt(var + state.epsilon)
    x_hat = (x - mean.reshape(bshape)) * inv_std.reshape(bshape)

    m = state.momentum
    state.running_mean[...] = m * state.running_mean + (1 - m) * mean
    state.running_var[...] = m * state.running_var + (1 - m) * var

    out = (gamma * x_hat + beta).astype(x.dtype, copy=False)
    return out, (x_hat, inv_std, axes, bshape)


def batchnorm_forward(x, state, training):
    """Normalize ``x`` with batch statistics (training) or running statistics
    (inference), then scale by gamma and shift by beta.

    Training mode also updates the running statistics of ``state`` in place:
    ``running <- momentum * running + (1 - momentum) * batch``.

    Raises
    ------
    BatchTooSmallError
        if training with fewer than 2 samples
    """
    return batchnorm_forward_with_cache(x, state, training)[0]


def batchnorm_backward(grad, state, cache):
    """Full batch-coupled gradient of the training-mode forward.

    Returns
    -------
    grad_x : ndarray
    param_grads : dict
        gradients for ``gamma`` and ``beta``
    """
    x_hat, inv_std, axes, bshape = cache
    m = x_hat.size // x_hat.shape[1]
    grad_gamma = (grad * x_hat).sum(axis=axes)
    grad_beta = grad.sum(axis=axes)
    grad_x_hat = grad * state.gamma.reshape(bshape)
    grad_x = (inv_std.reshape(bshape) / m) * (
        m * grad_x_hat
        - grad_x_hat.sum(axis=axes).reshape(bshape)
        - x_hat * (grad_x_hat * x_hat).sum(axis=axes).reshape(bshape)
    )
    return grad_x.astype(grad.dtype, copy=False), \
        {"gamma": grad_gamma, "beta": grad_beta}


class BatchNorm(Layer):
    """Batch normalization layer with learnable scale and shift."""

    kind = BATCHNORM

    def __init__(self,
                 num_features,
                 momentum=DEFAULT_MOMENTUM,
                 epsilon=DEFAULT_EPSILON,
                 dtype=np.float64,
                 name=None,
                 state=None):
        super().__init__(name)
        if state is None:
            state = BatchNormState.initial(
                num_features, momentum, epsilon, dtype
            )
        self.state = state
        self.params["gamma"] = state.gamma
        self.params["beta"] = state.beta

    @property
    def num_features(self):
        return self.state.num_features

    def forward(self, x, training=False):
        out, self._cache = batchnorm_forward_with_cache(
            x, self.state, training
        )
        return out

    def backward(self, grad):
        cache = self._require_cache()
        return batchnorm_backward(grad, self.state, cache)

    def buffers(self):
        return {"running_mean": self.state.running_mean,
                "running_var": self.state.running_var}

    def config(self):
        return {"num_features": int(self.num_features),
                "momentum": self.state.momentum,
                "epsilon": self.state.epsilon}
