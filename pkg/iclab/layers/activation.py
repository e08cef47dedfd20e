import numpy as np

from iclab import error
from iclab.core import tensor
from iclab.layers.base import Layer, RELU, AVGPOOL


class ReLU(Layer):

    kind = RELU

    def forward(self, x, training=False):
        self._cache = (x > 0) if training else None
        return tensor.relu(x)

    def backward(self, grad):
        positive = self._require_cache()
        return grad * positive, {}


class GlobalAvgPool(Layer):
    """Average an ``N x C x H x W`` tensor over its spatial axes."""

    kind = AVGPOOL

    def forward(self, x, training=False):
        self._cache = x.shape if training else None
        return tensor.global_avg_pool(x)

    def backward(self, grad):
        shape = self._require_cache()
        if grad.shape != shape[:2]:
            raise error.ShapeError(
                f"avgpool upstream gradient {grad.shape} != {shape[:2]}"
            )
        grad_x = grad[:, :, None, None] / (shape[2] * shape[3])
        return np.broadcast_to(grad_x, shape).copy(), {}

    def output_shape(self, input_shape):
        return tuple(input_shape[:2])
