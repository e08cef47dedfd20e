import numpy as np

from iclab.core import tensor
from iclab.layers.base import Layer, CONV2D
from iclab.layers.init import he_init


class Conv2D(Layer):
    """2D convolution over ``N x C x H x W`` inputs."""

    kind = CONV2D
    weighted = True

    def __init__(self,
                 in_channels,
                 out_channels,
                 kernel_size,
                 rng,
                 stride=1,
                 pad=tensor.SAME,
                 use_bias=True,
                 dtype=np.float64,
                 name=None):
        super().__init__(name)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.pad = pad
        self.use_bias = use_bias
        fan_in = in_channels * kernel_size * kernel_size
        self.params["kernel"] = he_init(
            rng,
            (out_channels, in_channels, kernel_size, kernel_size),
            fan_in,
            dtype
        )
        if use_bias:
            self.params["bias"] = np.zeros(out_channels, dtype=dtype)

    def forward(self, x, training=False):
        y = tensor.conv2d(x, self.params["kernel"], self.stride, self.pad)
        if self.use_bias:
            y += self.params["bias"][None, :, None, None]
        self._cache = x if training else None
        return y

    def backward(self, grad):
        x = self._require_cache()
        grad_x, grad_kernel = tensor.conv2d_backward(
            x, self.params["kernel"], grad, self.stride, self.pad
        )
        grads = {"kernel": grad_kernel}
        if self.use_bias:
            grads["bias"] = grad.sum(axis=(0, 2, 3))
        return grad_x, grads

    def output_shape(self, input_shape):
        n, _, h, w = input_shape
        k = self.kernel_size
        return (n,
                self.out_channels,
                tensor.conv_output_size(h, k, self.stride, self.pad),
                tensor.conv_output_size(w, k, self.stride, self.pad))

    def config(self):
        return {"in_channels": self.in_channels,
                "out_channels": self.out_channels,
                "kernel_size": self.kernel_size,
                "stride": self.stride,
                "pad": self.pad,
                "use_bias": self.use_bias}
