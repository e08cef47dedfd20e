"""The Independent-Component (IC) layer.

An IC layer is batch normalization followed by dropout and is placed
immediately before a weight layer. The order is fixed: normalize first, gate
second. Its only learnable parameters are the BatchNorm scale and shift.
"""
import numpy as np

from iclab.layers.base import Layer, IC as IC_KIND
from iclab.layers.dropout import Dropout, DropoutSpec, dropout_forward
from iclab.layers.normalization import (
    BatchNorm, DEFAULT_MOMENTUM, DEFAULT_EPSILON, batchnorm_forward
)


def ic_forward(x, bn, drop, rng, training):
    """``dropout_forward(batchnorm_forward(x))``.

    Parameters
    ----------
    x : ndarray
        input tensor
    bn : BatchNormState
        normalization state (running statistics updated when training)
    drop : DropoutSpec
        gate keep probability and mode
    rng : Rng
        gate sampler
    training : bool
        training or inference mode
    """
    out, _ = dropout_forward(
        batchnorm_forward(x, bn, training), drop, rng, training
    )
    return out


class IC(Layer):

    kind = IC_KIND

    def __init__(self,
                 num_features,
                 spec,
                 rng,
                 momentum=DEFAULT_MOMENTUM,
                 epsilon=DEFAULT_EPSILON,
                 dtype=np.float64,
                 name=None):
        super().__init__(name)
        if not isinstance(spec, DropoutSpec):
            spec = DropoutSpec(spec)
        self.bn = BatchNorm(num_features, momentum, epsilon, dtype, "bn")
        self.dropout = Dropout(spec, rng, "dropout")
        self.params = self.bn.params

    @property
    def spec(self):
        return self.dropout.spec

    @property
    def state(self):
        return self.bn.state

    def forward(self, x, training=False):
        out = self.dropout.forward(self.bn.forward(x, training), training)
        self._cache = True if training else None
        return out

    def backward(self, grad):
        self._require_cache()
        grad, _ = self.dropout.backward(grad)
        return self.bn.backward(grad)

    def buffers(self):
        return self.bn.buffers()

    def config(self):
        return {**self.bn.config(), **self.dropout.config()}
