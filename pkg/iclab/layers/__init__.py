from iclab.layers.base import Layer, LAYER_KINDS
from iclab.layers.init import he_init
from iclab.layers.dense import Dense
from iclab.layers.conv import Conv2D
from iclab.layers.activation import ReLU, GlobalAvgPool
from iclab.layers.normalization import (
    BatchNorm, BatchNormState, batchnorm_forward
)
from iclab.layers.dropout import (
    Dropout, DropoutSpec, dropout_forward, THEOREM, INVERTED
)
from iclab.layers.ic import IC, ic_forward
from iclab.layers.container import Container, Sequential
from iclab.layers.losses import softmax_cross_entropy, accuracy
from iclab.layers.checkpoint import save_checkpoint, load_checkpoint


def backward(layer, upstream_grad):
    """Backpropagate ``upstream_grad`` through ``layer``.

    Returns
    -------
    input_grad : ndarray
    param_grads : dict
    """
    return layer.backward(upstream_grad)
