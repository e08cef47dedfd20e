"""The base class shared by every differentiable layer.

Layer contract
--------------
- ``forward(x, training)`` computes the output. In training mode the layer
  caches what its backward pass needs. Inference mode is deterministic and
  leaves the layer without a cache.
- ``backward(grad)`` takes the gradient of the loss with respect to the
  layer output and returns ``(input_grad, param_grads)``, where
  ``param_grads`` maps each parameter name to its gradient. It may only be
  called after a training-mode forward on the same instance.
- ``parameters()`` maps parameter names to the learnable arrays, which
  optimizers update in place.

A layer is single-owner while training, distinct layers can run in parallel.
"""
from iclab import error

DENSE = "dense"
CONV2D = "conv2d"
RELU = "relu"
BATCHNORM = "batchnorm"
DROPOUT = "dropout"
IC = "ic"
AVGPOOL = "avgpool"
LAYER_KINDS = (DENSE, CONV2D, RELU, BATCHNORM, DROPOUT, IC, AVGPOOL)


class Layer:
    """Base class for differentiable layers.

    Attributes
    ----------
    kind : str
        layer type, one of :data:`LAYER_KINDS`
    name : str
        layer name, unique within its parent container
    params : dict
        learnable parameter arrays by name
    weighted : bool
        whether this is a weight layer (dense or convolution)
    projection : bool
        set on shortcut projections, which are not counted as stacked
        weight layers
    """

    kind = None
    weighted = False
    projection = False

    def __init__(self, name=None):
        self.name = self.kind if name is None else name
        self.params = {}
        self._cache = None

    def forward(self, x, training=False):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def __call__(self, x, training=False):
        return self.forward(x, training)

    def parameters(self):
        return dict(self.params)

    def buffers(self):
        """Non-learnable state saved with checkpoints (e.g. running
        statistics)."""
        return {}

    def named_layers(self, prefix=""):
        yield prefix + self.name, self

    def output_shape(self, input_shape):
        return tuple(input_shape)

    def config(self):
        """Hyperparameters recorded in checkpoint manifests."""
        return {}

    @property
    def num_params(self):
        return int(sum(p.size for p in self.params.values()))

    def _require_cache(self):
        if self._cache is None:
            raise error.UsageError(
                f"{self.kind} layer '{self.name}': backward called without a "
                "cached training-mode forward"
            )
        return self._cache

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r})"
