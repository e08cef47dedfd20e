import numpy as np

from iclab import error
from iclab.core import tensor
from iclab.layers.base import Layer, DENSE
from iclab.layers.init import he_init


class Dense(Layer):
    """Fully connected layer ``y = W x + b``.

    ``W`` has shape ``out_features x in_features`` so row ``j`` holds the
    incoming weights of output neuron ``j``. Inputs are ``N x in_features``.
    """

    kind = DENSE
    weighted = True

    def __init__(self,
                 in_features,
                 out_features,
                 rng,
                 use_bias=True,
                 dtype=np.float64,
                 name=None):
        super().__init__(name)
        self.in_features = in_features
        self.out_features = out_features
        self.use_bias = use_bias
        self.params["weight"] = he_init(
            rng, (out_features, in_features), in_features, dtype
        )
        if use_bias:
            self.params["bias"] = np.zeros(out_features, dtype=dtype)

    def forward(self, x, training=False):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise error.ShapeError(
                f"dense layer '{self.name}' expects N x {self.in_features} "
                f"input, got {x.shape}"
            )
        y = tensor.matmul(x, self.params["weight"].T)
        if self.use_bias:
            y = y + self.params["bias"]
        self._cache = x if training else None
        return y

    def backward(self, grad):
        x = self._require_cache()
        grads = {"weight": tensor.matmul(grad.T, x)}
        if self.use_bias:
            grads["bias"] = grad.sum(axis=0)
        return tensor.matmul(grad, self.params["weight"]), grads

    def per_sample_grads(self, grad):
        """Weight gradient of every sample separately.

        For sample ``n`` the gradient row of output ``j`` is
        ``grad[n, j] * x[n]``, i.e. the outer product ``delta x^T``.

        Returns
        -------
        ndarray
            ``N x out_features x in_features``
        """
        x = self._require_cache()
        return np.einsum("no,ni->noi", grad, x)

    def output_shape(self, input_shape):
        return (input_shape[0], self.out_features)

    def config(self):
        return {"in_features": self.in_features,
                "out_features": self.out_features,
                "use_bias": self.use_bias}
