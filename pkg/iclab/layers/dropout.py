"""Dropout with Bernoulli gates.

iclab always speaks in terms of the KEEP probability ``p_keep``: a gate
passes its neuron with probability ``p_keep``. Frameworks (and the CLI) speak
of the drop rate, ``p_keep = 1 - drop_rate``.

Two scalings are supported:

- ``theorem`` mode multiplies by the raw gate, ``x_hat = g * x``. The
  information-theoretic results are stated for this form, so every
  verification path uses it.
- ``inverted`` mode multiplies by ``g / p_keep`` so the expected activation is
  unchanged. This is the usual framework behaviour and the training default.

Both modes are the identity at inference.
"""
from dataclasses import dataclass

import numpy as np

from iclab import error
from iclab.core import tensor
from iclab.layers.base import Layer, DROPOUT

THEOREM = "theorem"
INVERTED = "inverted"
DROPOUT_MODES = (THEOREM, INVERTED)


@dataclass(frozen=True)
class DropoutSpec:
    """Dropout keep probability and scaling mode."""

    p_keep: float
    mode: str = INVERTED

    def __post_init__(self):
        tensor.check_keep_probability(self.p_keep)
        if self.mode not in DROPOUT_MODES:
            raise error.ParameterError(
                f"dropout mode must be one of {DROPOUT_MODES}: {self.mode}"
            )

    @classmethod
    def from_drop_rate(cls, drop_rate, mode=INVERTED):
        return cls(1.0 - drop_rate, mode)

    @property
    def drop_rate(self):
        return 1.0 - self.p_keep

    @property
    def scale(self):
        return 1.0 / self.p_keep if self.mode == INVERTED else 1.0


def dropout_forward(x, spec, rng, training, mask=None):
    """Apply Bernoulli gates to ``x``.

    Parameters
    ----------
    x : ndarray
        input tensor
    spec : DropoutSpec
        keep probability and mode
    rng : Rng
        gate sampler
    training : bool
        if False the input is returned unchanged and no gates are drawn
    mask : ndarray, optional
        reuse these gates instead of sampling (default=None)

    Returns
    -------
    out : ndarray
        gated tensor
    mask : ndarray or None
        the {0, 1} gates used, None at inference
    """
    if not training:
        return x, None
    if mask is None:
        mask = tensor.sample_bernoulli(rng, spec.p_keep, x.shape, x.dtype)
    elif mask.shape != x.shape:
        raise error.ShapeError(
            f"dropout mask shape {mask.shape} != input shape {x.shape}"
        )
    out = x * mask
    if spec.mode == INVERTED:
        out = out * x.dtype.type(spec.scale)
    return out, mask


def dropout_backward(grad, spec, mask):
    grad_x = grad * mask
    if spec.mode == INVERTED:
        grad_x = grad_x * grad.dtype.type(spec.scale)
    return grad_x


class Dropout(Layer):
    """Dropout layer.

    Setting ``freeze_mask`` makes training-mode forwards reuse the last
    sampled gates while the input shape is unchanged, which gives a
    deterministic map for finite-difference checks.
    """

    kind = DROPOUT

    def __init__(self, spec, rng, name=None):
        super().__init__(name)
        self.spec = spec
        self.rng = rng
        self.freeze_mask = False
        self.last_mask = None

    def forward(self, x, training=False):
        reuse = None
        if self.freeze_mask and self.last_mask is not None \
           and self.last_mask.shape == x.shape:
            reuse = self.last_mask
        out, mask = dropout_forward(x, self.spec, self.rng, training, reuse)
        if training:
            self.last_mask = mask
        self._cache = mask
        return out

    def backward(self, grad):
        mask = self._require_cache()
        return dropout_backward(grad, self.spec, mask), {}

    def config(self):
        return {"p_keep": self.spec.p_keep, "mode": self.spec.mode}
