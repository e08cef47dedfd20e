"""Residual units.

A unit computes ``post(branch(x) + shortcut(x))``. The shortcut is the
identity unless the unit changes the channel count or the resolution, in
which case it is a 1x1 projection convolution with the unit's stride.
"""
import numpy as np

from iclab import error
from iclab.core import tensor
from iclab.layers import Conv2D, Sequential
from iclab.layers.container import Container


class ResidualUnit(Container):

    kind = "residual_unit"

    def __init__(self, branch, shortcut=None, post=None, name=None):
        super().__init__(name)
        self.branch = branch
        self.shortcut = shortcut
        self.post = post if post is not None else Sequential([], "post")
        if shortcut is not None and not shortcut.projection:
            raise error.UsageError(
                f"unit '{self.name}': shortcut layers must be projections"
            )

    def children(self):
        layers = [self.branch]
        if self.shortcut is not None:
            layers.append(self.shortcut)
        if len(self.post):
            layers.append(self.post)
        return layers

    def forward(self, x, training=False):
        residual = self.branch.forward(x, training)
        skip = x if self.shortcut is None \
            else self.shortcut.forward(x, training)
        return self.post.forward(tensor.add(residual, skip), training)

    def backward(self, grad):
        grads = {}
        grad, post_grads = self.post.backward(grad)
        grads.update(self._qualify(self.post, post_grads))
        grad_x, branch_grads = self.branch.backward(grad)
        grads.update(self._qualify(self.branch, branch_grads))
        if self.shortcut is None:
            grad_skip = grad
        else:
            grad_skip, skip_grads = self.shortcut.backward(grad)
            grads.update(self._qualify(self.shortcut, skip_grads))
        return grad_x + grad_skip, grads

    def _merged_shape(self, input_shape):
        branch_shape = tuple(self.branch.output_shape(input_shape))
        skip_shape = tuple(input_shape) if self.shortcut is None \
            else tuple(self.shortcut.output_shape(input_shape))
        if branch_shape != skip_shape:
            raise error.ShapeError(
                f"unit '{self.name}': branch output {branch_shape} does not "
                f"match shortcut output {skip_shape}"
            )
        return branch_shape

    def output_shape(self, input_shape):
        return self.post.output_shape(self._merged_shape(input_shape))

    def trace_shapes(self, input_shape, prefix=""):
        shapes = self.branch.trace_shapes(input_shape, f"{prefix}branch/")
        merged = self._merged_shape(input_shape)
        if self.shortcut is not None:
            shapes.append((prefix + self.shortcut.name, merged))
        shapes.extend(self.post.trace_shapes(merged, f"{prefix}post/"))
        return shapes


def projection(in_channels, out_channels, stride, rng, dtype=np.float64):
    """1x1 shortcut convolution, no normalization."""
    conv = Conv2D(in_channels, out_channels, 1, rng,
                  stride=stride, dtype=dtype, name="shortcut")
    conv.projection = True
    return conv


def needs_projection(in_channels, out_channels, stride):
    return in_channels != out_channels or stride != 1
