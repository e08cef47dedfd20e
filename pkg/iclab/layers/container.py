"""Layer containers.

Containers compose layers and follow the same forward/backward contract as a
single layer. Parameter and gradient names are qualified with the child
names, e.g. ``stage1/unit1/branch/conv1/kernel``.
"""
from iclab import error
from iclab.layers.base import Layer


class Container(Layer):
    """Base class for layers built from child layers."""

    def children(self):
        raise NotImplementedError

    def named_layers(self, prefix=""):
        """Iterate over ``(qualified_name, leaf_layer)`` pairs in forward
        order."""
        for child in self.children():
            if isinstance(child, Container):
                yield from child.named_layers(f"{prefix}{child.name}/")
            else:
                yield from child.named_layers(prefix)

    def parameters(self):
        return self._collect(lambda layer: layer.parameters())

    def buffers(self):
        return self._collect(lambda layer: layer.buffers())

    def _collect(self, getter):
        out = {}
        for lname, layer in self.named_layers():
            for key, value in getter(layer).items():
                out[f"{lname}/{key}"] = value
        return out

    @property
    def num_params(self):
        return int(sum(p.size for p in self.parameters().values()))

    @staticmethod
    def _qualify(child, grads):
        return {f"{child.name}/{k}": g for k, g in grads.items()}


class Sequential(Container):
    """Layers applied one after another."""

    kind = "sequential"

    def __init__(self, layers, name=None):
        super().__init__(name)
        names = [layer.name for layer in layers]
        if len(names) != len(set(names)):
            raise error.UsageError(
                f"Sequential '{self.name}' has duplicate child names: {names}"
            )
        self.layers = list(layers)

    def children(self):
        return list(self.layers)

    def forward(self, x, training=False):
        for layer in self.layers:
            x = layer.forward(x, training)
        return x

    def backward(self, grad):
        grads = {}
        for layer in reversed(self.layers):
            grad, layer_grads = layer.backward(grad)
            grads.update(self._qualify(layer, layer_grads))
        return grad, grads

    def output_shape(self, input_shape):
        for layer in self.layers:
            input_shape = layer.output_shape(input_shape)
        return input_shape

    def trace_shapes(self, input_shape, prefix=""):
        """Output shape of every leaf layer, in forward order.

        Returns
        -------
        list[tuple]
            ``(qualified_name, output_shape)`` pairs
        """
        shapes = []
        for layer in self.layers:
            if isinstance(layer, Container):
                child_shapes = layer.trace_shapes(
                    input_shape, f"{prefix}{layer.name}/"
                )
                shapes.extend(child_shapes)
                input_shape = layer.output_shape(input_shape)
            else:
                input_shape = layer.output_shape(input_shape)
                shapes.append((prefix + layer.name, tuple(input_shape)))
        return shapes

    def __len__(self):
        return len(self.layers)

    def __getitem__(self, idx):
        return self.layers[idx]
