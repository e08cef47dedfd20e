"""Build residual networks from a :class:`NetSpec`.

Every network is ``stem -> stage1 -> stage2 -> stage3 -> pool -> head``.
Stage ``k`` holds ``n`` residual units, the first unit of stages 2 and 3
subsamples with stride 2. The layouts are arranged so that every IC variant
has exactly as many learnable parameters as the baseline:

=========  ===================  ==========================  ================
layout     stem                 branch repetition           final unit post
=========  ===================  ==========================  ================
baseline   Conv2D-BN-ReLU       Conv2D-BN-ReLU (last ReLU   ReLU (every unit)
                                after the addition)
v1         Conv2D               ReLU-IC-Conv2D              ReLU-IC
v2         Conv2D               IC-Conv2D-ReLU              IC
v3         Conv2D-ReLU-IC       Conv2D-ReLU-IC              none
=========  ===================  ==========================  ================
"""
import numpy as np

from iclab.core.rng import Rng
from iclab.layers import (
    Conv2D, ReLU, BatchNorm, IC, DropoutSpec, GlobalAvgPool, Dense, Sequential
)
from iclab.resnet.spec import UnitLayout, STEM_WIDTH, BOTTLENECK_EXPANSION
from iclab.resnet.units import ResidualUnit, projection, needs_projection

CONV = "conv"
BN = "bn"
RELU = "relu"
IC_OP = "ic"

TRIPLES = {
    UnitLayout.BASELINE: (CONV, BN, RELU),
    UnitLayout.V1: (RELU, IC_OP, CONV),
    UnitLayout.V2: (IC_OP, CONV, RELU),
    UnitLayout.V3: (CONV, RELU, IC_OP),
}

STEMS = {
    UnitLayout.BASELINE: (CONV, BN, RELU),
    UnitLayout.V1: (CONV,),
    UnitLayout.V2: (CONV,),
    UnitLayout.V3: (CONV, RELU, IC_OP),
}

FINAL_POST = {
    UnitLayout.BASELINE: (RELU,),
    UnitLayout.V1: (RELU, IC_OP),
    UnitLayout.V2: (IC_OP,),
    UnitLayout.V3: (),
}


class ResNet(Sequential):
    """A built residual network, a :class:`Sequential` with its spec."""

    kind = "resnet"

    def __init__(self, layers, spec):
        super().__init__(layers, name="resnet")
        self.spec = spec

    @property
    def head(self):
        return self.layers[-1]

    def input_shape(self, batch_size=1):
        return (batch_size, self.spec.in_channels,
                self.spec.image_size, self.spec.image_size)


class _LayerFactory:
    """Creates named layers while tracking the current channel count."""

    def __init__(self, spec, init_rng, gate_rng, dtype):
        self.spec = spec
        self.init_rng = init_rng
        self.gate_rng = gate_rng
        self.dtype = dtype
        self.counts = {}

    def reset(self):
        self.counts = {}

    def _name(self, op):
        self.counts[op] = self.counts.get(op, 0) + 1
        return f"{op}{self.counts[op]}"

    def conv(self, in_ch, out_ch, kernel, stride=1):
        return Conv2D(in_ch, out_ch, kernel, self.init_rng, stride=stride,
                      dtype=self.dtype, name=self._name(CONV))

    def make(self, op, channels):
        if op == BN:
            return BatchNorm(channels, self.spec.bn_momentum,
                             self.spec.bn_epsilon, self.dtype,
                             name=self._name(BN))
        if op == RELU:
            return ReLU(name=self._name(RELU))
        if op == IC_OP:
            drop = DropoutSpec(self.spec.p_keep, self.spec.dropout_mode)
            return IC(channels, drop, self.gate_rng, self.spec.bn_momentum,
                      self.spec.bn_epsilon, self.dtype, name=self._name(IC_OP))
        raise ValueError(f"unknown op {op}")

    def sequence(self, ops, convs, channels):
        """Lay out ``ops``, taking conv arguments from ``convs`` in order.

        Returns
        -------
        layers : list[Layer]
        channels : int
            channel count after the last layer
        """
        convs = iter(convs)
        layers = []
        for op in ops:
            if op == CONV:
                out_ch, kernel, stride = next(convs)
                layers.append(self.conv(channels, out_ch, kernel, stride))
                channels = out_ch
            else:
                layers.append(self.make(op, channels))
        return layers, channels


def _branch_convs(spec, width, stride):
    """``(out_channels, kernel, stride)`` of each branch convolution."""
    if spec.bottleneck:
        return [(width, 1, stride), (width, 3, 1),
                (width * BOTTLENECK_EXPANSION, 1, 1)]
    return [(width, 3, stride), (width, 3, 1)]


def _build_unit(factory, spec, in_ch, width, stride, is_last, name):
    factory.reset()
    layout = spec.layout
    convs = _branch_convs(spec, width, stride)
    ops = TRIPLES[layout] * len(convs)
    if layout is UnitLayout.BASELINE:
        # the closing ReLU moves after the addition
        ops = ops[:-1]
    branch_layers, out_ch = factory.sequence(ops, convs, in_ch)

    shortcut = None
    if needs_projection(in_ch, out_ch, stride):
        shortcut = projection(in_ch, out_ch, stride, factory.init_rng,
                              factory.dtype)

    post_ops = ()
    if layout is UnitLayout.BASELINE or is_last:
        post_ops = FINAL_POST[layout]
    factory.reset()
    post_layers, _ = factory.sequence(post_ops, [], out_ch)
    unit = ResidualUnit(Sequential(branch_layers, "branch"),
                        shortcut,
                        Sequential(post_layers, "post"),
                        name=name)
    return unit, out_ch


def build(spec, rng=None, dtype=np.float64):
    """Build the network described by ``spec``.

    Parameters
    ----------
    spec : NetSpec
        network description
    rng : Rng, optional
        weights are initialized from one child of ``rng``, IC gates are
        sampled from another (default=Rng(0))
    dtype : numpy dtype, optional
        parameter dtype (default=float64)

    Returns
    -------
    ResNet

    Raises
    ------
    SpecError
        if ``spec`` violates one of its invariants
    """
    spec.validate()
    rng = Rng(0) if rng is None else rng
    init_rng, gate_rng = rng.spawn(2)
    factory = _LayerFactory(spec, init_rng, gate_rng, dtype)

    stem_layers, channels = factory.sequence(
        STEMS[spec.layout], [(STEM_WIDTH, 3, 1)], spec.in_channels
    )
    layers = [Sequential(stem_layers, "stem")]

    for s, width in enumerate(spec.widths):
        units = []
        for u in range(spec.n):
            stride = 2 if s > 0 and u == 0 else 1
            is_last = s == len(spec.widths) - 1 and u == spec.n - 1
            unit, channels = _build_unit(
                factory, spec, channels, width, stride, is_last, f"unit{u+1}"
            )
            units.append(unit)
        layers.append(Sequential(units, f"stage{s+1}"))

    layers.append(GlobalAvgPool(name="pool"))
    layers.append(Dense(channels, spec.num_classes, init_rng, dtype=dtype,
                        name="head"))
    network = ResNet(layers, spec)
    # surfaces branch/shortcut mismatches at build time
    network.output_shape(network.input_shape())
    return network


def parameter_count(network):
    """Total learnable scalars: kernels, biases, dense weights and the
    BatchNorm scale and shift pairs."""
    return network.num_params


def weighted_layer_count(network):
    """Stacked weight layers, shortcut projections excluded."""
    return sum(1 for _, layer in network.named_layers()
               if layer.weighted and not layer.projection)


def forward_shapes(spec, batch_size=1):
    """Output shape of every leaf layer for a ``batch_size`` input.

    Returns
    -------
    list[tuple]
        ``(qualified_name, shape)`` pairs in forward order
    """
    network = build(spec)
    return network.trace_shapes(network.input_shape(batch_size))


def stage_output_shapes(network, batch_size=1):
    shape = network.input_shape(batch_size)
    out = []
    for layer in network.layers:
        shape = layer.output_shape(shape)
        if layer.name.startswith("stage"):
            out.append(tuple(shape))
    return out


def architecture_summary(network, batch_size=1):
    """JSON-ready description: spec, layers with shapes, counts."""
    shapes = dict(network.trace_shapes(network.input_shape(batch_size)))
    layers = []
    for name, layer in network.named_layers():
        layers.append({
            "name": name,
            "kind": layer.kind,
            "output_shape": list(shapes[name]),
            "num_params": layer.num_params,
            "projection": layer.projection,
        })
    return {
        "spec": network.spec.to_dict(),
        "depth": network.spec.depth,
        "weighted_layer_count": weighted_layer_count(network),
        "parameter_count": parameter_count(network),
        "stage_output_shapes": [list(s) for s in
                                stage_output_shapes(network, batch_size)],
        "layers": layers,
    }
