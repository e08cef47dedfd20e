from iclab.resnet.spec import NetSpec, ResidualUnitKind, UnitLayout
from iclab.resnet.units import ResidualUnit
from iclab.resnet.builder import (
    ResNet, build, parameter_count, weighted_layer_count, forward_shapes,
    stage_output_shapes, architecture_summary
)
