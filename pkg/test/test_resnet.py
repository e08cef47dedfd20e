"""Tests for the residual network builder and its layouts."""
import numpy as np
import pytest

from iclab import error
from iclab.core import Rng
from iclab.layers import Conv2D, Sequential
from iclab.resnet import (
    NetSpec, ResidualUnit, UnitLayout, architecture_summary, build,
    forward_shapes, parameter_count, stage_output_shapes, weighted_layer_count
)

IC_LAYOUTS = ["v1", "v2", "v3"]


def make_spec(**kwargs):
    d = {"n": 1, "layout": "baseline"}
    d.update(kwargs)
    return NetSpec.from_dict(d)


@pytest.mark.parametrize("bottleneck", [False, True])
@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("layout", IC_LAYOUTS)
def test_parameter_parity(layout, n, bottleneck):
    baseline = build(make_spec(n=n, bottleneck=bottleneck))
    variant = build(make_spec(n=n, layout=layout, bottleneck=bottleneck))
    assert parameter_count(variant) == parameter_count(baseline)


@pytest.mark.parametrize("layout", ["baseline"] + IC_LAYOUTS)
@pytest.mark.parametrize("n,bottleneck,expected", [
    (1, False, 8), (2, False, 14), (2, True, 20), (3, False, 20),
])
def test_weighted_layer_count(layout, n, bottleneck, expected):
    spec = make_spec(n=n, layout=layout, bottleneck=bottleneck)
    assert spec.depth == expected
    assert weighted_layer_count(build(spec)) == expected


def test_baseline_parameter_count_by_hand():
    def conv(c_in, c_out, k):
        return c_in * c_out * k * k + c_out

    def bn(c):
        return 2 * c

    expected = (
        conv(3, 16, 3) + bn(16)
        + 2 * (conv(16, 16, 3) + bn(16))
        + conv(16, 32, 3) + conv(32, 32, 3) + 2 * bn(32) + conv(16, 32, 1)
        + conv(32, 64, 3) + conv(64, 64, 3) + 2 * bn(64) + conv(32, 64, 1)
        + 64 * 10 + 10
    )
    assert parameter_count(build(make_spec())) == expected


@pytest.mark.parametrize("layout", ["baseline"] + IC_LAYOUTS)
def test_stage_output_shapes(layout):
    network = build(make_spec(layout=layout))
    assert stage_output_shapes(network, 2) == \
        [(2, 16, 32, 32), (2, 32, 16, 16), (2, 64, 8, 8)]


def test_bottleneck_stage_channels():
    network = build(make_spec(bottleneck=True))
    shapes = stage_output_shapes(network, 1)
    assert [s[1] for s in shapes] == [64, 128, 256]
    assert network.head.params["weight"].shape[1] == 256


def test_forward_shapes_end_in_logits():
    shapes = forward_shapes(make_spec(layout="v1"), batch_size=3)
    names = [name for name, _ in shapes]
    assert names[-2:] == ["pool", "head"]
    assert shapes[-2][1] == (3, 64)
    assert shapes[-1][1] == (3, 10)
    assert "stage2/unit1/shortcut" in names
    assert "stage3/unit1/post/ic1" in names


def test_forward_pass_shape():
    network = build(make_spec(layout="v2", image_size=8, num_classes=4))
    x = Rng(0).normal(0.0, 1.0, network.input_shape(5))
    assert network.forward(x, training=True).shape == (5, 4)
    assert network.forward(x, training=False).shape == (5, 4)


@pytest.mark.parametrize("kwargs", [
    {"layout": "v4"}, {"n": 0}, {"num_classes": 1}, {"drop_rate": 1.0},
    {"widths": [16, 32]}, {"dropout_mode": "bad"}, {"depth": 20},
])
def test_invalid_spec(kwargs):
    with pytest.raises(error.SpecError):
        make_spec(**kwargs)


def test_unit_layout_strings():
    assert UnitLayout.from_str("V2") is UnitLayout.V2
    assert UnitLayout.from_str(UnitLayout.V3) is UnitLayout.V3
    assert str(UnitLayout.BASELINE) == "baseline"
    assert not UnitLayout.BASELINE.uses_ic
    assert UnitLayout.V1.uses_ic


def test_spec_round_trip():
    spec = make_spec(n=2, layout="v3", bottleneck=True, drop_rate=0.1)
    assert NetSpec.from_dict(spec.to_dict()) == spec


def test_identity_unit_with_zero_branch():
    conv = Conv2D(4, 4, 3, Rng(0), name="conv1")
    conv.params["kernel"][...] = 0.0
    unit = ResidualUnit(Sequential([conv], "branch"), name="unit")
    x = Rng(1).normal(0.0, 1.0, (2, 4, 5, 5))
    np.testing.assert_array_equal(unit.forward(x, training=False), x)


def test_shortcut_must_be_projection():
    branch = Sequential([Conv2D(4, 8, 3, Rng(0), name="conv1")], "branch")
    with pytest.raises(error.UsageError):
        ResidualUnit(branch, Conv2D(4, 8, 1, Rng(0), name="shortcut"))


def test_architecture_summary():
    network = build(make_spec(n=2, layout="v1"))
    summary = architecture_summary(network)
    assert summary["depth"] == summary["weighted_layer_count"] == 14
    assert summary["parameter_count"] == parameter_count(network)
    assert summary["spec"]["layout"] == "v1"
    assert summary["stage_output_shapes"][-1] == [1, 64, 8, 8]
    projections = [layer["name"] for layer in summary["layers"]
                   if layer["projection"]]
    assert projections == ["stage2/unit1/shortcut", "stage3/unit1/shortcut"]


def test_build_is_deterministic():
    spec = make_spec(layout="v3", image_size=8)
    a = build(spec, Rng(5)).parameters()
    b = build(spec, Rng(5)).parameters()
    assert a.keys() == b.keys()
    for k in a:
        np.testing.assert_array_equal(a[k], b[k])
    c = build(spec, Rng(6)).parameters()
    assert not np.array_equal(a["head/weight"], c["head/weight"])
