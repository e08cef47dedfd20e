"""Network specifications for the CIFAR-style residual networks."""
import enum
from dataclasses import dataclass, field, asdict

from iclab import error
from iclab.layers.dropout import DROPOUT_MODES, INVERTED
from iclab.layers.normalization import DEFAULT_MOMENTUM, DEFAULT_EPSILON

DEFAULT_WIDTHS = (16, 32, 64)
DEFAULT_DROP_RATE = 0.05
BOTTLENECK_EXPANSION = 4
STEM_WIDTH = 16


class UnitLayout(enum.IntEnum):
    """Order of the layers inside one repetition of a residual branch.

    BASELINE is Conv2D-BN-ReLU, V1 is ReLU-IC-Conv2D, V2 is IC-Conv2D-ReLU
    and V3 is Conv2D-ReLU-IC.
    """
    BASELINE = 0
    V1 = 1
    V2 = 2
    V3 = 3

    @staticmethod
    def from_str(s):
        if isinstance(s, UnitLayout):
            return s
        try:
            return UnitLayout[str(s).upper()]
        except KeyError:
            valid = [layout.name.lower() for layout in UnitLayout]
            raise error.SpecError(
                f"unknown unit layout '{s}', must be one of {valid}"
            ) from None

    @property
    def uses_ic(self):
        return self is not UnitLayout.BASELINE

    def __str__(self):
        return self.name.lower()

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class ResidualUnitKind:
    layout: UnitLayout = UnitLayout.BASELINE
    bottleneck: bool = False

    @property
    def repetitions(self):
        """Number of weight layers in the residual branch."""
        return 3 if self.bottleneck else 2


@dataclass
class NetSpec:
    """Description of a residual network.

    Attributes
    ----------
    n : int
        residual units per stage
    num_classes : int
        number of output classes
    unit : ResidualUnitKind
        unit layout and plain/bottleneck form
    drop_rate : float
        dropout rate of every IC layer
    dropout_mode : str
        ``"inverted"`` or ``"theorem"``
    in_channels : int
        input image channels
    image_size : int
        input height and width
    widths : tuple of int
        3x3 convolution width of each stage
    """

    n: int = 1
    num_classes: int = 10
    unit: ResidualUnitKind = field(default_factory=ResidualUnitKind)
    drop_rate: float = DEFAULT_DROP_RATE
    dropout_mode: str = INVERTED
    in_channels: int = 3
    image_size: int = 32
    widths: tuple = DEFAULT_WIDTHS
    bn_momentum: float = DEFAULT_MOMENTUM
    bn_epsilon: float = DEFAULT_EPSILON

    @classmethod
    def from_dict(cls, d):
        """Build a spec from flat keys, ``layout`` and ``bottleneck``
        included."""
        d = dict(d)
        unit = ResidualUnitKind(
            UnitLayout.from_str(d.pop("layout", UnitLayout.BASELINE)),
            bool(d.pop("bottleneck", False))
        )
        if "widths" in d:
            d["widths"] = tuple(d["widths"])
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise error.SpecError(f"unknown network keys: {sorted(unknown)}")
        spec = cls(unit=unit, **d)
        spec.validate()
        return spec

    def to_dict(self):
        d = asdict(self)
        d.pop("unit")
        d["layout"] = str(self.layout)
        d["bottleneck"] = self.bottleneck
        d["widths"] = list(self.widths)
        return d

    @property
    def layout(self):
        return self.unit.layout

    @property
    def bottleneck(self):
        return self.unit.bottleneck

    @property
    def p_keep(self):
        return 1.0 - self.drop_rate

    @property
    def depth(self):
        """Stacked weighted layers, ``6n+2`` plain or ``9n+2`` bottleneck."""
        return 3 * self.unit.repetitions * self.n + 2

    @property
    def stage_out_channels(self):
        if self.bottleneck:
            return tuple(BOTTLENECK_EXPANSION * w for w in self.widths)
        return tuple(self.widths)

    def violations(self):
        problems = []
        if not isinstance(self.n, int) or self.n < 1:
            problems.append(f"n must be a positive integer: {self.n}")
        if not isinstance(self.num_classes, int) or self.num_classes < 2:
            problems.append(f"num_classes must be >= 2: {self.num_classes}")
        if not isinstance(self.unit.layout, UnitLayout):
            problems.append(f"invalid layout: {self.unit.layout!r}")
        if not 0 <= self.drop_rate < 1:
            problems.append(f"drop_rate must be in [0, 1): {self.drop_rate}")
        if self.dropout_mode not in DROPOUT_MODES:
            problems.append(
                f"dropout_mode must be one of {DROPOUT_MODES}: "
                f"{self.dropout_mode!r}"
            )
        if self.in_channels < 1:
            problems.append(f"in_channels must be >= 1: {self.in_channels}")
        if self.image_size < 4:
            problems.append(f"image_size must be >= 4: {self.image_size}")
        if len(self.widths) != 3 or any(w < 1 for w in self.widths):
            problems.append(
                f"widths must be three positive integers: {self.widths}"
            )
        return problems

    def validate(self):
        problems = self.violations()
        if problems:
            raise error.SpecError(
                "invalid network spec: " + "; ".join(problems)
            )
