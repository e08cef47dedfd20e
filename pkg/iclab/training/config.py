"""This module contains functionality for loading run configurations from yaml
files.

A run config is a flat mapping, e.g.::

    seed: 0
    layout: v1
    n: 1
    epochs: 15
    data_format: synthetic
    lr: 0.001
    lr_milestones: [[80, 10], [120, 10], [160, 10]]

Floats must be written with a decimal point (``0.001`` not ``1e-3``), yaml
reads the latter as a string.
"""
import os.path as osp
from pprint import pprint
from dataclasses import dataclass, asdict, fields

import yaml

import iclab.training.utils as u
from iclab import error
from iclab.layers.dropout import DROPOUT_MODES, INVERTED
from iclab.resnet.spec import NetSpec, UnitLayout, DEFAULT_DROP_RATE


# dictionary of valid key names and value types for config file
VALID_CONFIG_KEYS = {
    u.SEED: int,
    u.LAYOUT: str,
    u.N: int,
    u.EPOCHS: int,
    u.DATA_FORMAT: str,
}

# optional keys with their value types and defaults
OPTIONAL_CONFIG_KEYS = {
    u.BOTTLENECK: (bool, False),
    u.NUM_CLASSES: (int, 10),
    u.DROP_RATE: ((int, float), DEFAULT_DROP_RATE),
    u.DROPOUT_MODE: (str, INVERTED),
    u.OPTIMIZER: (str, u.ADAM),
    u.LR: ((int, float), 0.001),
    u.LR_MILESTONES: (list, []),
    u.MOMENTUM: ((int, float), 0.9),
    u.BATCH_SIZE: (int, 64),
    u.EVAL_BATCH_SIZE: (int, 256),
    u.TRAIN_PATH: ((str, type(None)), None),
    u.TEST_PATH: ((str, type(None)), None),
    u.SUBSET_SIZE: ((int, type(None)), None),
    u.IMAGE_SIZE: (int, 32),
    u.SYNTHETIC_TRAIN: (int, 200),
    u.SYNTHETIC_TEST: (int, 50),
    u.SYNTHETIC_NOISE: ((int, float), 0.5),
    u.AUGMENT: (bool, True),
    u.OUTPUT_DIR: ((str, type(None)), None),
    u.CHECKPOINT: (bool, True),
    u.TENSORBOARD: (bool, False),
    u.VERBOSE: (bool, False),
    u.ZIGZAG_NETS: (int, 100),
    u.ZIGZAG_WIDTH: (int, 8),
}


@dataclass
class RunConfig:
    """A validated run configuration.

    Field names are the config keys, see :mod:`iclab.training.utils`.
    ``lr_milestones`` is a tuple of ``(epoch, divisor)`` pairs.
    """

    seed: int
    layout: str
    n: int
    epochs: int
    data_format: str
    bottleneck: bool = False
    num_classes: int = 10
    drop_rate: float = DEFAULT_DROP_RATE
    dropout_mode: str = INVERTED
    optimizer: str = u.ADAM
    lr: float = 0.001
    lr_milestones: tuple = ()
    momentum: float = 0.9
    batch_size: int = 64
    eval_batch_size: int = 256
    train_path: str = None
    test_path: str = None
    subset_size: int = None
    image_size: int = 32
    synthetic_train_per_class: int = 200
    synthetic_test_per_class: int = 50
    synthetic_noise: float = 0.5
    augment: bool = True
    output_dir: str = None
    checkpoint: bool = True
    tensorboard: bool = False
    verbose: bool = False
    zigzag_nets: int = 100
    zigzag_width: int = 8
    name: str = None

    def to_dict(self):
        d = asdict(self)
        d.pop("name")
        d[u.LR_MILESTONES] = [list(m) for m in self.lr_milestones]
        return d

    def net_spec(self, in_channels=3, image_size=None):
        """Network spec for inputs with the given channels and size
        (``image_size`` from the config if None)."""
        return NetSpec.from_dict({
            "n": self.n,
            "num_classes": self.num_classes,
            "layout": self.layout,
            "bottleneck": self.bottleneck,
            "drop_rate": self.drop_rate,
            "dropout_mode": self.dropout_mode,
            "in_channels": in_channels,
            "image_size": self.image_size if image_size is None
            else image_size,
        })

    def with_overrides(self, **kwargs):
        d = self.to_dict()
        d.update(kwargs)
        return ConfigLoader().parse(d, name=self.name)

    def display(self):
        print(f"\nRun config '{self.name}':")
        pprint(self.to_dict(), sort_dicts=False)


class ConfigLoader:

    def load(self, file_path, name=None):
        """Load a run config from file

        Arguments
        ---------
        file_path : str
            path to run config file
        name : str, optional
            the run's name, if None name will be generated from file path
            (default=None)

        Returns
        -------
        RunConfig
            the validated configuration

        Raises
        ------
        ConfigError
            if the file is missing, not valid yaml, or the config is invalid
        """
        if not osp.isfile(file_path):
            raise error.ConfigError(f"config file not found: {file_path}")
        try:
            yaml_dict = u.load_yaml(file_path)
        except yaml.YAMLError as e:
            raise error.ConfigError(f"could not parse {file_path}: {e}")
        if name is None:
            name = u.get_file_name(file_path)
        return self.parse(yaml_dict, name)

    def parse(self, yaml_dict, name=None):
        """Validate a config mapping and build a :class:`RunConfig`."""
        self.yaml_dict = yaml_dict
        self.name = name
        try:
            self._check_config_keys_valid()
            self._check_values_valid()
        except AssertionError as e:
            raise error.ConfigError(f"invalid run config '{name}': {e}")
        return self._construct_config()

    def _check_config_keys_valid(self):
        """Checks config contains all required keys and every value has a
        valid type."""
        assert isinstance(self.yaml_dict, dict), \
            f"config must be a mapping, got {type(self.yaml_dict).__name__}"

        for k in VALID_CONFIG_KEYS:
            assert k in self.yaml_dict, f"missing required key '{k}'"

        for k, v in self.yaml_dict.items():
            assert k in VALID_CONFIG_KEYS or k in OPTIONAL_CONFIG_KEYS, \
                (f"{k} not a valid config key. Valid keys are: "
                 f"{list(VALID_CONFIG_KEYS) + list(OPTIONAL_CONFIG_KEYS)}")
            if k in VALID_CONFIG_KEYS:
                expected_type = VALID_CONFIG_KEYS[k]
            else:
                expected_type = OPTIONAL_CONFIG_KEYS[k][0]
            assert isinstance(v, expected_type), \
                (f"invalid type for config key '{k}': expected "
                 f"{expected_type}, got {type(v).__name__} ({v!r})")
            if expected_type in (int, (int, float)):
                assert not isinstance(v, bool), \
                    f"invalid type for config key '{k}': got bool"

    def _check_values_valid(self):
        d = {k: v[1] for k, v in OPTIONAL_CONFIG_KEYS.items()}
        d.update(self.yaml_dict)

        assert d[u.SEED] >= 0, f"{u.SEED} must be >= 0: {d[u.SEED]}"
        valid_layouts = [str(layout) for layout in UnitLayout]
        assert d[u.LAYOUT] in valid_layouts, \
            f"{u.LAYOUT} must be one of {valid_layouts}: {d[u.LAYOUT]!r}"
        assert d[u.N] >= 1, f"{u.N} must be >= 1: {d[u.N]}"
        assert d[u.EPOCHS] >= 1, f"{u.EPOCHS} must be >= 1: {d[u.EPOCHS]}"
        assert d[u.DATA_FORMAT] in u.DATA_FORMATS, \
            (f"{u.DATA_FORMAT} must be one of {u.DATA_FORMATS}: "
             f"{d[u.DATA_FORMAT]!r}")
        assert d[u.NUM_CLASSES] >= 2, \
            f"{u.NUM_CLASSES} must be >= 2: {d[u.NUM_CLASSES]}"
        assert 0 <= d[u.DROP_RATE] < 1, \
            f"{u.DROP_RATE} must be in [0, 1): {d[u.DROP_RATE]}"
        assert d[u.DROPOUT_MODE] in DROPOUT_MODES, \
            f"{u.DROPOUT_MODE} must be one of {DROPOUT_MODES}"
        assert d[u.OPTIMIZER] in u.OPTIMIZERS, \
            f"{u.OPTIMIZER} must be one of {u.OPTIMIZERS}: {d[u.OPTIMIZER]!r}"
        assert d[u.LR] > 0, f"{u.LR} must be > 0: {d[u.LR]}"
        assert 0 <= d[u.MOMENTUM] < 1, \
            f"{u.MOMENTUM} must be in [0, 1): {d[u.MOMENTUM]}"
        # BatchNorm needs two samples for batch statistics
        assert d[u.BATCH_SIZE] >= 2, \
            f"{u.BATCH_SIZE} must be >= 2: {d[u.BATCH_SIZE]}"
        assert d[u.EVAL_BATCH_SIZE] >= 1, \
            f"{u.EVAL_BATCH_SIZE} must be >= 1: {d[u.EVAL_BATCH_SIZE]}"
        assert d[u.IMAGE_SIZE] >= 8, \
            f"{u.IMAGE_SIZE} must be >= 8: {d[u.IMAGE_SIZE]}"
        subset = d[u.SUBSET_SIZE]
        assert subset is None or subset >= d[u.NUM_CLASSES], \
            f"{u.SUBSET_SIZE} must be >= {u.NUM_CLASSES}: {d[u.SUBSET_SIZE]}"
        assert d[u.SYNTHETIC_TRAIN] >= 1 and d[u.SYNTHETIC_TEST] >= 1, \
            "synthetic sample counts must be >= 1"
        assert d[u.SYNTHETIC_NOISE] >= 0, \
            f"{u.SYNTHETIC_NOISE} must be >= 0: {d[u.SYNTHETIC_NOISE]}"
        assert d[u.ZIGZAG_NETS] >= 1 and d[u.ZIGZAG_WIDTH] >= 1, \
            "zigzag_nets and zigzag_width must be >= 1"

        self._check_milestones(d[u.LR_MILESTONES])

        if d[u.DATA_FORMAT] != u.SYNTHETIC:
            for k in (u.TRAIN_PATH, u.TEST_PATH):
                assert d[k] is not None, \
                    f"{k} is required for data_format {d[u.DATA_FORMAT]}"
                assert osp.exists(d[k]), f"{k} does not exist: {d[k]}"

    def _check_milestones(self, milestones):
        last_epoch = -1
        for m in milestones:
            assert isinstance(m, (list, tuple)) and len(m) == 2, \
                f"{u.LR_MILESTONES} entries must be [epoch, divisor]: {m!r}"
            epoch, divisor = m
            assert isinstance(epoch, int) and epoch > last_epoch, \
                (f"{u.LR_MILESTONES} epochs must be increasing integers: "
                 f"{milestones!r}")
            assert isinstance(divisor, (int, float)) and divisor >= 1, \
                f"{u.LR_MILESTONES} divisors must be >= 1: {m!r}"
            last_epoch = epoch

    def _construct_config(self):
        d = {k: v[1] for k, v in OPTIONAL_CONFIG_KEYS.items()}
        d.update(self.yaml_dict)
        d[u.LR_MILESTONES] = tuple(
            (int(e), float(div)) for e, div in d[u.LR_MILESTONES]
        )
        for k in (u.LR, u.DROP_RATE, u.MOMENTUM, u.SYNTHETIC_NOISE):
            d[k] = float(d[k])
        valid_fields = {f.name for f in fields(RunConfig)}
        assert set(d) <= valid_fields
        return RunConfig(name=self.name, **d)


def load_config(file_path, name=None):
    return ConfigLoader().load(file_path, name)


def dump_config(config, file_path):
    """Write ``config`` as yaml, readable again with :func:`load_config`."""
    with open(file_path, "w") as fout:
        yaml.safe_dump(config.to_dict(), fout, sort_keys=False)
    return file_path
