from iclab.configs.benchmark import AVAIL_BENCHMARKS
from iclab.training import load_config, train
from iclab.resnet import NetSpec, build

__version__ = "0.1.0"

__all__ = ['make_benchmark_config', 'load', 'NetSpec', 'build', 'train']


def make_benchmark_config(name, **overrides):
    """Load a bundled benchmark run config.

    Parameters
    ----------
    name : str
        the name of the benchmark config
    overrides : dict, optional
        config keys to replace, validated like the file contents

    Returns
    -------
    RunConfig
        the validated run config

    Raises
    ------
    NotImplementedError
        if name does not match any bundled benchmark config
    ConfigError
        if the config refers to data files that do not exist
    """
    if name not in AVAIL_BENCHMARKS:
        raise NotImplementedError(
            f"Benchmark config '{name}' not available. "
            f"Available configs are: {list(AVAIL_BENCHMARKS)}"
        )
    config = load_config(AVAIL_BENCHMARKS[name]["file"], name=name)
    if overrides:
        config = config.with_overrides(**overrides)
    return config


def load(path, name=None):
    """Load a run config from a .yaml file.

    Parameters
    ----------
    path : str
        path to the .yaml run config
    name : str, optional
        the run's name, if None name will be generated from path
        (default=None)

    Returns
    -------
    RunConfig
    """
    return load_config(path, name=name)
