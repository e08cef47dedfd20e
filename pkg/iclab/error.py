"""Errors raised by iclab.

Every public precondition failure raises one of the classes below, so callers
can catch a single :class:`Error` or a specific kind.
"""


class Error(Exception):
    """Base class for all iclab errors."""


class ShapeError(Error):
    """Tensor shapes are incompatible with the requested operation."""


class ParameterError(Error):
    """A scalar parameter (probability, fan-in, bin count, ...) is out of
    range."""


class BatchTooSmallError(Error):
    """BatchNorm was asked to compute batch statistics from fewer than two
    samples."""


class UsageError(Error):
    """An object was used out of order, e.g. backward without a cached
    forward."""


class DistributionError(Error):
    """A probability mass function is not valid."""


class PreconditionError(Error):
    """Inputs violate a documented precondition of an operation."""


class DivergenceError(Error):
    """An iterative optimizer diverged."""


class SpecError(Error):
    """A network specification violates one of its invariants."""


class ConfigError(Error):
    """A run configuration is invalid or refers to missing files."""


class FormatError(Error):
    """A binary file could not be parsed.

    Attributes
    ----------
    offset : int or None
        byte offset at which parsing failed
    """

    def __init__(self, msg, offset=None):
        if offset is not None:
            msg = f"{msg} (at byte offset {offset})"
        super().__init__(msg)
        self.offset = offset


class TrainingDivergedError(Error):
    """Training produced a non-finite loss.

    Attributes
    ----------
    dump : dict
        diagnostic information (epoch, batch, per-layer parameter norms)
    """

    def __init__(self, msg, dump=None):
        super().__init__(msg)
        self.dump = {} if dump is None else dump


class DependencyNotInstalled(Error):
    """An optional dependency is required but not installed."""
