"""Weight initialization."""
import numpy as np

from iclab import error


def he_init(rng, shape, fan_in, dtype=np.float64):
    """He (Kaiming) normal initialization.

    Samples i.i.d. normal values with mean 0 and variance ``2 / fan_in``.

    Parameters
    ----------
    rng : Rng
        random number generator
    shape : tuple
        shape of weight tensor
    fan_in : int
        number of inputs feeding each output unit
    dtype : numpy dtype, optional
        output dtype (default=float64)

    Raises
    ------
    ParameterError
        if ``fan_in < 1``
    """
    if fan_in < 1:
        raise error.ParameterError(f"fan_in must be >= 1: {fan_in}")
    std = np.sqrt(2.0 / fan_in)
    return rng.normal(0.0, std, tuple(shape)).astype(dtype)
