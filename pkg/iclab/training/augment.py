"""Training-time image augmentation: random shifts with zero padding followed
by random horizontal flips."""
import numpy as np

from iclab import error

MAX_SHIFT = 4
FLIP_PROB = 0.5
MIN_SIZE = 8


def shift_and_flip(batch, dy, dx, flip, max_shift=MAX_SHIFT):
    """Apply fixed per-image shifts and flips.

    Image ``i`` is moved down by ``dy[i]`` and right by ``dx[i]`` pixels
    (negative values move up/left), vacated pixels are zero, then it is
    mirrored horizontally where ``flip[i]`` is set.

    Parameters
    ----------
    batch : ndarray
        ``N x C x H x W`` images
    dy, dx : array_like of int
        per-image shifts in ``[-max_shift, max_shift]``
    flip : array_like of bool
        per-image flip flags

    Returns
    -------
    ndarray
        augmented copy of ``batch``
    """
    batch = np.asarray(batch)
    if batch.ndim != 4:
        raise error.ShapeError(f"expected N x C x H x W, got {batch.shape}")
    n, _, h, w = batch.shape
    m = max_shift
    if np.any(np.abs(dy) > m) or np.any(np.abs(dx) > m):
        raise error.ParameterError(f"shifts must be within [-{m}, {m}]")
    padded = np.pad(batch, ((0, 0), (0, 0), (m, m), (m, m)))
    out = np.empty_like(batch)
    for i in range(n):
        top, left = m - int(dy[i]), m - int(dx[i])
        image = padded[i, :, top:top + h, left:left + w]
        out[i] = image[:, :, ::-1] if flip[i] else image
    return out


def augment(batch, rng, max_shift=MAX_SHIFT, flip_prob=FLIP_PROB):
    """Randomly shift every image by up to ``max_shift`` pixels along each
    axis (uniform integer shifts, zero padding), then flip it horizontally
    with probability ``flip_prob``.

    Parameters
    ----------
    batch : ndarray
        ``N x C x H x W`` images, ``H, W >= 8``
    rng : Rng
        random number generator

    Returns
    -------
    ndarray
        augmented copy of ``batch``
    """
    batch = np.asarray(batch)
    if batch.ndim != 4 or min(batch.shape[2:]) < MIN_SIZE:
        raise error.ShapeError(
            f"augment needs N x C x H x W images with H, W >= {MIN_SIZE}, "
            f"got {batch.shape}"
        )
    n = len(batch)
    dy = rng.integers(-max_shift, max_shift + 1, n)
    dx = rng.integers(-max_shift, max_shift + 1, n)
    flip = rng.random(n) < flip_prob
    return shift_and_flip(batch, dy, dx, flip, max_shift)
