"""Histogram plug-in estimates of mutual information from samples."""
from dataclasses import dataclass

import numpy as np

from iclab import error
from iclab.core.tensor import sample_bernoulli
from iclab.infotheory.measures import mutual_information

MIN_SAMPLES = 1000


@dataclass
class MIEstimate:
    """Plug-in mutual information estimate in bits.

    ``degenerate`` is set when an input is constant, in which case ``bits``
    is 0.
    """

    bits: float
    degenerate: bool = False

    def __float__(self):
        return self.bits


def empirical_mi(samples_a, samples_b, n_bins):
    """Equal-width histogram estimate of ``I(a; b)``.

    Each variable is binned into ``n_bins`` equal-width bins spanning its
    observed range, and the mutual information of the joint histogram is
    returned.

    Parameters
    ----------
    samples_a, samples_b : array_like
        paired samples, equal length of at least 1000
    n_bins : int
        bins per variable, at least 2

    Returns
    -------
    MIEstimate

    Raises
    ------
    ParameterError
        if the sample counts differ or are too small, or ``n_bins < 2``
    """
    a = np.asarray(samples_a, dtype=np.float64).reshape(-1)
    b = np.asarray(samples_b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise error.ParameterError(
            f"sample counts differ: {a.size} != {b.size}"
        )
    if a.size < MIN_SAMPLES:
        raise error.ParameterError(
            f"at least {MIN_SAMPLES} samples required, got {a.size}"
        )
    if n_bins < 2:
        raise error.ParameterError(f"n_bins must be >= 2: {n_bins}")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return MIEstimate(0.0, degenerate=True)
    counts, _, _ = np.histogram2d(a, b, bins=n_bins)
    return MIEstimate(mutual_information(counts / counts.sum()))


def gating_mi_ratio(samples_a, samples_b, p_keep, rng, n_bins):
    """Ratio of the MI of gated to ungated samples.

    Both variables are gated with independent raw Bernoulli(p_keep) gates.
    For nonzero discrete inputs the ratio approaches ``p_keep^2`` as the
    sample count grows, provided the bins separate every support value and 0.

    Returns
    -------
    ratio : float
        ``MI_gated / MI_ungated`` (nan if the ungated MI is 0)
    ungated : MIEstimate
    gated : MIEstimate
    """
    a = np.asarray(samples_a, dtype=np.float64).reshape(-1)
    b = np.asarray(samples_b, dtype=np.float64).reshape(-1)
    ungated = empirical_mi(a, b, n_bins)
    gated = empirical_mi(a * sample_bernoulli(rng, p_keep, a.shape),
                         b * sample_bernoulli(rng, p_keep, b.shape),
                         n_bins)
    ratio = gated.bits / ungated.bits if ungated.bits > 0 else float("nan")
    return ratio, ungated, gated
