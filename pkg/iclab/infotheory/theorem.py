"""Checks of how independent Bernoulli gating changes dependence.

For independent gates ``g ~ Bernoulli(p)`` and ``x_hat = g x``:

- mutual information decays by ``p^2``: ``I(x_hat_i; x_hat_j) = p^2 I(x_i; x_j)``
- entropy obeys ``H(x_hat) = p H(x) + eps_p``, ``eps_p`` the Bernoulli(p)
  entropy
- the correlation of standardized activations decays by ``p``:
  ``c_hat = E[g_i x_i g_j x_j] / (sigma_i sigma_j) = p c`` with
  ``sigma^2 = p``

The information identities are checked exactly on discrete joints, the
correlation identity by Monte-Carlo.
"""
from dataclasses import dataclass, asdict

import numpy as np

from iclab import error
from iclab.core.tensor import check_keep_probability, sample_bernoulli
from iclab.infotheory.gating import apply_gates
from iclab.infotheory.measures import (
    bernoulli_entropy, entropy, mutual_information
)

DEFAULT_TOLERANCE = 1e-10
MIN_CORRELATION_SAMPLES = 10**5


@dataclass
class TheoremReport:
    """Outcome of one exact gating check on a discrete joint."""

    p_keep: float
    mi_orig: float
    mi_gated: float
    mi_ratio: float
    mi_residual: float
    entropy_residual: float
    tolerance: float
    passed: bool

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def verify_theorem1(joint, p_keep, tolerance=DEFAULT_TOLERANCE):
    """Check the MI decay and entropy identities for one joint.

    The gated joint comes from :func:`apply_gates`. The MI residual is
    ``|I_gated - p^2 I_orig|`` and the entropy residual the larger of
    ``|H(x_hat) - p H(x) - eps_p|`` over both marginals.

    Parameters
    ----------
    joint : DiscreteJoint
        joint distribution with nonzero supports
    p_keep : float
        gate keep probability in (0, 1]
    tolerance : float, optional
        residual bound for passing (default=1e-10)

    Returns
    -------
    TheoremReport
        the measured quantities, ``mi_ratio`` is ``I_gated / I_orig`` (nan
        when ``I_orig`` is 0)
    """
    gated = apply_gates(joint, p_keep)
    mi_orig = mutual_information(joint)
    mi_gated = mutual_information(gated)
    mi_ratio = mi_gated / mi_orig if mi_orig > 0 else float("nan")
    mi_residual = abs(mi_gated - p_keep**2 * mi_orig)

    eps_p = bernoulli_entropy(p_keep)
    entropy_residual = max(
        abs(entropy(gated.marginal_x) - p_keep * entropy(joint.marginal_x)
            - eps_p),
        abs(entropy(gated.marginal_y) - p_keep * entropy(joint.marginal_y)
            - eps_p)
    )
    return TheoremReport(
        p_keep=float(p_keep),
        mi_orig=mi_orig,
        mi_gated=mi_gated,
        mi_ratio=mi_ratio,
        mi_residual=mi_residual,
        entropy_residual=entropy_residual,
        tolerance=tolerance,
        passed=bool(mi_residual <= tolerance
                    and entropy_residual <= tolerance)
    )


@dataclass
class CorrelationReport:
    """Outcome of one Monte-Carlo correlation scaling check.

    Attributes
    ----------
    c : float
        planted correlation
    c_before : float
        sample correlation ``mean(x_i x_j)`` of the ungated pair
    c_after : float
        gated correlation ``mean(g_i x_i g_j x_j) / p``
    predicted : float
        ``p * c``
    residual : float
        ``|c_after - predicted|``
    std_error : float
        Monte-Carlo standard error of ``c_after``
    """

    p_keep: float
    c: float
    n_samples: int
    c_before: float
    c_after: float
    predicted: float
    residual: float
    std_error: float

    def within(self, n_sigma=3.0):
        return self.residual <= n_sigma * self.std_error

    def to_dict(self):
        return asdict(self)


def correlated_pair(rng, c, n_samples):
    """Standard normal pairs with correlation ``c``."""
    if not -1 <= c <= 1:
        raise error.ParameterError(f"correlation must be in [-1, 1]: {c}")
    z1 = rng.normal(0.0, 1.0, n_samples)
    z2 = rng.normal(0.0, 1.0, n_samples)
    return z1, c * z1 + np.sqrt(1.0 - c * c) * z2


def gated_correlation(rng, p_keep, n_samples, c=0.8):
    """Monte-Carlo estimate of the correlation of a gated standardized pair.

    Samples ``(x_i, x_j)`` with correlation ``c``, applies independent raw
    gates and computes ``c_hat = E[g_i x_i g_j x_j] / (sigma_i sigma_j)``
    with ``sigma^2 = p_keep``. The residual against ``p_keep * c`` shrinks
    like ``1 / sqrt(n_samples)``.

    Returns
    -------
    CorrelationReport
    """
    check_keep_probability(p_keep)
    if n_samples < 2:
        raise error.ParameterError(f"n_samples must be >= 2: {n_samples}")
    xi, xj = correlated_pair(rng, c, n_samples)
    gi = sample_bernoulli(rng, p_keep, n_samples)
    gj = sample_bernoulli(rng, p_keep, n_samples)
    products = (gi * xi) * (gj * xj) / p_keep
    c_after = float(products.mean())
    predicted = p_keep * c
    return CorrelationReport(
        p_keep=float(p_keep),
        c=float(c),
        n_samples=int(n_samples),
        c_before=float(np.mean(xi * xj)),
        c_after=c_after,
        predicted=predicted,
        residual=abs(c_after - predicted),
        std_error=float(products.std(ddof=1) / np.sqrt(n_samples))
    )


def correlation_scaling_check(rng, p_keep, n_samples, c=0.8):
    """Check that gating scales correlation by ``p_keep``.

    Same as :func:`gated_correlation` but requires at least
    ``MIN_CORRELATION_SAMPLES`` samples.

    Raises
    ------
    UsageError
        if ``n_samples < MIN_CORRELATION_SAMPLES``
    """
    if n_samples < MIN_CORRELATION_SAMPLES:
        raise error.UsageError(
            f"correlation check needs at least {MIN_CORRELATION_SAMPLES} "
            f"samples, got {n_samples}"
        )
    return gated_correlation(rng, p_keep, n_samples, c)
