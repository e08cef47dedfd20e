"""Shannon entropy and mutual information, in bits."""
import math

from scipy.special import rel_entr
from scipy.stats import entropy as _scipy_entropy

from iclab import error
from iclab.infotheory.joint import DiscreteJoint, check_pmf


def entropy(pmf):
    """Shannon entropy ``-sum P log2 P`` of a marginal pmf, with
    ``0 log 0 = 0``.

    Raises
    ------
    DistributionError
        if ``pmf`` is not a valid pmf
    """
    pmf = check_pmf(pmf, "marginal pmf")
    return float(_scipy_entropy(pmf.reshape(-1), base=2))


def bernoulli_entropy(p):
    """Entropy in bits of a Bernoulli(p) variable."""
    if not 0 <= p <= 1:
        raise error.ParameterError(f"probability must be in [0, 1]: {p}")
    return entropy([p, 1 - p])


def mutual_information(joint):
    """Mutual information ``I(x; y)`` in bits of a joint distribution.

    Parameters
    ----------
    joint : DiscreteJoint or GatedJoint or array_like
        joint distribution, or a bare joint probability matrix

    Returns
    -------
    float
        non-negative mutual information, cells with ``P(x, y) = 0``
        contribute 0
    """
    if isinstance(joint, DiscreteJoint):
        pmf = joint.pmf
    else:
        pmf = check_pmf(joint, "joint pmf")
        if pmf.ndim != 2:
            raise error.DistributionError(
                f"joint pmf must be 2D, got shape {pmf.shape}"
            )
    px = pmf.sum(axis=1, keepdims=True)
    py = pmf.sum(axis=0, keepdims=True)
    mi = rel_entr(pmf, px * py).sum() / math.log(2)
    # rounding can leave a tiny negative value for product distributions
    return float(max(mi, 0.0))

