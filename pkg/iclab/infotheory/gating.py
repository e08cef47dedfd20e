"""Exact pushforward of a joint distribution under independent Bernoulli
gates ``(x, y) -> (g1 x, g2 y)``."""
import itertools

import numpy as np

from iclab import error
from iclab.core.tensor import check_keep_probability
from iclab.infotheory.joint import GatedJoint


def apply_gates(joint, p_keep):
    """Gate both variables of ``joint`` with independent Bernoulli(p_keep)
    gates.

    The nonzero-nonzero block is scaled by ``p^2``, the zero column and zero
    row hold ``p (1 - p)`` times the marginals and the ``(0, 0)`` cell holds
    ``(1 - p)^2``.

    Parameters
    ----------
    joint : DiscreteJoint
        joint distribution with nonzero supports
    p_keep : float
        gate keep probability in (0, 1]

    Returns
    -------
    GatedJoint
        distribution of ``(g1 x, g2 y)``, supports extended with 0 (last)

    Raises
    ------
    PreconditionError
        if a support of ``joint`` contains 0
    """
    check_keep_probability(p_keep)
    _check_nonzero_supports(joint)
    p, q = p_keep, 1.0 - p_keep
    nx, ny = joint.shape
    gated = np.empty((nx + 1, ny + 1), dtype=np.float64)
    gated[:nx, :ny] = p * p * joint.pmf
    gated[:nx, ny] = p * q * joint.marginal_x
    gated[nx, :ny] = p * q * joint.marginal_y
    gated[nx, ny] = q * q
    return GatedJoint(np.append(joint.support_x, 0.0),
                      np.append(joint.support_y, 0.0),
                      gated)


def gate_by_enumeration(joint, p_keep):
    """Reference implementation of :func:`apply_gates`.

    Enumerates every ``(x, y, g1, g2)`` outcome and accumulates its
    probability on the cell ``(g1 x, g2 y)``.
    """
    check_keep_probability(p_keep)
    _check_nonzero_supports(joint)
    xs = list(joint.support_x) + [0.0]
    ys = list(joint.support_y) + [0.0]
    gated = np.zeros((len(xs), len(ys)), dtype=np.float64)
    gate_prob = {0: 1.0 - p_keep, 1: p_keep}
    for (i, a), (j, b) in itertools.product(enumerate(joint.support_x),
                                            enumerate(joint.support_y)):
        for g1, g2 in itertools.product((0, 1), repeat=2):
            prob = joint.pmf[i, j] * gate_prob[g1] * gate_prob[g2]
            gated[xs.index(g1 * a), ys.index(g2 * b)] += prob
    return GatedJoint(xs, ys, gated)


def _check_nonzero_supports(joint):
    if np.any(joint.support_x == 0) or np.any(joint.support_y == 0):
        raise error.PreconditionError(
            "gating requires supports without 0, got "
            f"{joint.support_x.tolist()} and {joint.support_y.tolist()}"
        )


def gated_marginal(pmf, p_keep):
    """Distribution of ``g x`` for a marginal pmf, 0 appended last."""
    check_keep_probability(p_keep)
    return np.append(p_keep * np.asarray(pmf, dtype=np.float64), 1.0 - p_keep)

