"""Finite joint distributions over pairs of real values."""
import numpy as np

from iclab import error

# tolerance on total probability mass
MASS_TOL = 1e-12


def check_pmf(pmf, what="pmf"):
    """Raise DistributionError unless ``pmf`` is non-negative, finite and
    sums to 1."""
    pmf = np.asarray(pmf, dtype=np.float64)
    if pmf.size == 0:
        raise error.DistributionError(f"{what} is empty")
    if not np.all(np.isfinite(pmf)):
        raise error.DistributionError(f"{what} contains non-finite values")
    if np.any(pmf < 0):
        raise error.DistributionError(f"{what} has negative probabilities")
    total = pmf.sum()
    if abs(total - 1.0) > MASS_TOL:
        raise error.DistributionError(
            f"{what} must sum to 1 (within {MASS_TOL}), sums to {total!r}"
        )
    return pmf


class DiscreteJoint:
    """Exact joint pmf ``P(x = a, y = b)`` over finite nonzero supports.

    Parameters
    ----------
    support_x : sequence of float
        distinct nonzero values of x
    support_y : sequence of float
        distinct nonzero values of y
    pmf : array_like
        ``len(support_x) x len(support_y)`` probability matrix

    Raises
    ------
    DistributionError
        if ``pmf`` is not a valid probability matrix
    PreconditionError
        if a support contains 0 or duplicates
    """

    allow_zero = False

    def __init__(self, support_x, support_y, pmf):
        self.support_x = self._check_support(support_x, "support_x")
        self.support_y = self._check_support(support_y, "support_y")
        pmf = check_pmf(pmf, "joint pmf")
        expected = (len(self.support_x), len(self.support_y))
        if pmf.shape != expected:
            raise error.DistributionError(
                f"joint pmf shape {pmf.shape} != supports {expected}"
            )
        self.pmf = pmf

    def _check_support(self, support, name):
        support = np.asarray(support, dtype=np.float64).reshape(-1)
        if len(support) == 0:
            raise error.PreconditionError(f"{name} is empty")
        if len(np.unique(support)) != len(support):
            raise error.PreconditionError(f"{name} has duplicate values")
        if not self.allow_zero and np.any(support == 0):
            raise error.PreconditionError(
                f"{name} contains 0, zero-valued activations must have "
                "negligible probability"
            )
        return support

    @property
    def marginal_x(self):
        return self.pmf.sum(axis=1)

    @property
    def marginal_y(self):
        return self.pmf.sum(axis=0)

    @property
    def shape(self):
        return self.pmf.shape

    def __repr__(self):
        return (f"{type(self).__name__}(support_x={self.support_x.tolist()}, "
                f"support_y={self.support_y.tolist()})")


class GatedJoint(DiscreteJoint):
    """Joint pmf of gated variables ``(g1 x, g2 y)``.

    The supports are the original supports with 0 appended as the last value.
    """

    allow_zero = True

    @property
    def nonzero_block(self):
        return self.pmf[:-1, :-1]


def random_joint(rng, nx, ny=None, concentration=1.0):
    """Random DiscreteJoint with distinct nonzero supports.

    Supports are sampled from ``±[0.5, 5]`` and the pmf from a flat Dirichlet.
    """
    ny = nx if ny is None else ny

    def support(n):
        mags = 0.5 + 4.5 * rng.random(n)
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        values = np.unique(signs * mags)
        # a collision is a measure-zero event, redraw to be safe
        return values if len(values) == n else support(n)

    pmf = rng.dirichlet(np.full(nx * ny, concentration)).reshape(nx, ny)
    pmf = pmf / pmf.sum()
    return DiscreteJoint(support(nx), support(ny), pmf)


def sample_joint(joint, rng, n_samples):
    """Draw ``n_samples`` pairs from a DiscreteJoint or GatedJoint.

    Returns
    -------
    xs, ys : ndarray
        sampled values, each of length ``n_samples``
    """
    flat = joint.pmf.reshape(-1)
    cdf = np.cumsum(flat)
    cells = np.searchsorted(cdf, rng.random(n_samples) * cdf[-1], side="right")
    cells = np.minimum(cells, flat.size - 1)
    ix, iy = np.unravel_index(cells, joint.pmf.shape)
    return joint.support_x[ix], joint.support_y[iy]
