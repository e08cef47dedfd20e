"""Seeded random number generation for iclab.

All randomness in iclab (dropout gates, weight initialization, data
shuffling, augmentation, synthetic data) flows through :class:`Rng`.

Generator
---------
:class:`Rng` wraps a :class:`numpy.random.Generator` driven by the
``Philox4x64-10`` counter-based bit generator (``numpy.random.Philox``).
Philox output depends only on its key and counter, so the same seed gives the
same stream on every platform and numpy version that ships Philox. The
platform default generator is never used.

Child generators are derived with :meth:`Rng.spawn`, which uses
``numpy.random.SeedSequence`` spawning. Children are a pure function of the
parent seed and the spawn order.
"""
import numpy as np

from iclab import error

MAX_SEED = 2**64 - 1


class Rng:
    """A single-owner, seeded random number generator.

    An instance must not be shared between threads, give each thread its own
    child via :meth:`spawn`.

    Parameters
    ----------
    seed : int
        non-negative 64-bit seed
    """

    def __init__(self, seed=0, seed_seq=None):
        if seed_seq is None:
            if not isinstance(seed, (int, np.integer)) \
               or not 0 <= int(seed) <= MAX_SEED:
                raise error.ParameterError(
                    f"Rng seed must be an int in [0, 2**64): {seed} is invalid"
                )
            seed_seq = np.random.SeedSequence(int(seed))
        self.seed = int(seed)
        self._seed_seq = seed_seq
        self.generator = np.random.Generator(np.random.Philox(seed_seq))

    def spawn(self, n=1):
        """Derive ``n`` independent child generators.

        Returns
        -------
        list[Rng]
            children, deterministic in the parent seed and spawn order
        """
        return [
            Rng(self.seed, seed_seq=child)
            for child in self._seed_seq.spawn(n)
        ]

    def child(self):
        return self.spawn(1)[0]

    def random(self, shape=None, dtype=np.float64):
        return self.generator.random(shape, dtype=dtype)

    def normal(self, loc=0.0, scale=1.0, shape=None):
        return self.generator.normal(loc, scale, shape)

    def integers(self, low, high=None, shape=None):
        return self.generator.integers(low, high, shape)

    def permutation(self, n):
        return self.generator.permutation(n)

    def dirichlet(self, alpha, shape=None):
        return self.generator.dirichlet(alpha, shape)

    def __repr__(self):
        return f"Rng(seed={self.seed})"
