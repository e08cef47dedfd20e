"""Sign coherence of per-sample weight gradients.

The weight gradient of output neuron ``j`` for one sample is
``delta_j x^T``. When ``x`` is a ReLU output every entry is non-negative, so
all incoming weights of a neuron move in the same direction and descent has
to zigzag. Zero-mean inputs (as produced by an IC layer) break this: for
``n`` independent sign-symmetric coordinates a row is coherent with
probability ``2 (1/2)^n``.
"""
from dataclasses import dataclass, asdict

import numpy as np

from iclab import error
from iclab.layers import (
    Dense, ReLU, IC, Sequential, DropoutSpec, softmax_cross_entropy
)

RELU_FED = "relu"
IC_FED = "ic"
FEEDS = (RELU_FED, IC_FED)

MIN_TRIALS = 1


@dataclass
class SignCoherenceReport:
    """Row-wise sign classification of a gradient matrix.

    Attributes
    ----------
    coherent_fraction : float
        (all-positive + all-negative rows) / rows with nonzero entries,
        nan when ``empty``
    n_rows_measured : int
        rows with at least one nonzero entry
    empty : bool
        set when every entry is zero
    """

    coherent_fraction: float
    n_rows_measured: int
    n_positive: int = 0
    n_negative: int = 0
    n_mixed: int = 0
    empty: bool = False

    def to_dict(self):
        return asdict(self)


def sign_coherence(per_sample_grads):
    """Classify each gradient row as all-positive, all-negative or mixed.

    Zero entries are ignored, rows without nonzero entries are not counted.

    Parameters
    ----------
    per_sample_grads : ndarray
        ``m x n`` gradient of one sample, or ``N x m x n`` for a batch, in
        which case rows of all samples are pooled

    Returns
    -------
    SignCoherenceReport
    """
    G = np.asarray(per_sample_grads)
    if G.ndim not in (2, 3):
        raise error.ShapeError(
            f"expected an m x n or N x m x n gradient, got {G.shape}"
        )
    G = G.reshape(-1, G.shape[-1])
    pos = (G > 0).any(axis=1)
    neg = (G < 0).any(axis=1)
    measured = int(np.count_nonzero(pos | neg))
    n_positive = int(np.count_nonzero(pos & ~neg))
    n_negative = int(np.count_nonzero(neg & ~pos))
    n_mixed = int(np.count_nonzero(pos & neg))
    if measured == 0:
        return SignCoherenceReport(float("nan"), 0, empty=True)
    return SignCoherenceReport(
        coherent_fraction=(n_positive + n_negative) / measured,
        n_rows_measured=measured,
        n_positive=n_positive,
        n_negative=n_negative,
        n_mixed=n_mixed
    )


def expected_coherence(n):
    """Probability that ``n`` independent sign-symmetric entries share a
    sign."""
    return 2.0 * 0.5**n


@dataclass
class CoherenceProbabilityReport:
    n: int
    trials: int
    measured: float
    expected: float
    std_error: float
    residual: float

    def within(self, n_sigma=3.0):
        return self.residual <= n_sigma * self.std_error

    def to_dict(self):
        return asdict(self)


def coherence_probability(rng, n, trials=10000):
    """Monte-Carlo estimate of the per-row coherence probability.

    Each trial feeds one standard normal input of width ``n`` through a
    single-output dense layer and takes the per-sample weight gradient for a
    standard normal upstream gradient.

    Returns
    -------
    CoherenceProbabilityReport
        measured fraction against ``2 (1/2)^n`` with its binomial standard
        error
    """
    if n < 1:
        raise error.ParameterError(f"n must be >= 1: {n}")
    if trials < MIN_TRIALS:
        raise error.ParameterError(f"trials must be >= {MIN_TRIALS}")
    layer = Dense(n, 1, rng, name="probe")
    x = rng.normal(0.0, 1.0, (trials, n))
    layer.forward(x, training=True)
    delta = rng.normal(0.0, 1.0, (trials, 1))
    report = sign_coherence(layer.per_sample_grads(delta))
    expected = expected_coherence(n)
    return CoherenceProbabilityReport(
        n=n,
        trials=trials,
        measured=report.coherent_fraction,
        expected=expected,
        std_error=float(np.sqrt(expected * (1 - expected) / trials)),
        residual=abs(report.coherent_fraction - expected)
    )


def random_probe_net(rng, n_inputs, width, n_classes, feed, p_keep=0.9):
    """``Dense -> ReLU [-> IC] -> Dense`` with the head named ``head``."""
    if feed not in FEEDS:
        raise error.ParameterError(f"feed must be one of {FEEDS}: {feed!r}")
    layers = [Dense(n_inputs, width, rng, name="hidden"), ReLU(name="relu")]
    if feed == IC_FED:
        layers.append(IC(width, DropoutSpec(p_keep), rng, name="ic"))
    layers.append(Dense(width, n_classes, rng, name="head"))
    return Sequential(layers, name=f"{feed}_probe")


def head_sign_coherence(model, head, x, labels):
    """Sign coherence of the per-sample weight gradients of ``head``.

    ``head`` must be the last layer of ``model``, so its upstream gradient is
    the cross-entropy gradient of the logits.
    """
    logits = model.forward(x, training=True)
    _, grad = softmax_cross_entropy(logits, labels)
    return sign_coherence(head.per_sample_grads(grad))


@dataclass
class ZigzagReport:
    feed: str
    width: int
    n_nets: int
    mean_coherence: float
    min_coherence: float
    max_coherence: float
    n_rows_measured: int

    def to_dict(self):
        return asdict(self)


def zigzag_trials(rng,
                  feed,
                  width=8,
                  n_nets=100,
                  batch_size=32,
                  n_inputs=16,
                  n_classes=10,
                  p_keep=0.9):
    """Measure head sign coherence over freshly initialized random nets.

    Every net gets its own random inputs and labels.

    Parameters
    ----------
    rng : Rng
        random number generator, one child is spawned per net
    feed : str
        ``"relu"`` or ``"ic"``, what feeds the head
    width : int, optional
        number of head input columns (default=8)
    n_nets : int, optional
        number of random nets (default=100)
    batch_size : int, optional
        samples per net, at least 2 for the IC batch statistics (default=32)

    Returns
    -------
    ZigzagReport
    """
    if n_nets < 1:
        raise error.ParameterError(f"n_nets must be >= 1: {n_nets}")
    if batch_size < 2:
        raise error.ParameterError(f"batch_size must be >= 2: {batch_size}")
    fractions = []
    rows = 0
    for net_rng in rng.spawn(n_nets):
        model = random_probe_net(
            net_rng, n_inputs, width, n_classes, feed, p_keep
        )
        x = net_rng.normal(0.0, 1.0, (batch_size, n_inputs))
        labels = net_rng.integers(0, n_classes, batch_size)
        report = head_sign_coherence(model, model[-1], x, labels)
        if report.empty:
            continue
        fractions.append(report.coherent_fraction)
        rows += report.n_rows_measured
    if not fractions:
        raise error.PreconditionError(
            f"no nonzero head gradients over {n_nets} {feed}-fed nets"
        )
    return ZigzagReport(feed=feed,
                        width=width,
                        n_nets=n_nets,
                        mean_coherence=float(np.mean(fractions)),
                        min_coherence=float(np.min(fractions)),
                        max_coherence=float(np.max(fractions)),
                        n_rows_measured=rows)
