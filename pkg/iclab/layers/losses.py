import numpy as np
from scipy.special import log_softmax

from iclab import error


def softmax_cross_entropy(logits, labels):
    """Mean softmax cross-entropy and its gradient.

    Parameters
    ----------
    logits : ndarray
        ``N x K`` unnormalized class scores
    labels : ndarray
        ``N`` integer class ids in ``[0, K)``

    Returns
    -------
    loss : float
        mean negative log-likelihood
    grad : ndarray
        gradient of the mean loss with respect to ``logits``
    """
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise error.ShapeError(
            f"expected N x K logits and N labels, got {logits.shape} and "
            f"{labels.shape}"
        )
    n = logits.shape[0]
    log_probs = log_softmax(logits, axis=1)
    rows = np.arange(n)
    loss = -float(np.mean(log_probs[rows, labels]))
    grad = np.exp(log_probs)
    grad[rows, labels] -= 1
    return loss, (grad / n).astype(logits.dtype, copy=False)


def accuracy(logits, labels):
    return float(np.mean(np.argmax(logits, axis=1) == labels))
