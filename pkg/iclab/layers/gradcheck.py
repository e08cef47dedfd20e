"""Finite-difference gradient checks.

Checks compare the analytic backward pass of a layer or container against
central differences ``(f(x + h) - f(x - h)) / 2h`` of a scalar loss. Run them
in float64. Dropout gates are frozen for the duration of a check so the
forward map is deterministic, BatchNorm runs in training mode with its full
batch coupling.
"""
from contextlib import contextmanager

import numpy as np

from iclab.layers.dropout import Dropout
from iclab.layers.ic import IC

DEFAULT_STEP = 1e-5
# gradients smaller than this are compared on an absolute scale
GRAD_FLOOR = 1e-6


def relative_error(analytic, numeric, floor=GRAD_FLOOR):
    """Largest elementwise ``|a - n| / max(|a|, |n|, floor)``."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.size == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


def numerical_gradient(loss_fn, x, h=DEFAULT_STEP, indices=None):
    """Central-difference gradient of ``loss_fn()`` with respect to ``x``.

    ``x`` is perturbed in place and restored afterwards.

    Parameters
    ----------
    loss_fn : callable
        zero-argument function returning a scalar loss that reads ``x``
    x : ndarray
        array to differentiate with respect to
    h : float, optional
        finite-difference step (default=1e-5)
    indices : sequence of int, optional
        flat indices to check, all entries if None (default=None)

    Returns
    -------
    ndarray
        numeric gradient at ``indices`` (flat), or full gradient if
        ``indices`` is None
    """
    flat = x.reshape(-1)
    if indices is None:
        idxs = range(flat.size)
    else:
        idxs = indices
    grad = np.zeros(len(idxs), dtype=np.float64)
    for k, i in enumerate(idxs):
        orig = flat[i]
        flat[i] = orig + h
        loss_plus = loss_fn()
        flat[i] = orig - h
        loss_minus = loss_fn()
        flat[i] = orig
        grad[k] = (loss_plus - loss_minus) / (2 * h)
    if indices is None:
        return grad.reshape(x.shape)
    return grad


def iter_dropouts(model):
    for _, layer in model.named_layers():
        if isinstance(layer, Dropout):
            yield layer
        elif isinstance(layer, IC):
            yield layer.dropout


@contextmanager
def frozen_dropout(model):
    """Reuse the current dropout gates of every layer in ``model``."""
    dropouts = list(iter_dropouts(model))
    for d in dropouts:
        d.freeze_mask = True
    try:
        yield model
    finally:
        for d in dropouts:
            d.freeze_mask = False


def check_gradients(model,
                    x,
                    loss_fn,
                    rng=None,
                    h=DEFAULT_STEP,
                    max_coords=None):
    """Compare analytic and numeric gradients of a layer or container.

    Parameters
    ----------
    model : Layer
        layer or container to check
    x : ndarray
        float64 input batch
    loss_fn : callable
        maps the model output to ``(loss, grad_output)``
    rng : Rng, optional
        used to subsample coordinates when ``max_coords`` is set
    h : float, optional
        finite-difference step (default=1e-5)
    max_coords : int, optional
        check at most this many randomly chosen entries per tensor, all
        entries if None (default=None)

    Returns
    -------
    dict
        maximum relative error for ``"input"`` and every parameter name
    """
    x = np.array(x, dtype=np.float64)
    errors = {}
    with frozen_dropout(model):
        # first forward samples the gates that stay frozen
        out = model.forward(x, training=True)
        _, grad_out = loss_fn(out)
        grad_x, grads = model.backward(grad_out)

        def loss():
            return loss_fn(model.forward(x, training=True))[0]

        targets = [("input", x, grad_x)]
        for name, param in model.parameters().items():
            targets.append((name, param, grads[name]))

        for name, array, analytic in targets:
            indices = None
            if max_coords is not None and array.size > max_coords:
                indices = rng.permutation(array.size)[:max_coords]
            numeric = numerical_gradient(loss, array, h, indices)
            if indices is not None:
                analytic = analytic.reshape(-1)[indices]
            errors[name] = relative_error(analytic, numeric)
    return errors


def projection_loss(weights):
    """Loss ``sum(out * weights)``, whose output gradient is ``weights``."""
    def loss_fn(out):
        return float(np.sum(out * weights)), weights
    return loss_fn
