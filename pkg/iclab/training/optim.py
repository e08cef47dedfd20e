"""Optimizers and the learning-rate schedule.

Optimizers update a parameter dict (as returned by ``model.parameters()``) in
place from a gradient dict with the same keys. The learning rate is passed
to every step so one :class:`LearningRateSchedule` drives any optimizer.
"""
from dataclasses import dataclass, field

import numpy as np

from iclab import error
import iclab.training.utils as u

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8


@dataclass
class AdamState:
    """First and second moment estimates of every parameter."""

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON


def _check_shapes(params, grads):
    for k, p in params.items():
        if k not in grads:
            raise error.ShapeError(f"missing gradient for parameter '{k}'")
        if grads[k].shape != p.shape:
            raise error.ShapeError(
                f"gradient shape {grads[k].shape} does not match parameter "
                f"'{k}' shape {p.shape}"
            )


def adam_step(params, grads, state, lr):
    """One bias-corrected Adam update.

    ``m <- b1 m + (1 - b1) g``, ``v <- b2 v + (1 - b2) g^2`` and
    ``p <- p - lr m_hat / (sqrt(v_hat) + eps)`` with
    ``m_hat = m / (1 - b1^t)`` and ``v_hat = v / (1 - b2^t)``.

    Parameters
    ----------
    params : dict
        parameter arrays, updated in place
    grads : dict
        gradients keyed like ``params``
    state : AdamState
        moment estimates, updated in place
    lr : float
        step size

    Returns
    -------
    params : dict
    state : AdamState

    Raises
    ------
    ShapeError
        if a gradient is missing or its shape does not match
    """
    _check_shapes(params, grads)
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**state.t
    bias2 = 1.0 - b2**state.t
    for k, p in params.items():
        g = grads[k]
        m = state.m.setdefault(k, np.zeros_like(p))
        v = state.v.setdefault(k, np.zeros_like(p))
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / bias1) / (np.sqrt(v / bias2) + state.epsilon)
    return params, state


class Optimizer:

    def __init__(self, params):
        self.params = params

    def step(self, grads, lr):
        raise NotImplementedError


class Adam(Optimizer):

    def __init__(self,
                 params,
                 beta1=ADAM_BETA1,
                 beta2=ADAM_BETA2,
                 epsilon=ADAM_EPSILON):
        super().__init__(params)
        self.state = AdamState(beta1=beta1, beta2=beta2, epsilon=epsilon)

    def step(self, grads, lr):
        adam_step(self.params, grads, self.state, lr)


class SGD(Optimizer):
    """Stochastic gradient descent with heavy-ball momentum,
    ``v <- mu v - lr g``, ``p <- p + v``."""

    def __init__(self, params, momentum=0.9):
        super().__init__(params)
        if not 0 <= momentum < 1:
            raise error.ParameterError(
                f"momentum must be in [0, 1): {momentum}"
            )
        self.momentum = momentum
        self.velocity = {}

    def step(self, grads, lr):
        _check_shapes(self.params, grads)
        for k, p in self.params.items():
            v = self.velocity.setdefault(k, np.zeros_like(p))
            v *= self.momentum
            v -= lr * grads[k]
            p += v


def make_optimizer(name, params, momentum=0.9):
    if name == u.ADAM:
        return Adam(params)
    if name == u.SGD:
        return SGD(params, momentum)
    raise error.ConfigError(
        f"unknown optimizer '{name}', must be one of {u.OPTIMIZERS}"
    )


class LearningRateSchedule:
    """Piecewise-constant learning rate.

    The rate starts at ``base_lr`` and is divided by ``divisor`` from each
    milestone epoch on, e.g. ``base_lr=0.001`` with milestones
    ``[(80, 10), (120, 10), (160, 10)]`` gives 1e-5 at epoch 130.
    """

    def __init__(self, base_lr, milestones=()):
        if base_lr <= 0:
            raise error.ParameterError(f"base_lr must be > 0: {base_lr}")
        self.base_lr = float(base_lr)
        self.milestones = tuple((int(e), float(d)) for e, d in milestones)
        epochs = [e for e, _ in self.milestones]
        if epochs != sorted(set(epochs)):
            raise error.ParameterError(
                f"milestone epochs must be strictly increasing: {epochs}"
            )
        if any(d < 1 for _, d in self.milestones):
            raise error.ParameterError("milestone divisors must be >= 1")

    def __call__(self, epoch):
        lr = self.base_lr
        for milestone, divisor in self.milestones:
            if epoch >= milestone:
                lr /= divisor
        return lr

    def __repr__(self):
        return (f"LearningRateSchedule(base_lr={self.base_lr}, "
                f"milestones={list(self.milestones)})")
