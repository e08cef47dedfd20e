"""Tests for the conditioning race and the sign-coherence diagnostics."""
import math

import numpy as np
import pytest

from iclab import error
from iclab.core import Rng
from iclab.convergence import (
    IC_FED, RELU_FED, coherence_probability, expected_coherence,
    gradient_descent, hessian_condition, jacobi_eigenvalues, linreg_gd_race,
    planted_design, random_probe_net, head_sign_coherence, sign_coherence,
    zigzag_trials
)


@pytest.mark.parametrize("seed", range(3))
def test_jacobi_matches_numpy(seed):
    A = Rng(seed).normal(0.0, 1.0, (6, 6))
    S = A @ A.T
    np.testing.assert_allclose(jacobi_eigenvalues(S),
                               np.linalg.eigvalsh(S), rtol=1e-9, atol=1e-9)


def test_jacobi_rejects_non_symmetric():
    with pytest.raises(error.PreconditionError):
        jacobi_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_jacobi_rejects_non_square():
    with pytest.raises(error.ShapeError):
        jacobi_eigenvalues(np.ones((2, 3)))


def test_condition_whitened():
    X = planted_design(Rng(0), 32, np.ones(8))
    np.testing.assert_allclose(X.T @ X, 32 * np.eye(8), atol=1e-10)
    assert hessian_condition(X) == pytest.approx(1.0, abs=1e-8)


def test_condition_planted():
    X = planted_design(Rng(1), 20, [100.0, 1.0])
    assert hessian_condition(X) == pytest.approx(100.0, abs=1e-6)


def test_condition_rank_deficient():
    X = Rng(2).normal(0.0, 1.0, (10, 3))
    X = np.column_stack([X, X[:, 0]])
    assert math.isinf(hessian_condition(X))


@pytest.mark.parametrize("c", [1e-3, 0.5, -2.0, 7.0, 1e3])
def test_condition_scale_invariant(c):
    X = planted_design(Rng(7), 24, np.geomspace(1.0, 50.0, 6))
    assert hessian_condition(c * X) == \
        pytest.approx(hessian_condition(X), rel=1e-9)


@pytest.mark.parametrize("shape", [(3, 4), (100, 65)])
def test_condition_invalid_shapes(shape):
    with pytest.raises((error.ShapeError, error.ParameterError)):
        hessian_condition(np.ones(shape))


def test_race_equal_conditioning():
    race = linreg_gd_race(Rng(3), 8, 1.0, 1e-8)
    assert abs(race.whitened.iterations_to_tol
               - race.correlated.iterations_to_tol) <= 1


def test_race_ill_conditioned():
    race = linreg_gd_race(Rng(4), 8, 100.0, 1e-8)
    w, c = race.whitened, race.correlated
    assert w.converged and c.converged
    assert w.iterations_to_tol < c.iterations_to_tol
    assert race.iteration_ratio >= 10
    assert w.kappa == pytest.approx(1.0, abs=1e-8)
    assert c.kappa == pytest.approx(100.0, rel=1e-8)
    assert len(c.loss_history) == c.iterations_to_tol + 1
    assert "loss_history" not in c.to_dict()


def test_race_rate_bound():
    # the loss contracts at least as fast as (1 - 1/kappa)^2 per step
    race = linreg_gd_race(Rng(5), 8, 100.0, 1e-8)
    c = race.correlated
    bound = math.log(c.loss_history[0] / 1e-8) \
        / -math.log((1 - 1 / c.kappa)**2)
    assert c.iterations_to_tol <= math.ceil(bound) + 1


def test_whitened_iterations_monotone_in_step():
    iterations = []
    for scale in [0.1, 0.25, 0.5, 0.75, 0.9, 1.0]:
        race = linreg_gd_race(Rng(8), 6, 10.0, 1e-8, lr_rule=scale)
        assert race.whitened.converged
        iterations.append(race.whitened.iterations_to_tol)
    assert iterations == sorted(iterations, reverse=True)
    assert iterations[0] > iterations[-1]
    # whitened inputs with step 1 / lambda_max land on the solution at once
    assert iterations[-1] == 1


def test_race_exact_start():
    race = linreg_gd_race(Rng(6), 4, 10.0, 1e-8, exact_start=True)
    assert race.whitened.iterations_to_tol == 0
    assert race.correlated.iterations_to_tol == 0


def test_gradient_descent_diverges():
    X = planted_design(Rng(7), 16, np.geomspace(1.0, 10.0, 4))
    Y = X @ np.ones((4, 1))
    with pytest.raises(error.DivergenceError, match="lr_rule=3.0"):
        gradient_descent(X, Y, 1e-8, lr_rule=3.0)


@pytest.mark.parametrize("kwargs", [
    {"d": 0}, {"d": 65}, {"kappa_target": 0.5}
])
def test_race_invalid_parameters(kwargs):
    args = {"d": 8, "kappa_target": 10.0}
    args.update(kwargs)
    with pytest.raises(error.ParameterError):
        linreg_gd_race(Rng(0), args["d"], args["kappa_target"], 1e-8)


def test_sign_coherence_counts():
    G = np.array([[1.0, 2.0, 0.0],
                  [-1.0, -3.0, -2.0],
                  [1.0, -1.0, 0.5],
                  [0.0, 0.0, 0.0]])
    report = sign_coherence(G)
    assert report.n_rows_measured == 3
    assert (report.n_positive, report.n_negative, report.n_mixed) == (1, 1, 1)
    assert report.coherent_fraction == pytest.approx(2 / 3)


def test_sign_coherence_all_zero():
    report = sign_coherence(np.zeros((3, 4)))
    assert report.empty
    assert math.isnan(report.coherent_fraction)


def test_sign_coherence_single_column():
    G = Rng(0).normal(0.0, 1.0, (50, 1))
    assert sign_coherence(G).coherent_fraction == 1.0


def test_sign_coherence_relu_inputs():
    rng = Rng(1)
    x = np.maximum(rng.normal(0.0, 1.0, 16), 0)
    delta = rng.normal(0.0, 1.0, 10)
    assert sign_coherence(np.outer(delta, x)).coherent_fraction == 1.0


def test_expected_coherence():
    assert expected_coherence(1) == 1.0
    assert expected_coherence(4) == 0.125


@pytest.mark.parametrize("n", [1, 2, 4, 8])
def test_coherence_probability(n):
    report = coherence_probability(Rng(n), n, 10000)
    assert report.expected == expected_coherence(n)
    assert report.within(3.0), report


def test_relu_fed_head_is_coherent():
    report = zigzag_trials(Rng(2), RELU_FED, width=8, n_nets=100)
    assert report.min_coherence == 1.0
    assert report.mean_coherence == 1.0


@pytest.mark.parametrize("width", [4, 8])
def test_ic_fed_head_is_mixed(width):
    report = zigzag_trials(Rng(3), IC_FED, width=width, n_nets=100)
    assert report.mean_coherence < 0.5


def test_probe_net_layout():
    net = random_probe_net(Rng(4), 6, 5, 3, IC_FED)
    assert [layer.name for layer in net.layers] == \
        ["hidden", "relu", "ic", "head"]
    x = Rng(5).normal(0.0, 1.0, (8, 6))
    report = head_sign_coherence(net, net[-1], x, np.arange(8) % 3)
    assert report.n_rows_measured > 0


def test_probe_net_invalid_feed():
    with pytest.raises(error.ParameterError):
        random_probe_net(Rng(0), 4, 4, 2, "tanh")


def test_zigzag_small_batch():
    with pytest.raises(error.ParameterError):
        zigzag_trials(Rng(0), IC_FED, batch_size=1)
