"""Tests for the information measures, exact gating oracle and estimators."""
import math

import numpy as np
import pytest

from iclab import error
from iclab.core import Rng
from iclab.infotheory import (
    DiscreteJoint, apply_gates, bernoulli_entropy, correlation_scaling_check,
    empirical_mi, entropy, gate_by_enumeration, gated_correlation,
    gated_marginal, gating_mi_ratio, mutual_information, random_joint,
    sample_joint, verify_theorem1
)

P_KEEPS = [0.05, 0.25, 0.5, 0.75, 0.95]


def direct_mi(pmf):
    px, py = pmf.sum(axis=1), pmf.sum(axis=0)
    mi = 0.0
    for i in range(pmf.shape[0]):
        for j in range(pmf.shape[1]):
            if pmf[i, j] > 0:
                mi += pmf[i, j] * math.log2(pmf[i, j] / (px[i] * py[j]))
    return mi


def test_entropy_examples():
    assert entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-15)
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy([0.25, 0.75]) == pytest.approx(0.811278, abs=1e-6)


@pytest.mark.parametrize("pmf", [[0.5, 0.6], [1.2, -0.2], [np.nan, 1.0], []])
def test_entropy_invalid_pmf(pmf):
    with pytest.raises(error.DistributionError):
        entropy(pmf)


def test_bernoulli_entropy():
    assert bernoulli_entropy(0.5) == pytest.approx(1.0)
    assert bernoulli_entropy(1.0) == 0.0


def test_mi_product_joint():
    pmf = np.outer([0.2, 0.8], [0.3, 0.3, 0.4])
    assert mutual_information(DiscreteJoint([1, 2], [1, 2, 3], pmf)) \
        == pytest.approx(0.0, abs=1e-15)


def test_mi_perfectly_correlated():
    joint = DiscreteJoint([-1, 1], [-1, 1], [[0.5, 0.0], [0.0, 0.5]])
    assert mutual_information(joint) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_mi_matches_double_loop(seed):
    joint = random_joint(Rng(seed), 3)
    assert mutual_information(joint) == pytest.approx(
        direct_mi(joint.pmf), abs=1e-12
    )


def test_joint_rejects_zero_support():
    with pytest.raises(error.PreconditionError):
        DiscreteJoint([0.0, 1.0], [1.0, 2.0], np.full((2, 2), 0.25))


def test_joint_rejects_bad_pmf():
    with pytest.raises(error.DistributionError):
        DiscreteJoint([1.0, 2.0], [1.0, 2.0], np.full((2, 2), 0.3))


def test_gates_keep_all():
    joint = random_joint(Rng(0), 3)
    gated = apply_gates(joint, 1.0)
    np.testing.assert_array_equal(gated.pmf[:3, :3], joint.pmf)
    assert gated.pmf[3, :].sum() == 0.0
    assert gated.pmf[:, 3].sum() == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_gates_nonzero_block_mass(seed):
    gated = apply_gates(random_joint(Rng(seed), 4), 0.5)
    assert gated.nonzero_block.sum() == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("p_keep", P_KEEPS)
@pytest.mark.parametrize("seed", range(4))
def test_gates_match_enumeration(p_keep, seed):
    joint = random_joint(Rng(seed), 3, 4)
    np.testing.assert_allclose(apply_gates(joint, p_keep).pmf,
                               gate_by_enumeration(joint, p_keep).pmf,
                               rtol=0, atol=1e-14)


def test_gates_reject_zero_support():
    joint = DiscreteJoint([-1.0, 1.0], [1.0, 2.0], np.full((2, 2), 0.25))
    joint.support_x = np.array([0.0, 1.0])
    with pytest.raises(error.PreconditionError):
        apply_gates(joint, 0.5)


def test_gated_marginal():
    np.testing.assert_allclose(gated_marginal([0.25, 0.75], 0.8),
                               [0.2, 0.6, 0.2])


@pytest.mark.parametrize("size", [3, 5])
@pytest.mark.parametrize("p_keep", P_KEEPS)
def test_theorem1_sweep(size, p_keep):
    for trial_rng in Rng(size).spawn(100):
        report = verify_theorem1(random_joint(trial_rng, size), p_keep)
        assert report.passed, report
        assert report.mi_residual <= 1e-10
        assert report.entropy_residual <= 1e-10
        assert report.mi_ratio == pytest.approx(p_keep**2, abs=1e-8)


def test_theorem1_independent_joint_ratio_nan():
    pmf = np.outer([0.5, 0.5], [0.25, 0.75])
    report = verify_theorem1(DiscreteJoint([1, 2], [3, 4], pmf), 0.5)
    assert math.isnan(report.mi_ratio)
    assert report.passed
    assert report.to_dict()["pass"] is True


@pytest.mark.parametrize("c", [0.0, 0.3, 0.8])
@pytest.mark.parametrize("p_keep", [0.5, 0.95])
def test_correlation_scaling(c, p_keep):
    report = correlation_scaling_check(Rng(1), p_keep, 10**6, c)
    assert report.within(3.0), report
    assert report.predicted == pytest.approx(p_keep * c)


def test_correlation_scaling_half():
    report = correlation_scaling_check(Rng(2), 0.5, 10**6, 0.8)
    assert abs(report.c_after - 0.4) <= 0.01


def test_correlation_keep_all_is_sample_correlation():
    report = correlation_scaling_check(Rng(3), 1.0, 10**5, 0.6)
    assert report.c_after == pytest.approx(report.c_before, abs=1e-12)


def test_correlation_invalid_c():
    with pytest.raises(error.ParameterError):
        correlation_scaling_check(Rng(0), 0.5, 10**5, 1.5)


@pytest.mark.parametrize("n_samples", [2, 10**4, 10**5 - 1])
def test_correlation_check_needs_samples(n_samples):
    with pytest.raises(error.UsageError):
        correlation_scaling_check(Rng(0), 0.5, n_samples)
    gated_correlation(Rng(0), 0.5, n_samples)


@pytest.mark.slow
def test_correlation_residual_shrinks_with_samples():
    scaled_residual, scaled_error = [], []
    for n, rng in zip([10**4, 10**5, 10**6], Rng(4).spawn(3)):
        reports = [gated_correlation(r, 0.5, n, 0.8) for r in rng.spawn(30)]
        scaled_residual.append(
            np.mean([r.residual for r in reports]) * np.sqrt(n)
        )
        scaled_error.append(
            np.mean([r.std_error for r in reports]) * np.sqrt(n)
        )
    # residual * sqrt(n) stays of the same size as n grows by 100x
    assert max(scaled_residual) / min(scaled_residual) < 2.0
    np.testing.assert_allclose(scaled_error, scaled_error[0], rtol=0.05)
    # mean |N(0, s^2)| is s * sqrt(2 / pi)
    for res, err in zip(scaled_residual, scaled_error):
        assert 0.5 * err < res < 1.5 * err


def test_empirical_mi_self_information():
    a = Rng(0).random(10**5)
    est = empirical_mi(a, a, 16)
    assert not est.degenerate
    assert 3.9 <= est.bits <= 4.0 + 1e-9


def test_empirical_mi_independent():
    rng = Rng(1)
    est = empirical_mi(rng.normal(0.0, 1.0, 10**5),
                       rng.normal(0.0, 1.0, 10**5), 8)
    assert est.bits <= 0.02


def test_empirical_mi_degenerate():
    est = empirical_mi(np.ones(2000), Rng(0).random(2000), 8)
    assert est.degenerate
    assert est.bits == 0.0


@pytest.mark.parametrize("kwargs", [
    {"a": np.ones(2000), "b": np.ones(1999), "n_bins": 8},
    {"a": np.ones(10), "b": np.ones(10), "n_bins": 8},
    {"a": np.arange(2000.0), "b": np.arange(2000.0), "n_bins": 1},
])
def test_empirical_mi_invalid(kwargs):
    with pytest.raises(error.ParameterError):
        empirical_mi(kwargs["a"], kwargs["b"], kwargs["n_bins"])


def test_gating_mi_ratio_trends_to_p_squared():
    joint = DiscreteJoint([-2.0, 2.0], [-2.0, 2.0],
                          [[0.45, 0.05], [0.05, 0.45]])
    rng = Rng(4)
    xs, ys = sample_joint(joint, rng, 200000)
    ratio, ungated, gated = gating_mi_ratio(xs, ys, 0.7, rng, n_bins=3)
    assert gated.bits < ungated.bits
    assert ratio == pytest.approx(0.49, abs=0.03)


def test_sample_joint_frequencies():
    joint = random_joint(Rng(5), 2)
    xs, ys = sample_joint(joint, Rng(6), 100000)
    freq = np.mean((xs == joint.support_x[0]) & (ys == joint.support_y[1]))
    assert freq == pytest.approx(joint.pmf[0, 1], abs=0.01)
