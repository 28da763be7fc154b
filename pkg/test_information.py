#!/usr/bin/env python3
"""
Tests for expected Fisher information and the asymptotic standard errors of
the joint and tree-by-tree estimators
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from src.errors import DomainError, SingularityError
from src.information import (
    asymptotic_se_mle,
    asymptotic_se_seq,
    empirical_moments,
    expected_moments,
    fisher_information,
    gaussian_analytic_KJ,
    inverse,
    sequential_covariance,
)
from src.evaluate import simulate
from src.vine_spec import read_spec

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")

# per-observation values for the 3-dim example with rho12=0.35, rho23=0.79, rho13|2=0.34
GAUSS_INFO = np.array([
    [1.62, -0.77, 0.15],
    [-0.77, 12.40, 0.80],
    [0.15, 0.80, 1.42],
])
LOWER = ([1, 2, 2], [0, 0, 1])
UPPER = ([0, 0, 1], [1, 2, 2])
RANDOM_TRIPLES = np.random.default_rng(7).uniform(-0.8, 0.8, size=(10, 3))


def _spec(name):
    return read_spec(os.path.join(FIXTURES, name))


@pytest.fixture(scope="module")
def gauss_moments():
    return expected_moments(_spec("gauss_3d.spec"))


def test_gaussian_information(gauss_moments):
    assert gauss_moments.method == "cubature"
    assert gauss_moments.mass == pytest.approx(1.0, abs=1e-3)
    np.testing.assert_allclose(gauss_moments.info, GAUSS_INFO, atol=0.02)
    print("✓ Gaussian information matrix")


def test_gaussian_standard_errors(gauss_moments):
    spec = _spec("gauss_3d.spec")
    se_mle = asymptotic_se_mle(spec, moments=gauss_moments)
    se_seq = asymptotic_se_seq(spec, moments=gauss_moments)
    np.testing.assert_allclose(se_mle[LOWER], [0.86, 0.29, 0.80], atol=0.02)
    np.testing.assert_allclose(se_seq[LOWER], [0.89, 0.31, 0.83], atol=0.02)
    assert np.all(np.isnan(se_mle[UPPER]))
    assert np.all(np.isnan(np.diag(se_mle)))
    print("✓ Gaussian asymptotic standard errors, both estimators")


def test_gaussian_moments_match_closed_form(gauss_moments):
    K, J = gaussian_analytic_KJ(0.35, 0.79, 0.34)
    np.testing.assert_allclose(gauss_moments.K, K, rtol=1e-3, atol=1e-3)
    np.testing.assert_allclose(gauss_moments.J, J, rtol=1e-3, atol=1e-3)
    print("✓ integrated K and J agree with the closed form")


@pytest.mark.parametrize("rho12, rho23, rho13_2", [tuple(t) for t in RANDOM_TRIPLES])
def test_closed_form_at_other_points(rho12, rho23, rho13_2):
    spec = _spec("gauss_3d.spec")
    spec = spec.with_vector(np.array([rho12, rho23, rho13_2]))
    moments = expected_moments(spec)
    K, J = gaussian_analytic_KJ(rho12, rho23, rho13_2)
    np.testing.assert_allclose(moments.K, K, rtol=1e-3, atol=1e-3)
    np.testing.assert_allclose(moments.J, J, rtol=1e-3, atol=1e-3)


def test_sequential_is_less_efficient(gauss_moments):
    V_seq = gauss_moments.seq_covariance().V
    V_mle = inverse(gauss_moments.info)
    assert np.min(np.linalg.eigvalsh(V_seq - V_mle)) > -1e-6
    print("✓ tree-by-tree covariance dominates the joint one")


def test_student_t_standard_errors():
    spec = _spec("student_3d.spec")
    moments = expected_moments(spec, monte_carlo=True, mc_size=200000, seed=11)
    assert moments.method == "monte_carlo"
    se_mle = asymptotic_se_mle(spec, moments=moments)
    se_seq = asymptotic_se_seq(spec, moments=moments)
    np.testing.assert_allclose(se_mle[LOWER], [1.04, 0.39, 0.97], atol=0.05)
    np.testing.assert_allclose(se_mle[UPPER], [12, 12, 11], atol=1.5)
    np.testing.assert_allclose(se_seq[LOWER], [1.04, 0.48, 1.15], atol=0.05)
    np.testing.assert_allclose(se_seq[UPPER], [12, 14, 12], atol=1.5)
    print("✓ Student-t standard errors for correlations and degrees of freedom")


def test_closed_form_properties():
    K, J = gaussian_analytic_KJ(0.0, 0.0, 0.0)
    np.testing.assert_allclose(K, np.eye(3))
    np.testing.assert_allclose(J, np.eye(3))

    rho12, rho23, r = 0.35, 0.79, 0.34
    K, J = gaussian_analytic_KJ(rho12, rho23, r)
    a12, a23 = 1 - rho12 ** 2, 1 - rho23 ** 2
    rho13 = r * np.sqrt(a12 * a23) + rho12 * rho23
    partial = rho13 - rho12 * rho23
    k12 = partial * (1 + 2 * rho12 * rho23 * partial / (a12 * a23))
    assert K[0, 1] == pytest.approx(k12 / (a12 * a23))
    assert K[2, 2] == pytest.approx((1 + r ** 2) / (1 - r ** 2) ** 2)
    assert J[2, 0] == pytest.approx(r * rho12 / (a12 * (1 - r ** 2)))
    assert J[0, 2] == 0.0

    # swapping the two tree-1 correlations swaps their rows and columns
    K2, J2 = gaussian_analytic_KJ(rho23, rho12, r)
    swap = [1, 0, 2]
    np.testing.assert_allclose(K2, K[np.ix_(swap, swap)])
    np.testing.assert_allclose(J2, J[np.ix_(swap, swap)])

    with pytest.raises(DomainError):
        gaussian_analytic_KJ(1.0, 0.2, 0.1)
    print("✓ closed-form K and J")


def test_bivariate_gaussian_at_zero():
    moments = expected_moments(_spec("pair_gauss_rho0.spec"))
    np.testing.assert_allclose(fisher_information(_spec("pair_gauss_rho0.spec")), moments.info)
    np.testing.assert_allclose(moments.info, [[1.0]], atol=1e-3)
    empty = expected_moments(_spec("independence_2d.spec"))
    assert empty.info.shape == (0, 0)
    assert asymptotic_se_mle(_spec("independence_2d.spec"), moments=empty).shape == (2, 2)
    print("✓ unit information for the independent normal pair")


def test_empirical_moments_approach_expected(gauss_moments):
    spec = _spec("gauss_3d.spec")
    u = simulate(spec, 20000, seed=5).values
    plug_in = empirical_moments(spec, u)
    np.testing.assert_allclose(np.diag(plug_in.info), np.diag(gauss_moments.info), rtol=0.1)
    V = sequential_covariance(spec, mode="empirical", data=u).V
    np.testing.assert_allclose(np.diag(V), np.diag(gauss_moments.seq_covariance().V), rtol=0.15)
    with pytest.raises(ValueError):
        sequential_covariance(spec, mode="bogus")
    print("✓ plug-in moments converge to the expected ones")


def test_singular_matrix_rejected():
    with pytest.raises(SingularityError):
        inverse(np.array([[1.0, 1.0], [1.0, 1.0]]))


if __name__ == "__main__":
    print("=" * 60)
    print("Testing expected information")
    print("=" * 60)
    moments = expected_moments(_spec("gauss_3d.spec"))
    test_gaussian_information(moments)
    test_gaussian_standard_errors(moments)
    test_gaussian_moments_match_closed_form(moments)
    test_sequential_is_less_efficient(moments)
    test_student_t_standard_errors()
    test_closed_form_properties()
    test_bivariate_gaussian_at_zero()
    test_empirical_moments_approach_expected(moments)
    test_singular_matrix_rejected()
