#!/usr/bin/env python3
"""
Tests for R-vine log-likelihood evaluation and simulation
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from scipy.stats import kendalltau, kstest, multivariate_normal, norm

from src.bicop import FamilyTag, par_to_tau
from src.errors import EvalError, StructureError
from src.evaluate import aic, bic, evaluate, loglik_dataset, loglik_obs, loglik_rows, loglik_trees, simulate
from src.structure import RVineMatrix, random_structure
from src.vine_spec import RVineSpec, read_spec

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def _spec(name):
    return read_spec(os.path.join(FIXTURES, name))


def _gaussian_correlation(rho12, rho23, rho13_2):
    rho13 = rho13_2 * np.sqrt((1 - rho12 ** 2) * (1 - rho23 ** 2)) + rho12 * rho23
    return np.array([[1, rho12, rho13], [rho12, 1, rho23], [rho13, rho23, 1]])


def test_gaussian_vine_is_multivariate_normal():
    spec = _spec("gauss_3d.spec")
    rng = np.random.default_rng(42)
    u = rng.uniform(size=(1000, 3))
    x = norm.ppf(u)
    cov = _gaussian_correlation(0.35, 0.79, 0.34)
    expected = multivariate_normal(mean=np.zeros(3), cov=cov).logpdf(x) - norm.logpdf(x).sum(axis=1)
    np.testing.assert_allclose(loglik_rows(spec, u), expected, rtol=0, atol=1e-8)
    print("✓ Gaussian vine equals the trivariate normal copula")


def test_independence_loglik_is_zero():
    spec = _spec("independence_2d.spec")
    u = np.random.default_rng(0).uniform(size=(20, 2))
    assert loglik_dataset(spec, u) == 0.0
    print("✓ independence spec has zero log-likelihood")


def test_tree_decomposition_and_criteria():
    spec = _spec("mixed_4d.spec")
    u = simulate(spec, 300, seed=7).values
    total = loglik_dataset(spec, u)
    trees = loglik_trees(spec, u)
    assert len(trees) == 3
    assert np.sum(trees) == pytest.approx(total, rel=1e-12)
    value, ws = loglik_obs(spec, u[0])
    assert value == pytest.approx(loglik_rows(spec, u[:1])[0])
    assert ws.n == 1
    assert aic(total, spec.n_par) == pytest.approx(-2 * total + 2 * 7)
    assert bic(total, spec.n_par, 300) == pytest.approx(-2 * total + np.log(300) * 7)
    print("✓ per-tree log-likelihoods add up")


def test_workspace_arguments():
    spec = _spec("gauss_3d.spec")
    u = np.array([[0.2, 0.7, 0.4]])
    ws = evaluate(spec, u)
    # tree 1 pairs see the raw variables
    z1, z2 = ws.args[(3, 2)]
    np.testing.assert_allclose([z1[0], z2[0]], [0.7, 0.2])
    z1, z2 = ws.args[(3, 1)]
    np.testing.assert_allclose([z1[0], z2[0]], [0.4, 0.7])
    # tree 2 sees F(u3|u2) and F(u1|u2)
    z1, z2 = ws.args[(2, 1)]
    np.testing.assert_allclose(z1, spec.bicop(3, 1).h(0.4, 0.7))
    np.testing.assert_allclose(z2, spec.bicop(3, 2).v(0.7, 0.2))
    print("✓ h-recursion feeds the second tree")


def test_evaluate_rejects_bad_input():
    spec = _spec("gauss_3d.spec")
    with pytest.raises(EvalError):
        evaluate(spec, np.full((2, 4), 0.5))
    rvm = RVineMatrix([[1, 0, 0], [3, 2, 0], [2, 3, 3]])
    with pytest.raises(StructureError):
        evaluate(RVineSpec(rvm), np.full((2, 3), 0.5))
    print("✓ dimension mismatch and non-normalized structures rejected")


def test_simulation_is_reproducible():
    spec = _spec("mixed_4d.spec")
    a = simulate(spec, 100, seed=3).values
    b = simulate(spec, 100, seed=3).values
    np.testing.assert_array_equal(a, b)
    assert np.all((a > 0) & (a < 1))
    print("✓ fixed seed gives identical samples")


def test_simulated_gaussian_correlations():
    spec = _spec("gauss_3d.spec")
    u = simulate(spec, 20000, seed=1).values
    corr = np.corrcoef(norm.ppf(u), rowvar=False)
    np.testing.assert_allclose(corr, _gaussian_correlation(0.35, 0.79, 0.34), atol=0.03)
    print("✓ simulated normal scores have the vine's correlation matrix")


def test_simulated_tree1_kendall_tau():
    spec = _spec("mixed_4d.spec")
    u = simulate(spec, 5000, seed=2).values
    for k, i in spec.tree_positions(1):
        a, b = spec.edge(k, i).conditioned
        tau, _ = kendalltau(u[:, a - 1], u[:, b - 1])
        assert abs(tau - par_to_tau(spec.family(k, i), spec.par(k, i))) < 0.04
    print("✓ tree-1 pairs of simulated data match Kendall's tau")



PAIR_CYCLE = [("1", (0.5,)), ("3", (-4.0,)), ("4r", (1.6,)), ("5", (1.4,)), ("2", (0.3, 6.0)), ("4", (2.0,))]


def _recursive_loglik(spec, u):
    """Vine density from conditional distributions looked up by edge, no matrix workspaces"""
    edges = {e.complete_set: e for tree in spec.trees for e in tree}
    cache = {}

    def conditional(x, given):
        if (x, given) not in cache:
            if not given:
                cache[(x, given)] = u[:, x - 1]
            else:
                e = edges[given | {x}]
                a, b = e.conditioned
                z1, z2 = conditional(a, e.conditioning), conditional(b, e.conditioning)
                cop = spec.bicop(*e.position)
                cache[(x, given)] = cop.h(z1, z2) if x == a else cop.v(z1, z2)
        return cache[(x, given)]

    total = np.zeros(u.shape[0])
    for tree in spec.trees:
        for e in tree:
            a, b = e.conditioned
            total += spec.bicop(*e.position).log_pdf(conditional(a, e.conditioning), conditional(b, e.conditioning))
    return total


def test_matrix_recursion_matches_edge_recursion():
    rng = np.random.default_rng(77)
    rvm = random_structure(5, rng)
    families, params = {}, {}
    for j, pos in enumerate(rvm.positions()):
        token, par = PAIR_CYCLE[j % len(PAIR_CYCLE)]
        families[pos] = FamilyTag.parse(token)
        params[pos] = par
    spec = RVineSpec(rvm, families, params)
    u = simulate(spec, 500, seed=78).values
    np.testing.assert_allclose(loglik_rows(spec, u), _recursive_loglik(spec, u), rtol=1e-10, atol=1e-10)
    print("✓ matrix recursion equals the edge-by-edge density")


def test_empty_dataset_has_zero_loglik():
    spec = _spec("mixed_4d.spec")
    empty = np.empty((0, 4))
    assert loglik_dataset(spec, empty) == 0.0
    assert loglik_rows(spec, empty).shape == (0,)
    print("✓ no observations, zero log-likelihood")


def test_simulated_margins_are_uniform():
    spec = _spec("mixed_4d.spec")
    u = simulate(spec, 2000, seed=9).values
    for j in range(spec.d):
        assert kstest(u[:, j], "uniform").pvalue > 1e-3
    print("✓ simulated margins pass Kolmogorov-Smirnov")


if __name__ == "__main__":
    print("=" * 60)
    print("Testing R-vine evaluation")
    print("=" * 60)
    test_gaussian_vine_is_multivariate_normal()
    test_independence_loglik_is_zero()
    test_tree_decomposition_and_criteria()
    test_workspace_arguments()
    test_evaluate_rejects_bad_input()
    test_simulation_is_reproducible()
    test_simulated_gaussian_correlations()
    test_simulated_tree1_kendall_tau()
    test_matrix_recursion_matches_edge_recursion()
    test_empty_dataset_has_zero_loglik()
    test_simulated_margins_are_uniform()
