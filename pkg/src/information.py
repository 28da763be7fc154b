"""Expected Fisher information and the asymptotic covariance of both estimators.

Expectations are integrals over the unit cube against the vine density. They
are computed in normal-score coordinates (``u = Phi(z)`` on a truncated box),
where the integrand is smooth enough for adaptive cubature. Above
``MAX_QUADRATURE_DIM`` dimensions a seeded Monte Carlo average over simulated
observations is used instead.

One integration pass yields the information matrix together with the
``K``/``J`` matrices of the tree-by-tree estimator.
"""
# Standard library imports
import logging
from dataclasses import dataclass
from typing import Optional

# Third-party imports
import numpy as np
from scipy.integrate import cubature
from scipy.special import ndtr
from scipy.stats import norm

# Local imports
from constants import (
    DEFAULT_INTEGRATION_TOL,
    MAX_QUADRATURE_DIM,
    NORMAL_SCORE_BOUND,
    MAX_SUBDIVISIONS,
    DEFAULT_MC_SIZE,
    DEFAULT_SEED,
    MC_CHUNK,
)
from src.deriv import hessian_coord, score_workspaces
from src.errors import DomainError, IntegrationError, SingularityError
from src.evaluate import evaluate, simulate
from src.utils.logger import log_time


@dataclass
class SeqCovariance:
    K: np.ndarray
    J: np.ndarray
    V: np.ndarray


@dataclass
class ExpectedMoments:
    """Per-observation expectations at the spec's parameters.

    ``info`` is the Fisher information, ``K`` the expected outer product of
    the own-tree scores and ``J`` the negative expected tree-wise Hessian.
    ``error`` holds the integration (or Monte Carlo) standard error of each
    entry, stacked like the three matrices.
    """
    info: np.ndarray
    K: np.ndarray
    J: np.ndarray
    error: np.ndarray
    method: str
    n_eval: int
    mass: float

    def seq_covariance(self):
        return sequential_covariance_from(self.K, self.J)


def _moment_rows(spec, u):
    p = spec.n_par
    ws = evaluate(spec, u)
    index = spec.param_index()
    sws = score_workspaces(spec, ws)
    out = np.zeros((ws.n, 3, p, p))
    own = np.column_stack([s.s1values[s.param.k, s.param.i] for s in sws])
    out[:, 1] = own[:, :, None] * own[:, None, :]
    for a in range(p):
        for b in range(a, p):
            value, hws = hessian_coord(spec, ws, sws[a], sws[b])
            out[:, 0, a, b] = out[:, 0, b, a] = -value
            ka, kb = index[a].k, index[b].k
            # tree of a at or above tree of b: row k_a of the tree-a likelihood
            if ka <= kb:
                out[:, 2, a, b] = -hws.row_value(ka)
            if kb <= ka:
                out[:, 2, b, a] = -hws.row_value(kb)
    return out, ws.loglik_rows()


def _cubature_rule(d):
    return "gk21" if d <= 3 else "genz-malik"


@log_time
def expected_moments(spec, tol=DEFAULT_INTEGRATION_TOL, monte_carlo=None, mc_size=DEFAULT_MC_SIZE,
                     seed=DEFAULT_SEED, max_subdivisions=MAX_SUBDIVISIONS, logger=None):
    """Information, K and J in a single pass.

    ``monte_carlo`` forces (True) or forbids (False) the Monte Carlo route;
    by default it is used only above ``MAX_QUADRATURE_DIM`` dimensions.
    """
    p, d = spec.n_par, spec.d
    if p == 0:
        empty = np.zeros((0, 0))
        return ExpectedMoments(empty, empty, empty, np.zeros((3, 0, 0)), "none", 0, 1.0)
    if monte_carlo is None:
        monte_carlo = d > MAX_QUADRATURE_DIM
    if monte_carlo:
        return _monte_carlo_moments(spec, mc_size, seed, logger)

    bound = NORMAL_SCORE_BOUND
    counter = {"points": 0}

    def integrand(z):
        counter["points"] += z.shape[0]
        u = ndtr(z)
        rows, loglik = _moment_rows(spec, u)
        weight = np.exp(loglik + norm.logpdf(z).sum(axis=1))
        flat = (rows * weight[:, None, None, None]).reshape(z.shape[0], -1)
        return np.column_stack([flat, weight])

    res = cubature(
        integrand,
        np.full(d, -bound),
        np.full(d, bound),
        rule=_cubature_rule(d),
        rtol=tol,
        atol=tol,
        max_subdivisions=max_subdivisions,
    )
    if logger is not None:
        logger.log_message(
            f"cubature d={d}: status={res.status}, subdivisions={res.subdivisions}, "
            f"points={counter['points']}", level=logging.INFO)
    if res.status != "converged":
        raise IntegrationError(
            f"cubature did not reach tolerance {tol:g} within {max_subdivisions} subdivisions")
    estimate = np.asarray(res.estimate)
    error = np.asarray(res.error)
    mass = float(estimate[-1])
    moments = estimate[:-1].reshape(3, p, p)
    info = 0.5 * (moments[0] + moments[0].T)
    K = 0.5 * (moments[1] + moments[1].T)
    return ExpectedMoments(info, K, moments[2], error[:-1].reshape(3, p, p), "cubature", counter["points"], mass)


def _monte_carlo_moments(spec, mc_size, seed, logger):
    p = spec.n_par
    u = simulate(spec, mc_size, seed=seed).values
    total = np.zeros((3, p, p))
    total_sq = np.zeros((3, p, p))
    for start in range(0, mc_size, MC_CHUNK):
        rows, _ = _moment_rows(spec, u[start:start + MC_CHUNK])
        total += rows.sum(axis=0)
        total_sq += (rows ** 2).sum(axis=0)
    mean = total / mc_size
    var = np.maximum(total_sq / mc_size - mean ** 2, 0.0) * mc_size / max(mc_size - 1, 1)
    error = np.sqrt(var / mc_size)
    if logger is not None:
        logger.log_message(
            f"Monte Carlo moments: n={mc_size}, seed={seed}, max standard error={error.max():.3e}",
            level=logging.INFO)
    info = 0.5 * (mean[0] + mean[0].T)
    K = 0.5 * (mean[1] + mean[1].T)
    return ExpectedMoments(info, K, mean[2], error.reshape(3, p, p), "monte_carlo", mc_size, 1.0)


def fisher_information(spec, tol=DEFAULT_INTEGRATION_TOL, **kwargs):
    return expected_moments(spec, tol=tol, **kwargs).info


def inverse(matrix, what="information"):
    if matrix.size == 0:
        return matrix.copy()
    try:
        cond = np.linalg.cond(matrix)
        if not np.isfinite(cond) or cond > 1e14:
            raise np.linalg.LinAlgError
        return np.linalg.inv(matrix)
    except np.linalg.LinAlgError:
        raise SingularityError(f"{what} matrix is singular")


def sequential_covariance_from(K, J):
    J_inv = inverse(J, what="J")
    V = J_inv @ K @ J_inv.T
    return SeqCovariance(K, J, 0.5 * (V + V.T))


def empirical_moments(spec, data):
    p = spec.n_par
    if p == 0:
        empty = np.zeros((0, 0))
        return ExpectedMoments(empty, empty, empty, np.zeros((3, 0, 0)), "empirical", 0, 1.0)
    u = data.values if hasattr(data, "values") else np.asarray(data)
    rows, _ = _moment_rows(spec, u)
    n = rows.shape[0]
    mean = rows.mean(axis=0)
    error = rows.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.full_like(mean, np.nan)
    info = 0.5 * (mean[0] + mean[0].T)
    K = 0.5 * (mean[1] + mean[1].T)
    return ExpectedMoments(info, K, mean[2], error, "empirical", n, 1.0)


def sequential_covariance(spec, mode="expected", data=None, tol=DEFAULT_INTEGRATION_TOL, **kwargs):
    """``V = J^-1 K J^-T`` for one observation, expected or plug-in."""
    if mode == "expected":
        moments = expected_moments(spec, tol=tol, **kwargs)
    elif mode == "empirical":
        if data is None:
            raise ValueError("empirical mode needs data")
        moments = empirical_moments(spec, data)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return moments.seq_covariance()


def asymptotic_se_mle(spec, tol=DEFAULT_INTEGRATION_TOL, moments: Optional[ExpectedMoments] = None, **kwargs):
    moments = moments or expected_moments(spec, tol=tol, **kwargs)
    cov = inverse(moments.info)
    return spec.layout(np.sqrt(np.diag(cov)))


def asymptotic_se_seq(spec, tol=DEFAULT_INTEGRATION_TOL, moments: Optional[ExpectedMoments] = None, **kwargs):
    moments = moments or expected_moments(spec, tol=tol, **kwargs)
    V = moments.seq_covariance().V
    return spec.layout(np.sqrt(np.diag(V)))


def gaussian_analytic_KJ(rho12, rho23, rho13_2):
    """Closed-form K and J of the 3-dim Gaussian vine with pairs 12, 23 and 13|2.

    Coordinates are ordered ``(rho12, rho23, rho13_2)``.
    """
    for value in (rho12, rho23, rho13_2):
        if not -1.0 < value < 1.0:
            raise DomainError(f"correlation {value} outside (-1, 1)")
    a12, a23, ar = 1.0 - rho12 ** 2, 1.0 - rho23 ** 2, 1.0 - rho13_2 ** 2
    rho13 = rho13_2 * np.sqrt(a12 * a23) + rho12 * rho23
    if not -1.0 < rho13 < 1.0:
        raise DomainError(f"reconstructed rho13 = {rho13} outside (-1, 1)")
    partial = rho13 - rho12 * rho23
    k12 = partial * (1.0 + 2.0 * rho12 * rho23 * partial / (a12 * a23))
    d12 = (1.0 + rho12 ** 2) / a12 ** 2
    d23 = (1.0 + rho23 ** 2) / a23 ** 2
    dr = (1.0 + rho13_2 ** 2) / ar ** 2
    K = np.array([
        [d12, k12 / (a12 * a23), 0.0],
        [k12 / (a12 * a23), d23, 0.0],
        [0.0, 0.0, dr],
    ])
    J = np.array([
        [d12, 0.0, 0.0],
        [0.0, d23, 0.0],
        [rho13_2 * rho12 / (a12 * ar), rho13_2 * rho23 / (a23 * ar), dr],
    ])
    return K, J
