"""Full maximum likelihood and tree-by-tree estimation of R-vine parameters."""
# Standard library imports
import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

# Third-party imports
import numpy as np
import pandas as pd
from scipy.optimize import fmin_l_bfgs_b

# Local imports
from constants import (
    DEFAULT_MAXITER,
    DEFAULT_GTOL,
    DEFAULT_START,
    BOUNDARY_WARN_DIST,
)
from src import transforms
from src.bicop import INDEPENDENCE, fit_pair
from src.dataset import CopulaDataset
from src.deriv import observed_information, score_coord
from src.errors import BoundaryWarning, ConvergenceError, EvalError, SingularityError, SingularityWarning
from src.evaluate import aic, bic, evaluate, loglik_dataset
from src.information import empirical_moments, inverse
from src.utils.logger import log_time
from src.vine_spec import ParamIndex, RVineSpec

START_MODES = ("sequential", "spec")
GRADIENT_MODES = ("analytic", "numeric")


@dataclass
class FitOptions:
    maxiter: int = DEFAULT_MAXITER
    gtol: float = DEFAULT_GTOL
    start: str = DEFAULT_START
    gradient: str = "analytic"
    check_symmetry: bool = True
    raise_on_failure: bool = True

    def __post_init__(self):
        if self.start not in START_MODES:
            raise ValueError(f"start must be one of {START_MODES}, got {self.start!r}")
        if self.gradient not in GRADIENT_MODES:
            raise ValueError(f"gradient must be one of {GRADIENT_MODES}, got {self.gradient!r}")


@dataclass
class FitResult:
    """Fitted spec plus covariance and optimizer diagnostics.

    ``se`` is the ``d x d`` layout of ``se_vector``: first parameters below
    the diagonal, second parameters (Student-t df) in the transposed cell.
    ``evaluations`` counts likelihood-evaluation equivalents (one value
    with its analytic gradient counts once).
    """
    spec: RVineSpec
    loglik: float
    method: str
    n_obs: int
    covariance: np.ndarray
    se_vector: np.ndarray
    converged: bool = True
    iterations: int = 0
    evaluations: int = 0
    elapsed: float = 0.0
    message: str = ""
    boundary: List[ParamIndex] = field(default_factory=list)
    asymmetry: float = 0.0

    @property
    def se(self):
        return self.spec.layout(self.se_vector)

    @property
    def n_par(self):
        return self.spec.n_par

    @property
    def aic(self):
        return aic(self.loglik, self.n_par)

    @property
    def bic(self):
        return bic(self.loglik, self.n_par, self.n_obs)

    def param_table(self):
        rows = []
        theta = self.spec.get_vector()
        boundary = set(self.boundary)
        for p, value, se in zip(self.spec.param_index(), theta, self.se_vector):
            rows.append({
                "position": f"({p.k},{p.i})",
                "tree": self.spec.tree_of(p.k),
                "edge": self.spec.edge_label(p.k, p.i),
                "family": str(self.spec.family(p.k, p.i)),
                "slot": p.slot,
                "estimate": value,
                "se": se,
                "boundary_warning": p in boundary,
            })
        columns = ["position", "tree", "edge", "family", "slot", "estimate", "se", "boundary_warning"]
        return pd.DataFrame(rows, columns=columns)


def prepare(spec: RVineSpec, data):
    """Normalized spec and the matching ``n x d`` array.

    Plain arrays are taken in the variable order of ``spec`` itself.
    """
    spec_n = spec.normalize()
    if isinstance(data, CopulaDataset):
        return spec_n, data.aligned_to(spec_n).values
    u = np.asarray(data, dtype=float)
    if spec_n is spec:
        return spec, u
    order = [spec.permutation.index(orig) for orig in spec_n.permutation]
    return spec_n, u[:, order]


def _boundary_flags(spec, theta, logger=None):
    flags = []
    for p, value in zip(spec.param_index(), theta):
        code = int(spec.family(p.k, p.i).code)
        if transforms.near_bound(code, p.slot - 1, value, BOUNDARY_WARN_DIST):
            flags.append(p)
            message = f"estimate {value:.6g} of parameter {p} is within {BOUNDARY_WARN_DIST:g} of its bound"
            warnings.warn(message, BoundaryWarning)
            if logger is not None:
                logger.log_message(message, level=logging.WARNING)
    return flags


def _covariance(info, p, logger=None):
    try:
        return inverse(info)
    except SingularityError as err:
        warnings.warn(str(err), SingularityWarning)
        if logger is not None:
            logger.log_message(f"{err}; standard errors set to NaN", level=logging.WARNING)
        return np.full((p, p), np.nan)


def _se_from(cov):
    diag = np.diag(cov).copy()
    diag[diag < 0] = np.nan
    return np.sqrt(diag)


class _Objective:
    """Mean negative log-likelihood in internal coordinates, with call counting."""

    def __init__(self, spec, u):
        self.spec = spec
        self.u = u
        self.n = u.shape[0]
        self.index = spec.param_index()
        self.codes = [int(spec.family(p.k, p.i).code) for p in self.index]
        self.calls = 0

    def natural(self, eta):
        return np.array([
            transforms.from_internal(code, p.slot - 1, e)
            for code, p, e in zip(self.codes, self.index, eta)
        ])

    def internal(self, theta):
        return np.array([
            transforms.to_internal(code, p.slot - 1, t)
            for code, p, t in zip(self.codes, self.index, theta)
        ])

    def bounds(self):
        return [transforms.internal_bounds(code, p.slot - 1) for code, p in zip(self.codes, self.index)]

    def _evaluate(self, eta):
        self.calls += 1
        spec = self.spec.with_vector(self.natural(eta))
        try:
            ws = evaluate(spec, self.u)
        except EvalError:
            return spec, None
        return spec, ws

    def value(self, eta):
        _, ws = self._evaluate(eta)
        if ws is None:
            return np.inf
        return -ws.loglik_rows().sum() / self.n

    def value_and_grad(self, eta):
        spec, ws = self._evaluate(eta)
        if ws is None:
            return np.inf, np.zeros_like(eta)
        jac = np.array([
            transforms.jacobian(code, p.slot - 1, e)
            for code, p, e in zip(self.codes, self.index, eta)
        ])
        grad = np.array([score_coord(spec, ws, p)[0].sum() for p in self.index]) * jac
        return -ws.loglik_rows().sum() / self.n, -grad / self.n


@log_time
def fit_mle(spec0: RVineSpec, data, options: Optional[FitOptions] = None, logger=None) -> FitResult:
    """Joint maximum likelihood over all parameters with L-BFGS-B.

    The default start is the tree-by-tree estimate; ``options.start = "spec"``
    starts from the parameters in ``spec0``.
    """
    options = options or FitOptions()
    began = time.perf_counter()
    spec, u = prepare(spec0, data)
    n, p = u.shape[0], spec.n_par
    if p == 0:
        return FitResult(spec, loglik_dataset(spec, u), "ML", n, np.zeros((0, 0)), np.zeros(0),
                         elapsed=time.perf_counter() - began)

    if options.start == "sequential":
        seq_options = FitOptions(options.maxiter, options.gtol, "sequential", check_symmetry=False,
                                 raise_on_failure=options.raise_on_failure)
        start_spec = fit_sequential(spec, u, seq_options, logger=logger, covariance=False).spec
    else:
        start_spec = spec

    objective = _Objective(spec, u)
    eta0 = objective.internal(start_spec.get_vector())
    if options.gradient == "analytic":
        eta, f_val, info = fmin_l_bfgs_b(
            objective.value_and_grad, eta0, bounds=objective.bounds(),
            maxiter=options.maxiter, pgtol=options.gtol, factr=10.0)
    else:
        eta, f_val, info = fmin_l_bfgs_b(
            objective.value, eta0, approx_grad=True, bounds=objective.bounds(),
            maxiter=options.maxiter, pgtol=options.gtol, factr=10.0)

    grad_norm = float(np.max(np.abs(info["grad"]))) if len(info["grad"]) else 0.0
    converged = info["warnflag"] == 0 or (info["warnflag"] == 2 and grad_norm < 1e3 * options.gtol)
    message = str(info.get("task", ""))
    if logger is not None:
        logger.log_message(
            f"fit_mle: loglik={-f_val * n:.8f}, nit={info['nit']}, calls={objective.calls}, "
            f"|grad|={grad_norm:.3e}, warnflag={info['warnflag']} ({message})",
            level=logging.INFO if converged else logging.WARNING)
    if not converged and options.raise_on_failure:
        raise ConvergenceError(f"ML fit did not converge after {info['nit']} iterations: {message}")

    theta = objective.natural(eta)
    fitted = spec.with_vector(theta)
    boundary = _boundary_flags(fitted, theta, logger)
    obs_info, asymmetry = observed_information(fitted, u, check_symmetry=options.check_symmetry, logger=logger)
    cov = _covariance(obs_info, p, logger)
    return FitResult(
        spec=fitted,
        loglik=loglik_dataset(fitted, u),
        method="ML",
        n_obs=n,
        covariance=cov,
        se_vector=_se_from(cov),
        converged=bool(converged),
        iterations=int(info["nit"]),
        evaluations=objective.calls,
        elapsed=time.perf_counter() - began,
        message=message,
        boundary=boundary,
        asymmetry=asymmetry,
    )


def _staged(spec, tree):
    """``spec`` with every pair copula above ``tree`` replaced by independence."""
    families, params = {}, {}
    for pos in spec.positions():
        if spec.tree_of(pos[0]) <= tree:
            families[pos] = spec.family(*pos)
            params[pos] = spec.par(*pos)
        else:
            families[pos] = INDEPENDENCE
    return spec.with_families(families, params)


@log_time
def fit_sequential(spec0: RVineSpec, data, options: Optional[FitOptions] = None, logger=None,
                   covariance=True) -> FitResult:
    """Tree-by-tree estimation: each pair copula of tree ``t`` is fitted on the
    conditional distributions produced by the already fitted trees below it."""
    options = options or FitOptions()
    began = time.perf_counter()
    spec, u = prepare(spec0, data)
    n, d = u.shape[0], spec.d
    converged, iterations = True, 0
    messages = []
    for tree in range(1, d):
        positions = [pos for pos in spec.tree_positions(tree) if spec.family(*pos).n_par]
        if not positions:
            continue
        ws = evaluate(_staged(spec, tree - 1), u)
        fitted = {}
        for pos in positions:
            z1, z2 = ws.args[pos]
            start = spec.par(*pos) if options.start == "spec" else None
            cop, info = fit_pair(spec.family(*pos), z1, z2, start=start,
                                 maxiter=options.maxiter, gtol=options.gtol, logger=logger)
            iterations += info["nit"]
            if not info["converged"]:
                converged = False
                messages.append(f"pair {pos}: {info.get('message', '')}")
                if options.raise_on_failure:
                    raise ConvergenceError(f"pair fit at position {pos} did not converge: {info.get('message', '')}")
            fitted[pos] = cop.par
        spec = spec.with_params(fitted)
        if logger is not None:
            logger.log_message(f"fit_sequential: tree {tree} done, {len(positions)} pair(s)", level=logging.INFO)

    p = spec.n_par
    theta = spec.get_vector()
    boundary = _boundary_flags(spec, theta, logger) if p else []
    cov = np.full((p, p), np.nan)
    if covariance and p:
        try:
            cov = empirical_moments(spec, u).seq_covariance().V / n
        except SingularityError as err:
            warnings.warn(str(err), SingularityWarning)
            if logger is not None:
                logger.log_message(f"{err}; sequential standard errors set to NaN", level=logging.WARNING)
    return FitResult(
        spec=spec,
        loglik=loglik_dataset(spec, u),
        method="Sequential",
        n_obs=n,
        covariance=cov,
        se_vector=_se_from(cov) if p else np.zeros(0),
        converged=converged,
        iterations=iterations,
        elapsed=time.perf_counter() - began,
        message="; ".join(messages),
        boundary=boundary,
    )
