"""Analytic derivatives against central finite differences."""
# Standard library imports
import logging
from dataclasses import dataclass, field

# Third-party imports
import numpy as np
import pandas as pd

# Local imports
from constants import (
    FD_STEP,
    FD_GRADIENT_TOL,
    FD_HESSIAN_TOL,
    FD_CHECK_ROWS,
    DEFAULT_SEED,
)
from src import transforms
from src.deriv import hessian_rows, score_contributions
from src.evaluate import evaluate, loglik_dataset


@dataclass
class DerivCheck:
    what: str
    tol: float
    rows: list = field(default_factory=list)

    @property
    def max_error(self):
        return max((r["rel_error"] for r in self.rows), default=0.0)

    @property
    def passed(self):
        return self.max_error <= self.tol

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=["param_a", "param_b", "analytic", "numeric", "rel_error"])

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{self.what} check: {status}, {len(self.rows)} entries, max relative error {self.max_error:.3e} (tol {self.tol:g})"


def sample_rows(u, size=FD_CHECK_ROWS, seed=DEFAULT_SEED):
    """At most ``size`` rows drawn without replacement, kept in their original order."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] <= size:
        return u
    rng = np.random.default_rng(seed)
    return u[np.sort(rng.choice(u.shape[0], size=size, replace=False))]


def _steps(spec, theta, step):
    """Per-coordinate step, shrunk so both stencil points stay inside the parameter box."""
    out = []
    for p, value in zip(spec.param_index(), theta):
        code = int(spec.family(p.k, p.i).code)
        lo, hi = transforms.natural_bounds(code, p.slot - 1)
        h = step * max(1.0, abs(value))
        h = min(h, 0.5 * (value - lo), 0.5 * (hi - value))
        out.append(h)
    return np.array(out)


def _rel_error(analytic, numeric):
    return abs(analytic - numeric) / max(1.0, abs(numeric))


def check_gradient(spec, data, step=FD_STEP, tol=FD_GRADIENT_TOL, logger=None):
    theta = spec.get_vector()
    index = spec.param_index()
    analytic = score_contributions(spec, data).sum(axis=0)
    report = DerivCheck("gradient", tol)
    for j, h in enumerate(_steps(spec, theta, step)):
        up, down = theta.copy(), theta.copy()
        up[j] += h
        down[j] -= h
        numeric = (loglik_dataset(spec.with_vector(up), data) - loglik_dataset(spec.with_vector(down), data)) / (2 * h)
        report.rows.append({
            "param_a": str(index[j]),
            "param_b": "",
            "analytic": float(analytic[j]),
            "numeric": float(numeric),
            "rel_error": _rel_error(analytic[j], numeric),
        })
    if logger is not None:
        logger.log_message(report.summary(), level=logging.INFO if report.passed else logging.WARNING)
    return report


def check_hessian(spec, data, step=FD_STEP, tol=FD_HESSIAN_TOL, logger=None):
    """Analytic Hessian against central differences of the analytic score.

    Both orders of every mixed derivative are compared, so Student-t rows
    include the correlation/df cross terms twice.
    """
    theta = spec.get_vector()
    index = spec.param_index()
    analytic = hessian_rows(spec, evaluate(spec, data)).sum(axis=2)
    report = DerivCheck("hessian", tol)
    for b, h in enumerate(_steps(spec, theta, step)):
        up, down = theta.copy(), theta.copy()
        up[b] += h
        down[b] -= h
        column = (score_contributions(spec.with_vector(up), data).sum(axis=0)
                  - score_contributions(spec.with_vector(down), data).sum(axis=0)) / (2 * h)
        for a in range(len(index)):
            report.rows.append({
                "param_a": str(index[a]),
                "param_b": str(index[b]),
                "analytic": float(analytic[a, b]),
                "numeric": float(column[a]),
                "rel_error": _rel_error(analytic[a, b], column[a]),
            })
    if logger is not None:
        logger.log_message(report.summary(), level=logging.INFO if report.passed else logging.WARNING)
    return report
