"""Rolling-window re-estimation with structure and families held fixed."""
# Standard library imports
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

# Third-party imports
import numpy as np
import pandas as pd

# Local imports
from constants import (
    DEFAULT_WINDOW,
    DEFAULT_STEP,
    DEFAULT_BAND_MULTIPLIER,
    DEFAULT_ROLLING_WORKERS,
)
from src.dataset import CopulaDataset
from src.errors import ConvergenceError, DomainError, VineError
from src.inference import FitOptions, fit_mle, fit_sequential, prepare
from src.utils.logger import log_time
from src.vine_spec import RVineSpec

SE_METHODS = ("observed_info",)


@dataclass
class RollingConfig:
    window: int = DEFAULT_WINDOW
    step: int = DEFAULT_STEP
    se_method: str = "observed_info"
    band_multiplier: float = DEFAULT_BAND_MULTIPLIER
    workers: int = DEFAULT_ROLLING_WORKERS
    # every window starts from the full-sample sequential estimate
    cold_start: bool = False

    def __post_init__(self):
        if self.window < 1 or self.step < 1:
            raise DomainError(f"window and step must be positive, got window={self.window}, step={self.step}")
        if self.se_method not in SE_METHODS:
            raise ValueError(f"se_method must be one of {SE_METHODS}, got {self.se_method!r}")

    def starts(self, n):
        if self.window > n:
            raise DomainError(f"window {self.window} exceeds the sample size {n}")
        return list(range(0, n - self.window + 1, self.step))


@dataclass
class WindowFit:
    end_index: int
    end_label: str
    estimate: np.ndarray
    se: np.ndarray
    loglik: float
    converged: bool
    boundary: np.ndarray
    message: str = ""


@dataclass
class RollingResult:
    """Per-window estimates ordered by the index of each window's last row."""
    spec: RVineSpec
    full_sample: np.ndarray
    windows: List[WindowFit] = field(default_factory=list)

    def __len__(self):
        return len(self.windows)

    def estimates(self):
        return np.array([w.estimate for w in self.windows])

    def ses(self):
        return np.array([w.se for w in self.windows])


def _window_fit(spec, u, labels, start, window, options, logger):
    stop = start + window
    end = stop - 1
    p = spec.n_par
    try:
        res = fit_mle(spec, u[start:stop], options, logger=logger)
    except VineError as err:
        if logger is not None:
            logger.log_message(f"window ending at {end} failed: {err}", level=logging.WARNING)
        return WindowFit(end, str(labels[end]), np.full(p, np.nan), np.full(p, np.nan), np.nan,
                         False, np.zeros(p, dtype=bool), str(err)), None
    boundary = set(res.boundary)
    flags = np.array([q in boundary for q in res.spec.param_index()], dtype=bool)
    return WindowFit(end, str(labels[end]), res.spec.get_vector(), res.se_vector, res.loglik,
                     res.converged, flags, res.message), res.spec


@log_time
def rolling_fit(spec: RVineSpec, data, cfg: Optional[RollingConfig] = None, options: Optional[FitOptions] = None,
                logger=None) -> RollingResult:
    """ML fit on every window with standard errors from the observed information.

    By default windows are fitted in order, each starting from the previous
    window's estimate (the first from the full-sample sequential fit).
    ``cfg.cold_start`` or ``cfg.workers > 1`` fits every window from the
    full-sample sequential estimate, in parallel when ``workers > 1``.
    """
    cfg = cfg or RollingConfig()
    base = options or FitOptions()
    labels = data.index if isinstance(data, CopulaDataset) else pd.RangeIndex(len(data))
    spec, u = prepare(spec, data)
    n = u.shape[0]
    starts = cfg.starts(n)

    seq = fit_sequential(spec, u, FitOptions(base.maxiter, base.gtol, "sequential", raise_on_failure=False),
                         logger=logger, covariance=False)
    full = fit_mle(seq.spec, u, FitOptions(base.maxiter, base.gtol, "spec", check_symmetry=False,
                                           raise_on_failure=False), logger=logger)
    window_options = FitOptions(base.maxiter, base.gtol, "spec", base.gradient,
                                check_symmetry=False, raise_on_failure=False)
    if logger is not None:
        logger.log_message(
            f"rolling: n={n}, window={cfg.window}, step={cfg.step}, {len(starts)} windows, "
            f"full-sample loglik={full.loglik:.6f}", level=logging.INFO)

    result = RollingResult(full.spec, full.spec.get_vector())
    if cfg.cold_start or cfg.workers > 1:
        def job(start):
            return _window_fit(seq.spec, u, labels, start, cfg.window, window_options, logger)[0]

        with ThreadPoolExecutor(max_workers=max(cfg.workers, 1)) as executor:
            result.windows = list(executor.map(job, starts))
    else:
        current = seq.spec
        for number, start in enumerate(starts, start=1):
            fit, fitted_spec = _window_fit(current, u, labels, start, cfg.window, window_options, logger)
            result.windows.append(fit)
            if fit.converged and fitted_spec is not None:
                current = fitted_spec
            if logger is not None:
                logger.log_message(
                    f"window {number}/{len(starts)} ending at {fit.end_index}: loglik={fit.loglik:.6f}, "
                    f"converged={fit.converged}", level=logging.INFO)

    if starts and not any(w.converged for w in result.windows):
        raise ConvergenceError(f"none of the {len(starts)} windows converged")
    return result


BAND_COLUMNS = [
    "end_index", "end_label", "tree", "edge", "family", "slot", "estimate", "se",
    "lower", "upper", "full_sample_mle", "converged", "boundary_warning",
]


def band_table(result: RollingResult, cfg: Optional[RollingConfig] = None) -> pd.DataFrame:
    """One row per (window, parameter) with ``estimate -/+ band_multiplier * se``."""
    cfg = cfg or RollingConfig()
    spec = result.spec
    index = spec.param_index()
    rows = []
    for w in result.windows:
        for j, p in enumerate(index):
            est, se = w.estimate[j], w.se[j]
            rows.append({
                "end_index": w.end_index,
                "end_label": w.end_label,
                "tree": spec.tree_of(p.k),
                "edge": spec.edge_label(p.k, p.i),
                "family": str(spec.family(p.k, p.i)),
                "slot": p.slot,
                "estimate": est,
                "se": se,
                "lower": est - cfg.band_multiplier * se,
                "upper": est + cfg.band_multiplier * se,
                "full_sample_mle": result.full_sample[j],
                "converged": w.converged,
                "boundary_warning": bool(w.boundary[j]),
            })
    return pd.DataFrame(rows, columns=BAND_COLUMNS)
