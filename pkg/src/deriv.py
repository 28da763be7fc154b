"""Analytic score and observed information of the R-vine log-likelihood.

First derivatives follow the dependence-tracing recursion: seed the
parameter's own pair copula, then push the derivative of every conditional
distribution it feeds through the later trees. Second derivatives run the
same recursion with the full second-order chain rule at each position, which
covers every way two parameters can reach a copula term (through the first
argument, the second argument, both, or the copula itself).

All workspaces are padded ``(d + 2, d + 2, n)`` arrays; row ``d + 1`` and
unflagged positions stay zero.
"""
# Standard library imports
import logging
import warnings
from dataclasses import dataclass

# Third-party imports
import numpy as np

# Local imports
from constants import ASYMMETRY_TOL
from src.errors import SingularityWarning
from src.evaluate import EvalWorkspace, evaluate
from src.structure import second_argument
from src.utils.logger import log_time
from src.vine_spec import ParamIndex


@dataclass
class ScoreWorkspace:
    param: ParamIndex
    flags: np.ndarray
    s1direct: np.ndarray
    s1indirect: np.ndarray
    s1values: np.ndarray

    def value(self):
        return self.s1values.sum(axis=(0, 1))

    def row_value(self, k):
        return self.s1values[k].sum(axis=0)


@dataclass
class HessWorkspace:
    params: tuple
    s2direct: np.ndarray
    s2indirect: np.ndarray
    s2values: np.ndarray

    def value(self):
        return self.s2values.sum(axis=(0, 1))

    def row_value(self, k):
        return self.s2values[k].sum(axis=0)


def position_bundles(spec, ws: EvalWorkspace):
    if not ws.bundles:
        for pos in spec.positions():
            z1, z2 = ws.args[pos]
            ws.bundles[pos] = spec.bicop(*pos).bundles(z1, z2)
    return ws.bundles


def _z_derivs(spec, k, i, direct_src, indirect_src):
    j, direct = second_argument(spec.structure, spec.mtil, k, i)
    return j, direct_src[k, i], (direct_src if direct else indirect_src)[k, j]


def score_coord(spec, ws: EvalWorkspace, param: ParamIndex):
    """Derivative of each row's log-likelihood in one parameter coordinate.

    Returns ``(values, workspace)`` with ``values`` of length ``n``.
    """
    d, n = spec.d, ws.n
    bundles = position_bundles(spec, ws)
    flags = spec.dependence(param.k, param.i)
    s1d = np.zeros((d + 2, d + 2, n))
    s1i = np.zeros((d + 2, d + 2, n))
    s1v = np.zeros((d + 2, d + 2, n))
    k0, i0 = param.k, param.i
    t = 1 + param.slot
    log_density, h_first, h_second = bundles[(k0, i0)]
    s1d[k0 - 1, i0] = h_first.grad[t]
    s1i[k0 - 1, i0] = h_second.grad[t]
    s1v[k0, i0] = log_density.grad[t]
    for i in range(i0, 0, -1):
        for k in range(k0 - 1, i, -1):
            if not flags[k, i]:
                continue
            j, dz1, dz2 = _z_derivs(spec, k, i, s1d, s1i)
            log_density, h_first, h_second = bundles[(k, i)]
            if flags[k + 1, i]:
                s1v[k, i] += log_density.grad[0] * dz1
                s1d[k - 1, i] += h_first.grad[0] * dz1
                s1i[k - 1, i] += h_second.grad[0] * dz1
            if flags[k + 1, j]:
                s1v[k, i] += log_density.grad[1] * dz2
                s1d[k - 1, i] += h_first.grad[1] * dz2
                s1i[k - 1, i] += h_second.grad[1] * dz2
    sws = ScoreWorkspace(param, flags, s1d, s1i, s1v)
    return sws.value(), sws


def score_workspaces(spec, ws: EvalWorkspace):
    return [score_coord(spec, ws, p)[1] for p in spec.param_index()]


def score_contributions(spec, data):
    ws = evaluate(spec, data)
    index = spec.param_index()
    if not index:
        return np.zeros((ws.n, 0))
    return np.column_stack([score_coord(spec, ws, p)[0] for p in index])


def score(spec, data):
    return score_contributions(spec, data).sum(axis=0)


def _second_order(bundle, dza, dzb, ddz, ta, tb):
    """Second derivative of a pair function whose arguments depend on two parameters.

    ``dza``/``dzb`` are the first derivatives of ``(z1, z2)`` in each
    parameter, ``ddz`` the mixed second derivatives, and ``ta``/``tb`` the
    bundle indices of the parameters when they belong to this copula.
    """
    g, h = bundle.grad, bundle.hess
    val = g[0] * ddz[0] + g[1] * ddz[1]
    for x in range(2):
        for y in range(2):
            val = val + h[x, y] * dza[x] * dzb[y]
    if ta is not None:
        val = val + h[ta, 0] * dzb[0] + h[ta, 1] * dzb[1]
    if tb is not None:
        val = val + h[0, tb] * dza[0] + h[1, tb] * dza[1]
    if ta is not None and tb is not None:
        val = val + h[ta, tb]
    return val


def hessian_coord(spec, ws: EvalWorkspace, sws_a: ScoreWorkspace, sws_b: ScoreWorkspace):
    d, n = spec.d, ws.n
    bundles = position_bundles(spec, ws)
    pa, pb = sws_a.param, sws_b.param
    both = sws_a.flags * sws_b.flags
    s2d = np.zeros((d + 2, d + 2, n))
    s2i = np.zeros((d + 2, d + 2, n))
    s2v = np.zeros((d + 2, d + 2, n))
    zero = np.zeros(n)
    for i in range(d - 1, 0, -1):
        for k in range(d, i, -1):
            if not both[k, i]:
                continue
            j, dz1a, dz2a = _z_derivs(spec, k, i, sws_a.s1direct, sws_a.s1indirect)
            _, dz1b, dz2b = _z_derivs(spec, k, i, sws_b.s1direct, sws_b.s1indirect)
            _, ddz1, ddz2 = _z_derivs(spec, k, i, s2d, s2i)
            ta = 1 + pa.slot if pa.position == (k, i) else None
            tb = 1 + pb.slot if pb.position == (k, i) else None
            dza = (dz1a if sws_a.flags[k + 1, i] else zero, dz2a if sws_a.flags[k + 1, j] else zero)
            dzb = (dz1b if sws_b.flags[k + 1, i] else zero, dz2b if sws_b.flags[k + 1, j] else zero)
            ddz = (ddz1, ddz2)
            log_density, h_first, h_second = bundles[(k, i)]
            s2v[k, i] = _second_order(log_density, dza, dzb, ddz, ta, tb)
            s2d[k - 1, i] = _second_order(h_first, dza, dzb, ddz, ta, tb)
            s2i[k - 1, i] = _second_order(h_second, dza, dzb, ddz, ta, tb)
    hws = HessWorkspace((pa, pb), s2d, s2i, s2v)
    return hws.value(), hws


def hessian_rows(spec, ws: EvalWorkspace, sws=None, symmetric=False):
    """``(p, p, n)`` per-row Hessians.

    With ``symmetric`` only the upper triangle is computed and mirrored;
    otherwise both orders are computed independently.
    """
    sws = sws if sws is not None else score_workspaces(spec, ws)
    p = len(sws)
    out = np.zeros((p, p, ws.n))
    for a in range(p):
        for b in range(a if symmetric else 0, p):
            out[a, b] = hessian_coord(spec, ws, sws[a], sws[b])[0]
            if symmetric:
                out[b, a] = out[a, b]
    return out


def _report_asymmetry(hess, logger):
    scale = max(np.max(np.abs(hess)), 1.0)
    asymmetry = float(np.max(np.abs(hess - hess.T))) / scale if hess.size else 0.0
    if asymmetry > ASYMMETRY_TOL:
        message = f"Hessian asymmetry {asymmetry:.3e} exceeds {ASYMMETRY_TOL:g}"
        warnings.warn(message, SingularityWarning)
        if logger is not None:
            logger.log_message(message + f"\n{np.array2string(hess, precision=6)}", level=logging.WARNING)
    return asymmetry


@log_time
def observed_information(spec, data, check_symmetry=True, logger=None):
    """Negative Hessian of the dataset log-likelihood, symmetrized.

    Returns ``(information, asymmetry)``; ``asymmetry`` is the largest relative
    difference between the two computation orders (0 when not checked).
    """
    p = spec.n_par
    ws = evaluate(spec, data)
    if p == 0 or ws.n == 0:
        return np.zeros((p, p)), 0.0
    hess = hessian_rows(spec, ws, symmetric=not check_symmetry).sum(axis=2)
    asymmetry = _report_asymmetry(hess, logger) if check_symmetry else 0.0
    info = -0.5 * (hess + hess.T)
    try:
        np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        warnings.warn("observed information is not positive definite", SingularityWarning)
        if logger is not None:
            logger.log_message(
                f"observed information not positive definite, eigenvalues {np.linalg.eigvalsh(info)}",
                level=logging.WARNING)
    return info, asymmetry


def tree_score(spec, sws: ScoreWorkspace, tree):
    return sws.row_value(spec.d - tree + 1)


def tree_hessian(spec, hws: HessWorkspace, tree):
    return hws.row_value(spec.d - tree + 1)
