"""Bivariate copulas: family tags, rotation, h-functions and derivative bundles."""
# Standard library imports
import logging
from dataclasses import dataclass
from enum import IntEnum

# Third-party imports
import numpy as np
from scipy import integrate, special
from scipy.optimize import fmin_l_bfgs_b, root_scalar
from scipy.optimize.elementwise import find_root
from scipy.stats import kendalltau

# Local imports
from constants import (
    CLAMP_EPS,
    FRANK_MIN_ABS,
    FRANK_MAX_ABS,
    GUMBEL_MAX,
    JOE_MAX,
    NU_START,
    ROOT_MAXITER,
    ROOT_XTOL,
    DEFAULT_MAXITER,
    DEFAULT_GTOL,
)
from src.errors import DomainError, EvalError, ConvergenceError, ParseError
from src.families import FAMILIES
from src import transforms


class FamilyCode(IntEnum):
    INDEPENDENCE = 0
    GAUSSIAN = 1
    STUDENT_T = 2
    FRANK = 3
    GUMBEL = 4
    JOE = 5


_NAMES = {
    FamilyCode.INDEPENDENCE: "Independence",
    FamilyCode.GAUSSIAN: "Gaussian",
    FamilyCode.STUDENT_T: "StudentT",
    FamilyCode.FRANK: "Frank",
    FamilyCode.GUMBEL: "Gumbel",
    FamilyCode.JOE: "Joe",
}


@dataclass(frozen=True)
class FamilyTag:
    """Family code plus the optional reflection of the second argument."""
    code: FamilyCode
    reflected: bool = False

    @classmethod
    def parse(cls, token: str):
        token = token.strip()
        reflected = token.endswith("r")
        digits = token[:-1] if reflected else token
        try:
            code = FamilyCode(int(digits))
        except ValueError:
            raise ParseError(f"unknown family code {token!r}")
        if reflected and code == FamilyCode.INDEPENDENCE:
            raise ParseError("independence cannot be reflected")
        return cls(code, reflected)

    @property
    def n_par(self):
        return FAMILIES[self.code].n_par

    @property
    def name(self):
        return ("r" if self.reflected else "") + _NAMES[self.code]

    def __str__(self):
        return f"{int(self.code)}{'r' if self.reflected else ''}"


INDEPENDENCE = FamilyTag(FamilyCode.INDEPENDENCE)


def clamp(u, eps=CLAMP_EPS):
    return np.clip(np.asarray(u, dtype=float), eps, 1.0 - eps)


def check_params(family: FamilyTag, par):
    """Raise DomainError unless ``par`` lies in the family domain."""
    par = tuple(float(p) for p in par)
    if len(par) != family.n_par:
        raise DomainError(f"{family.name} takes {family.n_par} parameter(s), got {len(par)}")
    if not all(np.isfinite(par)):
        raise DomainError(f"{family.name} parameters must be finite: {par}")
    code = family.code
    if code in (FamilyCode.GAUSSIAN, FamilyCode.STUDENT_T) and not -1.0 < par[0] < 1.0:
        raise DomainError(f"{family.name} correlation {par[0]} outside (-1, 1)")
    if code == FamilyCode.STUDENT_T and not par[1] > 2.0:
        raise DomainError(f"{family.name} degrees of freedom {par[1]} must exceed 2")
    if code == FamilyCode.FRANK and abs(par[0]) < FRANK_MIN_ABS:
        raise DomainError(f"Frank parameter {par[0]} too close to 0, use Independence")
    if code in (FamilyCode.GUMBEL, FamilyCode.JOE) and par[0] < 1.0:
        raise DomainError(f"{family.name} parameter {par[0]} must be >= 1")
    return par


def _frank_tau(theta):
    debye, _ = integrate.quad(lambda t: t / np.expm1(t) if t != 0 else 1.0, 0.0, theta)
    return 1.0 - 4.0 / theta + 4.0 * debye / theta ** 2


def _joe_tau(theta):
    if abs(theta - 2.0) < 1e-8:
        return 1.0 - special.polygamma(1, 2.0)
    return 1.0 + 2.0 / (2.0 - theta) * (special.digamma(2.0) - special.digamma(2.0 / theta + 1.0))


def par_to_tau(family: FamilyTag, par):
    code = family.code
    if code == FamilyCode.INDEPENDENCE:
        tau = 0.0
    elif code in (FamilyCode.GAUSSIAN, FamilyCode.STUDENT_T):
        tau = 2.0 / np.pi * np.arcsin(par[0])
    elif code == FamilyCode.FRANK:
        tau = _frank_tau(par[0])
    elif code == FamilyCode.GUMBEL:
        tau = 1.0 - 1.0 / par[0]
    else:
        tau = _joe_tau(par[0])
    return -tau if family.reflected else tau


def _invert_tau(func, tau, lo, hi):
    f_lo, f_hi = func(lo) - tau, func(hi) - tau
    if f_lo >= 0:
        return lo
    if f_hi <= 0:
        return hi
    res = root_scalar(lambda x: func(x) - tau, bracket=[lo, hi], method="brentq", maxiter=ROOT_MAXITER)
    return res.root


def tau_to_par(family: FamilyTag, tau):
    """Starting parameters from Kendall's tau; the closed form where one exists."""
    tau = float(np.clip(-tau if family.reflected else tau, -0.99, 0.99))
    code = family.code
    if code == FamilyCode.INDEPENDENCE:
        return ()
    if code == FamilyCode.GAUSSIAN:
        return (float(np.sin(np.pi * tau / 2.0)),)
    if code == FamilyCode.STUDENT_T:
        return (float(np.sin(np.pi * tau / 2.0)), NU_START)
    if code == FamilyCode.GUMBEL:
        return (float(np.clip(1.0 / (1.0 - max(tau, 0.0)), 1.0, GUMBEL_MAX)),)
    if code == FamilyCode.JOE:
        return (float(_invert_tau(_joe_tau, max(tau, 0.0), 1.0 + 1e-6, JOE_MAX)),)
    # Frank
    if abs(tau) < 1e-4:
        return (1e-3 if tau >= 0 else -1e-3,)
    if tau > 0:
        return (float(_invert_tau(_frank_tau, tau, 1e-3, FRANK_MAX_ABS)),)
    return (-float(_invert_tau(_frank_tau, -tau, 1e-3, FRANK_MAX_ABS)),)


class Bicop:
    """A bivariate copula: family tag plus parameters.

    ``h(u1, u2)`` is the conditional CDF of the first argument given the
    second, ``v(u1, u2)`` the conditional CDF of the second given the first.
    """

    def __init__(self, family: FamilyTag, par=()):
        self.family = family
        self.par = check_params(family, par)
        self._impl = FAMILIES[family.code]

    def __repr__(self):
        return f"{self.__class__.__name__}(family={self.family.name}, par={self.par})"

    @property
    def n_par(self):
        return self.family.n_par

    def _args(self, u1, u2):
        u1 = clamp(np.atleast_1d(u1))
        u2 = np.atleast_1d(np.asarray(u2, dtype=float))
        if self.family.reflected:
            u2 = 1.0 - u2
        u1, u2 = np.broadcast_arrays(u1, clamp(u2))
        return u1.astype(float), u2.astype(float)

    # values ------------------------------------------------------------

    def log_pdf(self, u1, u2):
        u1, u2 = self._args(u1, u2)
        return self._impl.log_pdf(u1, u2, self.par)

    def pdf(self, u1, u2):
        dens = np.exp(self.log_pdf(u1, u2))
        if np.any(~np.isfinite(dens)) or np.any(dens <= 0.0):
            raise EvalError(f"{self.family.name} density underflow or overflow at par={self.par}")
        return dens

    def h(self, u1, u2):
        a, b = self._args(u1, u2)
        return np.clip(self._impl.hfun(a, b, self.par), 0.0, 1.0)

    def v(self, u1, u2):
        a, b = self._args(u1, u2)
        # exchangeable families: h(u2|u1) is h with swapped arguments
        res = np.clip(self._impl.hfun(b, a, self.par), 0.0, 1.0)
        return 1.0 - res if self.family.reflected else res

    def cdf(self, u1, u2):
        a, b = self._args(u1, u2)
        res = self._impl.cdf(a, b, self.par)
        return a - res if self.family.reflected else res

    # inverses ----------------------------------------------------------

    def _hinv_unrotated(self, w, u2):
        w = clamp(np.atleast_1d(w))
        w, u2 = np.broadcast_arrays(w, u2)
        if self._impl.hinv is not None:
            return clamp(self._impl.hinv(w, u2, self.par))
        w = w.astype(float)
        u2 = u2.astype(float)
        lo = np.full_like(w, CLAMP_EPS)
        hi = np.full_like(w, 1.0 - CLAMP_EPS)
        res = np.empty_like(w)
        below = self._impl.hfun(lo, u2, self.par) >= w
        above = self._impl.hfun(hi, u2, self.par) <= w
        res[below] = CLAMP_EPS
        res[above & ~below] = 1.0 - CLAMP_EPS
        inside = ~(below | above)
        if np.any(inside):

            def func(x, cond, target):
                return self._impl.hfun(x, cond, self.par) - target

            sol = find_root(
                func,
                (lo[inside], hi[inside]),
                args=(u2[inside], w[inside]),
                tolerances={"xatol": ROOT_XTOL, "xrtol": 4 * np.finfo(float).eps},
                maxiter=ROOT_MAXITER,
            )
            if not np.all(sol.success):
                raise ConvergenceError(
                    f"h-inverse of {self.family.name} did not converge in {ROOT_MAXITER} iterations")
            res[inside] = sol.x
        return res

    def h_inverse(self, w, u2):
        """Solve ``h(x, u2) = w`` for ``x``."""
        u2 = clamp(np.atleast_1d(u2))
        if self.family.reflected:
            u2 = clamp(1.0 - u2)
        return self._hinv_unrotated(w, u2)

    def v_inverse(self, u1, w):
        """Solve ``v(u1, x) = w`` for ``x``."""
        u1 = clamp(np.atleast_1d(u1))
        w = np.atleast_1d(np.asarray(w, dtype=float))
        if self.family.reflected:
            return clamp(1.0 - self._hinv_unrotated(1.0 - w, u1))
        return self._hinv_unrotated(w, u1)

    # derivative bundles ------------------------------------------------

    def bundles(self, u1, u2):
        """(log-density, h, v) bundles in the variables ``(u1, u2, par...)``."""
        a, b = self._args(u1, u2)
        log_density, h_first, h_second = self._impl.bundles(a, b, self.par)
        if self.family.reflected:
            log_density = log_density.reflect_second()
            h_first = h_first.reflect_second()
            h_second = h_second.reflect_second().complement()
        return log_density, h_first, h_second

    def deriv_bundle_first(self, u1, u2):
        log_density, h_first, _ = self.bundles(u1, u2)
        dens = np.exp(log_density.val)
        grad = dens * log_density.grad
        return {
            "d1": grad[0],
            "d2": grad[1],
            "dtheta": grad[2:],
            "h_d1": h_first.grad[0],
            "h_d2": h_first.grad[1],
            "h_dtheta": h_first.grad[2:],
        }

    def deriv_bundle_second(self, u1, u2):
        log_density, h_first, _ = self.bundles(u1, u2)
        dens = log_density.exp()
        return {
            "d11": dens.hess[0, 0],
            "d12": dens.hess[0, 1],
            "d22": dens.hess[1, 1],
            "dtheta_theta": dens.hess[2:, 2:],
            "dtheta_d1": dens.hess[2:, 0],
            "dtheta_d2": dens.hess[2:, 1],
            "h_d11": h_first.hess[0, 0],
            "h_d12": h_first.hess[0, 1],
            "h_d22": h_first.hess[1, 1],
            "h_dtheta_theta": h_first.hess[2:, 2:],
            "h_dtheta_d1": h_first.hess[2:, 0],
            "h_dtheta_d2": h_first.hess[2:, 1],
        }

    # dependence measures, simulation and fitting -------------------------

    def tau(self):
        return par_to_tau(self.family, self.par)

    @classmethod
    def from_tau(cls, family: FamilyTag, tau):
        return cls(family, tau_to_par(family, tau))

    def simulate(self, n, seed=None):
        rng = np.random.default_rng(seed)
        draws = rng.uniform(size=(n, 2))
        draws[:, 0] = self.h_inverse(draws[:, 0], draws[:, 1])
        return draws


def fit_pair(family: FamilyTag, u1, u2, start=None, maxiter=DEFAULT_MAXITER, gtol=DEFAULT_GTOL, logger=None):
    """Bivariate maximum likelihood with analytic parameter gradient.

    Starting values invert the empirical Kendall's tau unless ``start`` is given.
    Returns ``(Bicop, info)`` where ``info`` carries the optimizer diagnostics.
    """
    if family.n_par == 0:
        return Bicop(family), {"converged": True, "nit": 0, "loglik": 0.0}
    u1 = clamp(u1)
    u2 = clamp(u2)
    n = len(u1)
    if start is None:
        tau, _ = kendalltau(u1, u2)
        start = tau_to_par(family, 0.0 if np.isnan(tau) else tau)
    code = int(family.code)
    eta0 = np.array([transforms.to_internal(code, j, p) for j, p in enumerate(start)])
    bounds = [transforms.internal_bounds(code, j) for j in range(family.n_par)]

    def natural(eta):
        return tuple(transforms.from_internal(code, j, e) for j, e in enumerate(eta))

    def neg_ll(eta):
        cop = Bicop(family, natural(eta))
        log_density, _, _ = cop.bundles(u1, u2)
        if not np.all(np.isfinite(log_density.val)):
            return np.inf, np.zeros_like(eta)
        jac = np.array([transforms.jacobian(code, j, e) for j, e in enumerate(eta)])
        grad = log_density.grad[2:].sum(axis=1) * jac
        return -log_density.val.sum() / n, -grad / n

    eta, f_val, info = fmin_l_bfgs_b(neg_ll, eta0, bounds=bounds, maxiter=maxiter, pgtol=gtol)
    converged = info["warnflag"] == 0 or (
        info["warnflag"] == 2 and np.max(np.abs(info["grad"])) < 1e3 * gtol)
    if logger is not None:
        logger.log_message(
            f"pair fit {family.name}: par={natural(eta)}, loglik={-f_val * n:.6f}, "
            f"nit={info['nit']}, warnflag={info['warnflag']}",
            level=logging.INFO if converged else logging.WARNING,
        )
    return Bicop(family, natural(eta)), {
        "converged": bool(converged),
        "nit": int(info["nit"]),
        "loglik": float(-f_val * n),
        "message": str(info.get("task", "")),
    }
