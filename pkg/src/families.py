"""Closed-form bivariate copula families.

Every family works on unrotated copula data and exposes

* ``log_pdf(u1, u2, par)`` and ``hfun(u1, u2, par)`` (value only),
* ``hinv(w, u2, par)`` where a closed form exists, ``None`` otherwise,
* ``bundles(u1, u2, par)`` returning the second-order :class:`PairBundle`
  triple ``(L, H, V)``: the log-density, ``h(u1|u2)`` and ``h(u2|u1)``,
  each differentiated in the variables ``(u1, u2, par_1, ..., par_p)``.

Derivatives are analytic. Student-t derivatives in the degrees of freedom
use a five-point stencil at fixed ``u``.
"""
# Standard library imports
from dataclasses import dataclass

# Third-party imports
import numpy as np
from scipy import special
from scipy.stats import multivariate_normal, multivariate_t

# Local imports
from constants import NU_STENCIL_REL_STEP

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class PairBundle:
    """Value, gradient ``(q, n)`` and Hessian ``(q, q, n)`` of a pair function.

    Variable order is ``(u1, u2, par_1, ..., par_p)``.
    """
    val: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    @property
    def n_var(self):
        return self.grad.shape[0]

    def swap(self):
        perm = [1, 0] + list(range(2, self.n_var))
        return PairBundle(self.val, self.grad[perm], self.hess[perm][:, perm])

    def reflect_second(self):
        """Bundle of ``g(u1, u2) = f(u1, 1 - u2)`` given ``f`` evaluated at ``(u1, 1 - u2)``."""
        sign = np.ones(self.n_var)
        sign[1] = -1.0
        return PairBundle(
            self.val,
            self.grad * sign[:, None],
            self.hess * sign[:, None, None] * sign[None, :, None],
        )

    def complement(self):
        return PairBundle(1.0 - self.val, -self.grad, -self.hess)

    def exp(self):
        value = np.exp(self.val)
        return PairBundle(
            value,
            value * self.grad,
            value * (self.hess + self.grad[:, None, :] * self.grad[None, :, :]),
        )


def _empty(q, n):
    return np.zeros((q, n)), np.zeros((q, q, n))


def _to_unit_scale(grad, hess, dx, d2x):
    """Chain a bundle in latent scores ``x_i(u_i)`` back to ``(u1, u2, par)``.

    ``dx`` and ``d2x`` are ``(2, n)`` arrays of ``x_i'(u_i)`` and ``x_i''(u_i)``.
    """
    g = grad.copy()
    h = hess.copy()
    g[:2] *= dx
    h[:2, :2] *= dx[:, None, :] * dx[None, :, :]
    h[0, 0] += grad[0] * d2x[0]
    h[1, 1] += grad[1] * d2x[1]
    h[:2, 2:] *= dx[:, None, :]
    h[2:, :2] *= dx[None, :, :]
    return g, h


def _compose(g_inner, h_inner, f_a, f_aa, f_at, f_t, f_tt, t):
    """Gradient/Hessian of ``f(A(v), theta)`` where ``theta`` is variable ``t``."""
    g = f_a * g_inner
    g[t] += f_t
    h = f_a * h_inner + f_aa * g_inner[:, None, :] * g_inner[None, :, :]
    h[t, :] += f_at * g_inner
    h[:, t] += f_at * g_inner
    h[t, t] += f_tt
    return g, h


def _add_log(g, h, g_q, h_q, q):
    g += g_q / q
    h += h_q / q - g_q[:, None, :] * g_q[None, :, :] / q ** 2


# ---------------------------------------------------------------------------
# Independence
# ---------------------------------------------------------------------------

class Independence:
    n_par = 0

    @staticmethod
    def log_pdf(u1, u2, par):
        return np.zeros(np.broadcast(u1, u2).shape)

    @staticmethod
    def hfun(u1, u2, par):
        return np.broadcast_to(np.asarray(u1, dtype=float), np.broadcast(u1, u2).shape).copy()

    @staticmethod
    def hinv(w, u2, par):
        return np.broadcast_to(np.asarray(w, dtype=float), np.broadcast(w, u2).shape).copy()

    @staticmethod
    def cdf(u1, u2, par):
        return u1 * u2

    @staticmethod
    def bundles(u1, u2, par):
        n = len(u1)
        g, h = _empty(2, n)
        log_density = PairBundle(np.zeros(n), g, h)
        g, h = _empty(2, n)
        g[0] = 1.0
        h_first = PairBundle(u1.copy(), g, h)
        g, h = _empty(2, n)
        g[1] = 1.0
        h_second = PairBundle(u2.copy(), g, h)
        return log_density, h_first, h_second


# ---------------------------------------------------------------------------
# Gaussian
# ---------------------------------------------------------------------------

def _normal_scores(u):
    x = special.ndtri(u)
    dx = np.exp(0.5 * x ** 2 + _LOG_SQRT_2PI)
    return x, dx, x * dx ** 2


class Gaussian:
    n_par = 1

    @staticmethod
    def log_pdf(u1, u2, par):
        rho = par[0]
        x1, x2 = special.ndtri(u1), special.ndtri(u2)
        dd = 1.0 - rho ** 2
        return -0.5 * np.log(dd) - (rho ** 2 * (x1 ** 2 + x2 ** 2) - 2.0 * rho * x1 * x2) / (2.0 * dd)

    @staticmethod
    def hfun(u1, u2, par):
        rho = par[0]
        x1, x2 = special.ndtri(u1), special.ndtri(u2)
        return special.ndtr((x1 - rho * x2) / np.sqrt(1.0 - rho ** 2))

    @staticmethod
    def hinv(w, u2, par):
        rho = par[0]
        x2 = special.ndtri(u2)
        return special.ndtr(special.ndtri(w) * np.sqrt(1.0 - rho ** 2) + rho * x2)

    @staticmethod
    def cdf(u1, u2, par):
        rho = par[0]
        z = np.column_stack([special.ndtri(u1), special.ndtri(u2)])
        return np.atleast_1d(multivariate_normal(mean=[0.0, 0.0], cov=[[1.0, rho], [rho, 1.0]]).cdf(z))

    @staticmethod
    def _hfun_latent(xa, xb, rho):
        dd = 1.0 - rho ** 2
        sd = np.sqrt(dd)
        w = (xa - rho * xb) / sd
        n = len(xa)
        gw, hw = _empty(3, n)
        gw[0] = 1.0 / sd
        gw[1] = -rho / sd
        gw[2] = (rho * xa - xb) / dd ** 1.5
        hw[0, 2] = hw[2, 0] = rho / dd ** 1.5
        hw[1, 2] = hw[2, 1] = -1.0 / dd ** 1.5
        hw[2, 2] = xa / dd ** 1.5 + 3.0 * rho * (rho * xa - xb) / dd ** 2.5
        dens = np.exp(-0.5 * w ** 2 - _LOG_SQRT_2PI)
        g = dens * gw
        h = dens * (hw - w * gw[:, None, :] * gw[None, :, :])
        return special.ndtr(w), g, h

    @classmethod
    def bundles(cls, u1, u2, par):
        rho = par[0]
        x1, dx1, d2x1 = _normal_scores(u1)
        x2, dx2, d2x2 = _normal_scores(u2)
        dx = np.vstack([dx1, dx2])
        d2x = np.vstack([d2x1, d2x2])
        n = len(u1)
        dd = 1.0 - rho ** 2
        q = x1 ** 2 + x2 ** 2
        r = x1 * x2

        val = -0.5 * np.log(dd) - (rho ** 2 * q - 2.0 * rho * r) / (2.0 * dd)
        p_num = rho * dd + r * (1.0 + rho ** 2) - rho * q
        p_der = 1.0 - 3.0 * rho ** 2 + 2.0 * rho * r - q
        g, h = _empty(3, n)
        g[0] = (rho * x2 - rho ** 2 * x1) / dd
        g[1] = (rho * x1 - rho ** 2 * x2) / dd
        g[2] = p_num / dd ** 2
        h[0, 0] = h[1, 1] = -rho ** 2 / dd
        h[0, 1] = h[1, 0] = rho / dd
        h[0, 2] = h[2, 0] = ((1.0 + rho ** 2) * x2 - 2.0 * rho * x1) / dd ** 2
        h[1, 2] = h[2, 1] = ((1.0 + rho ** 2) * x1 - 2.0 * rho * x2) / dd ** 2
        h[2, 2] = (p_der * dd + 4.0 * rho * p_num) / dd ** 3
        g, h = _to_unit_scale(g, h, dx, d2x)
        log_density = PairBundle(val, g, h)

        hv, g, h = cls._hfun_latent(x1, x2, rho)
        g, h = _to_unit_scale(g, h, dx, d2x)
        h_first = PairBundle(hv, g, h)

        hv, g, h = cls._hfun_latent(x2, x1, rho)
        g, h = _to_unit_scale(g, h, dx[::-1], d2x[::-1])
        h_second = PairBundle(hv, g, h).swap()
        return log_density, h_first, h_second


# ---------------------------------------------------------------------------
# Student-t
# ---------------------------------------------------------------------------

def _t_logpdf(x, nu):
    return (special.gammaln(0.5 * (nu + 1.0)) - special.gammaln(0.5 * nu)
            - 0.5 * np.log(nu * np.pi) - 0.5 * (nu + 1.0) * np.log1p(x ** 2 / nu))


def _t_quantile(u, nu):
    """Student-t quantile polished with two Newton steps on the CDF."""
    lower = np.minimum(u, 1.0 - u)
    x = special.stdtrit(nu, lower)
    for _ in range(2):
        dens = np.exp(_t_logpdf(x, nu))
        x = x - (special.stdtr(nu, x) - lower) / dens
    return np.where(u > 0.5, -x, x)


class StudentT:
    n_par = 2

    @staticmethod
    def _log_pdf_latent(x1, x2, rho, nu):
        dd = 1.0 - rho ** 2
        ss = nu * dd + x1 ** 2 + x2 ** 2 - 2.0 * rho * x1 * x2
        const = (special.gammaln(0.5 * (nu + 2.0)) + special.gammaln(0.5 * nu)
                 - 2.0 * special.gammaln(0.5 * (nu + 1.0)) + 0.5 * (nu + 2.0) * np.log(nu))
        return (const + 0.5 * (nu + 1.0) * np.log(dd) - 0.5 * (nu + 2.0) * np.log(ss)
                + 0.5 * (nu + 1.0) * (np.log1p(x1 ** 2 / nu) + np.log1p(x2 ** 2 / nu)))

    @classmethod
    def log_pdf(cls, u1, u2, par):
        rho, nu = par
        return cls._log_pdf_latent(_t_quantile(u1, nu), _t_quantile(u2, nu), rho, nu)

    @staticmethod
    def hfun(u1, u2, par):
        rho, nu = par
        x1, x2 = _t_quantile(u1, nu), _t_quantile(u2, nu)
        scale = np.sqrt((nu + x2 ** 2) * (1.0 - rho ** 2) / (nu + 1.0))
        return special.stdtr(nu + 1.0, (x1 - rho * x2) / scale)

    @staticmethod
    def hinv(w, u2, par):
        rho, nu = par
        x2 = _t_quantile(u2, nu)
        scale = np.sqrt((nu + x2 ** 2) * (1.0 - rho ** 2) / (nu + 1.0))
        x1 = _t_quantile(w, nu + 1.0) * scale + rho * x2
        return special.stdtr(nu, x1)

    @staticmethod
    def cdf(u1, u2, par):
        rho, nu = par
        z = np.column_stack([_t_quantile(u1, nu), _t_quantile(u2, nu)])
        dist = multivariate_t(loc=[0.0, 0.0], shape=[[1.0, rho], [rho, 1.0]], df=nu)
        return np.atleast_1d(dist.cdf(z))

    @staticmethod
    def _hfun_latent(xa, xb, rho, nu):
        dd = 1.0 - rho ** 2
        sd = np.sqrt(dd)
        kk = np.sqrt((nu + 1.0) / (nu + xb ** 2))
        tail = xb / (nu + xb ** 2)
        w = kk * (xa - rho * xb) / sd
        n = len(xa)
        gw, hw = _empty(3, n)
        gw[0] = kk / sd
        gw[1] = -rho * kk / sd - w * tail
        gw[2] = kk * (rho * xa - xb) / dd ** 1.5
        hw[0, 1] = hw[1, 0] = -kk * tail / sd
        hw[0, 2] = hw[2, 0] = kk * rho / dd ** 1.5
        hw[1, 1] = (rho * kk * tail / sd - gw[1] * tail
                    - w * (nu - xb ** 2) / (nu + xb ** 2) ** 2)
        hw[1, 2] = hw[2, 1] = -kk / dd ** 1.5 - gw[2] * tail
        hw[2, 2] = kk * (xa / dd ** 1.5 + 3.0 * rho * (rho * xa - xb) / dd ** 2.5)
        dens = np.exp(_t_logpdf(w, nu + 1.0))
        ratio = -(nu + 2.0) * w / (nu + 1.0 + w ** 2)
        g = dens * gw
        h = dens * (hw + ratio * gw[:, None, :] * gw[None, :, :])
        return special.stdtr(nu + 1.0, w), g, h

    @classmethod
    def _fixed_nu(cls, u1, u2, rho, nu):
        x1, x2 = _t_quantile(u1, nu), _t_quantile(u2, nu)
        dx1 = np.exp(-_t_logpdf(x1, nu))
        dx2 = np.exp(-_t_logpdf(x2, nu))
        dx = np.vstack([dx1, dx2])
        d2x = np.vstack([(nu + 1.0) * x1 / (nu + x1 ** 2) * dx1 ** 2,
                         (nu + 1.0) * x2 / (nu + x2 ** 2) * dx2 ** 2])
        n = len(u1)
        dd = 1.0 - rho ** 2
        ss = nu * dd + x1 ** 2 + x2 ** 2 - 2.0 * rho * x1 * x2

        val = cls._log_pdf_latent(x1, x2, rho, nu)
        g_s, h_s = _empty(3, n)
        g_s[0] = 2.0 * (x1 - rho * x2)
        g_s[1] = 2.0 * (x2 - rho * x1)
        g_s[2] = -2.0 * (nu * rho + x1 * x2)
        h_s[0, 0] = h_s[1, 1] = 2.0
        h_s[0, 1] = h_s[1, 0] = -2.0 * rho
        h_s[0, 2] = h_s[2, 0] = -2.0 * x2
        h_s[1, 2] = h_s[2, 1] = -2.0 * x1
        h_s[2, 2] = -2.0 * nu
        coef = -0.5 * (nu + 2.0)
        g = coef * g_s / ss
        h = coef * (h_s / ss - g_s[:, None, :] * g_s[None, :, :] / ss ** 2)
        for j, xj in enumerate((x1, x2)):
            g[j] += (nu + 1.0) * xj / (nu + xj ** 2)
            h[j, j] += (nu + 1.0) * (nu - xj ** 2) / (nu + xj ** 2) ** 2
        g[2] += -(nu + 1.0) * rho / dd
        h[2, 2] += -(nu + 1.0) * (1.0 + rho ** 2) / dd ** 2
        g, h = _to_unit_scale(g, h, dx, d2x)
        log_density = PairBundle(val, g, h)

        hv, g, h = cls._hfun_latent(x1, x2, rho, nu)
        g, h = _to_unit_scale(g, h, dx, d2x)
        h_first = PairBundle(hv, g, h)

        hv, g, h = cls._hfun_latent(x2, x1, rho, nu)
        g, h = _to_unit_scale(g, h, dx[::-1], d2x[::-1])
        h_second = PairBundle(hv, g, h).swap()
        return log_density, h_first, h_second

    @classmethod
    def bundles(cls, u1, u2, par):
        rho, nu = par
        step = min(NU_STENCIL_REL_STEP * nu, (nu - 2.0) / 3.0)
        center = cls._fixed_nu(u1, u2, rho, nu)
        shifted = {j: cls._fixed_nu(u1, u2, rho, nu + j * step) for j in (-2, -1, 1, 2)}
        n = len(u1)
        out = []
        for b, mid in enumerate(center):
            pts = {j: shifted[j][b] for j in shifted}
            first_val = (pts[-2].val - 8.0 * pts[-1].val + 8.0 * pts[1].val - pts[2].val) / (12.0 * step)
            second_val = (-pts[-2].val + 16.0 * pts[-1].val - 30.0 * mid.val
                          + 16.0 * pts[1].val - pts[2].val) / (12.0 * step ** 2)
            first_grad = (pts[-2].grad - 8.0 * pts[-1].grad + 8.0 * pts[1].grad - pts[2].grad) / (12.0 * step)
            g, h = _empty(4, n)
            g[:3] = mid.grad
            g[3] = first_val
            h[:3, :3] = mid.hess
            h[3, :3] = first_grad
            h[:3, 3] = first_grad
            h[3, 3] = second_val
            out.append(PairBundle(mid.val, g, h))
        return tuple(out)


# ---------------------------------------------------------------------------
# Frank
# ---------------------------------------------------------------------------

class Frank:
    n_par = 1

    @staticmethod
    def _parts(u1, u2, theta):
        a = np.exp(-theta * u1)
        b = np.exp(-theta * u2)
        big_a = -np.expm1(-theta * u1)
        big_b = -np.expm1(-theta * u2)
        big_e = -np.expm1(-theta)
        return a, b, big_a, big_b, big_e

    @classmethod
    def log_pdf(cls, u1, u2, par):
        theta = par[0]
        a, b, big_a, big_b, big_e = cls._parts(u1, u2, theta)
        base = big_e - big_a * big_b
        return np.log(theta * big_e) - theta * (u1 + u2) - 2.0 * np.log(np.abs(base))

    @classmethod
    def hfun(cls, u1, u2, par):
        theta = par[0]
        a, b, big_a, big_b, big_e = cls._parts(u1, u2, theta)
        return b * big_a / (big_e - big_a * big_b)

    @staticmethod
    def hinv(w, u2, par):
        theta = par[0]
        b = np.exp(-theta * u2)
        big_e = -np.expm1(-theta)
        return -np.log1p(-w * big_e / (b + w * (1.0 - b))) / theta

    @classmethod
    def cdf(cls, u1, u2, par):
        theta = par[0]
        a, b, big_a, big_b, big_e = cls._parts(u1, u2, theta)
        return -np.log1p(-big_a * big_b / big_e) / theta

    @classmethod
    def bundles(cls, u1, u2, par):
        theta = par[0]
        a, b, big_a, big_b, big_e = cls._parts(u1, u2, theta)
        n = len(u1)
        e_t = np.exp(-theta)

        # base = E - A B
        base = big_e - big_a * big_b
        g_b, h_b = _empty(3, n)
        g_b[0] = -theta * a * big_b
        g_b[1] = -theta * b * big_a
        g_b[2] = e_t - (u1 * a * big_b + u2 * b * big_a)
        h_b[0, 0] = theta ** 2 * a * big_b
        h_b[1, 1] = theta ** 2 * b * big_a
        h_b[0, 1] = h_b[1, 0] = -theta ** 2 * a * b
        h_b[0, 2] = h_b[2, 0] = -a * big_b + theta * u1 * a * big_b - theta * u2 * a * b
        h_b[1, 2] = h_b[2, 1] = -b * big_a + theta * u2 * b * big_a - theta * u1 * a * b
        h_b[2, 2] = -e_t - (-u1 ** 2 * a * big_b + 2.0 * u1 * u2 * a * b - u2 ** 2 * b * big_a)

        val = np.log(theta * big_e) - theta * (u1 + u2) - 2.0 * np.log(np.abs(base))
        g = -2.0 * g_b / base
        h = -2.0 * (h_b / base - g_b[:, None, :] * g_b[None, :, :] / base ** 2)
        g[0] -= theta
        g[1] -= theta
        g[2] += 1.0 / theta + e_t / big_e - (u1 + u2)
        h[0, 2] -= 1.0
        h[2, 0] -= 1.0
        h[1, 2] -= 1.0
        h[2, 1] -= 1.0
        h[2, 2] += -1.0 / theta ** 2 - e_t / big_e ** 2
        log_density = PairBundle(val, g, h)

        h_first = cls._quotient(u1, u2, theta, a, b, big_a, base, g_b, h_b)
        # the copula is exchangeable: h(u2|u1) is h evaluated with swapped arguments
        a2, b2, big_a2, big_b2, _ = cls._parts(u2, u1, theta)
        base2 = big_e - big_a2 * big_b2
        g_b2 = g_b[[1, 0, 2]]
        h_b2 = h_b[[1, 0, 2]][:, [1, 0, 2]]
        h_second = cls._quotient(u2, u1, theta, a2, b2, big_a2, base2, g_b2, h_b2).swap()
        return log_density, h_first, h_second

    @staticmethod
    def _quotient(u1, u2, theta, a, b, big_a, base, g_b, h_b):
        n = len(u1)
        num = b * big_a
        g_n, h_n = _empty(3, n)
        g_n[0] = theta * a * b
        g_n[1] = -theta * b * big_a
        g_n[2] = b * (u1 * a - u2 * big_a)
        h_n[0, 0] = -theta ** 2 * a * b
        h_n[0, 1] = h_n[1, 0] = -theta ** 2 * a * b
        h_n[1, 1] = theta ** 2 * b * big_a
        h_n[0, 2] = h_n[2, 0] = a * b * (1.0 - theta * u1 - theta * u2)
        h_n[1, 2] = h_n[2, 1] = b * (-big_a + theta * u2 * big_a - theta * u1 * a)
        h_n[2, 2] = b * (-2.0 * u1 * u2 * a + u2 ** 2 * big_a - u1 ** 2 * a)
        val = num / base
        g = (g_n - val * g_b) / base
        h = (h_n - val * h_b - g[:, None, :] * g_b[None, :, :] - g_b[:, None, :] * g[None, :, :]) / base
        return PairBundle(val, g, h)


# ---------------------------------------------------------------------------
# Gumbel
# ---------------------------------------------------------------------------

def _power_sum(t1, t2, theta, lt1, lt2):
    # A = t1^theta + t2^theta, derivatives in (t1, t2, theta)
    n = len(t1)
    p1, p2 = t1 ** theta, t2 ** theta
    g, h = _empty(3, n)
    g[0] = theta * t1 ** (theta - 1.0)
    g[1] = theta * t2 ** (theta - 1.0)
    g[2] = p1 * lt1 + p2 * lt2
    h[0, 0] = theta * (theta - 1.0) * t1 ** (theta - 2.0)
    h[1, 1] = theta * (theta - 1.0) * t2 ** (theta - 2.0)
    h[0, 2] = h[2, 0] = t1 ** (theta - 1.0) * (1.0 + theta * lt1)
    h[1, 2] = h[2, 1] = t2 ** (theta - 1.0) * (1.0 + theta * lt2)
    h[2, 2] = p1 * lt1 ** 2 + p2 * lt2 ** 2
    return p1 + p2, g, h


class Gumbel:
    n_par = 1

    @staticmethod
    def _log_pdf_latent(t1, t2, theta):
        la = np.log(t1 ** theta + t2 ** theta)
        m = np.exp(la / theta)
        return (-m + (1.0 / theta - 2.0) * la + np.log(m + theta - 1.0)
                + t1 + t2 + (theta - 1.0) * (np.log(t1) + np.log(t2)))

    @classmethod
    def log_pdf(cls, u1, u2, par):
        return cls._log_pdf_latent(-np.log(u1), -np.log(u2), par[0])

    @staticmethod
    def _log_h_latent(t1, t2, theta):
        la = np.log(t1 ** theta + t2 ** theta)
        return -np.exp(la / theta) + (1.0 / theta - 1.0) * la + t2 + (theta - 1.0) * np.log(t2)

    @classmethod
    def hfun(cls, u1, u2, par):
        return np.exp(cls._log_h_latent(-np.log(u1), -np.log(u2), par[0]))

    hinv = None

    @staticmethod
    def cdf(u1, u2, par):
        theta = par[0]
        return np.exp(-((-np.log(u1)) ** theta + (-np.log(u2)) ** theta) ** (1.0 / theta))

    @staticmethod
    def _root_terms(big_a, theta):
        # m = A^(1/theta)
        la = np.log(big_a)
        m = np.exp(la / theta)
        m_a = m / (theta * big_a)
        m_t = -m * la / theta ** 2
        m_aa = m * (1.0 - theta) / (theta ** 2 * big_a ** 2)
        m_at = -m * la / (theta ** 3 * big_a) - m / (theta ** 2 * big_a)
        m_tt = m * la ** 2 / theta ** 4 + 2.0 * m * la / theta ** 3
        return la, m, m_a, m_t, m_aa, m_at, m_tt

    @classmethod
    def _log_h_bundle(cls, t1, t2, theta, lt1, lt2, big_a, g_a, h_a):
        la, m, m_a, m_t, m_aa, m_at, m_tt = cls._root_terms(big_a, theta)
        k = 1.0 / theta - 1.0
        g, h = _compose(
            g_a, h_a,
            f_a=-m_a + k / big_a,
            f_aa=-m_aa - k / big_a ** 2,
            f_at=-m_at - 1.0 / (theta ** 2 * big_a),
            f_t=-m_t - la / theta ** 2,
            f_tt=-m_tt + 2.0 * la / theta ** 3,
            t=2,
        )
        val = -m + k * la + t2 + (theta - 1.0) * lt2
        g[1] += 1.0 + (theta - 1.0) / t2
        g[2] += lt2
        h[1, 1] -= (theta - 1.0) / t2 ** 2
        h[1, 2] += 1.0 / t2
        h[2, 1] += 1.0 / t2
        return val, g, h

    @classmethod
    def bundles(cls, u1, u2, par):
        theta = par[0]
        t1, t2 = -np.log(u1), -np.log(u2)
        lt1, lt2 = np.log(t1), np.log(t2)
        dx = np.vstack([-1.0 / u1, -1.0 / u2])
        d2x = np.vstack([1.0 / u1 ** 2, 1.0 / u2 ** 2])
        big_a, g_a, h_a = _power_sum(t1, t2, theta, lt1, lt2)
        la, m, m_a, m_t, m_aa, m_at, m_tt = cls._root_terms(big_a, theta)

        s = m + theta - 1.0
        k = 1.0 / theta - 2.0
        g, h = _compose(
            g_a, h_a,
            f_a=-m_a + k / big_a + m_a / s,
            f_aa=-m_aa - k / big_a ** 2 + m_aa / s - m_a ** 2 / s ** 2,
            f_at=-m_at - 1.0 / (theta ** 2 * big_a) + m_at / s - m_a * (m_t + 1.0) / s ** 2,
            f_t=-m_t - la / theta ** 2 + (m_t + 1.0) / s,
            f_tt=-m_tt + 2.0 * la / theta ** 3 + m_tt / s - (m_t + 1.0) ** 2 / s ** 2,
            t=2,
        )
        val = -m + k * la + np.log(s) + t1 + t2 + (theta - 1.0) * (lt1 + lt2)
        for j, (tj, ltj) in enumerate(((t1, lt1), (t2, lt2))):
            g[j] += 1.0 + (theta - 1.0) / tj
            g[2] += ltj
            h[j, j] -= (theta - 1.0) / tj ** 2
            h[j, 2] += 1.0 / tj
            h[2, j] += 1.0 / tj
        g, h = _to_unit_scale(g, h, dx, d2x)
        log_density = PairBundle(val, g, h)

        val, g, h = cls._log_h_bundle(t1, t2, theta, lt1, lt2, big_a, g_a, h_a)
        g, h = _to_unit_scale(g, h, dx, d2x)
        h_first = PairBundle(val, g, h).exp()

        perm = [1, 0, 2]
        val, g, h = cls._log_h_bundle(t2, t1, theta, lt2, lt1, big_a, g_a[perm], h_a[perm][:, perm])
        g, h = _to_unit_scale(g, h, dx[::-1], d2x[::-1])
        h_second = PairBundle(val, g, h).exp().swap()
        return log_density, h_first, h_second


# ---------------------------------------------------------------------------
# Joe
# ---------------------------------------------------------------------------

def _joe_sum(s1, s2, theta, ls1, ls2):
    # A = S1 + S2 - S1 S2, S_j = s_j^theta
    n = len(s1)
    p1, p2 = np.exp(theta * ls1), np.exp(theta * ls2)
    q1, q2 = s1 ** (theta - 1.0), s2 ** (theta - 1.0)
    g, h = _empty(3, n)
    g[0] = theta * q1 * (1.0 - p2)
    g[1] = theta * q2 * (1.0 - p1)
    g[2] = p1 * ls1 * (1.0 - p2) + p2 * ls2 * (1.0 - p1)
    h[0, 0] = theta * (theta - 1.0) * s1 ** (theta - 2.0) * (1.0 - p2)
    h[1, 1] = theta * (theta - 1.0) * s2 ** (theta - 2.0) * (1.0 - p1)
    h[0, 1] = h[1, 0] = -theta ** 2 * q1 * q2
    h[0, 2] = h[2, 0] = q1 * (1.0 + theta * ls1) * (1.0 - p2) - theta * q1 * p2 * ls2
    h[1, 2] = h[2, 1] = q2 * (1.0 + theta * ls2) * (1.0 - p1) - theta * q2 * p1 * ls1
    h[2, 2] = (p1 * ls1 ** 2 * (1.0 - p2) + p2 * ls2 ** 2 * (1.0 - p1)
               - 2.0 * p1 * p2 * ls1 * ls2)
    return p1 + p2 - p1 * p2, g, h


class Joe:
    n_par = 1

    @staticmethod
    def log_pdf(u1, u2, par):
        theta = par[0]
        ls1, ls2 = np.log1p(-u1), np.log1p(-u2)
        p1, p2 = np.exp(theta * ls1), np.exp(theta * ls2)
        big_a = p1 + p2 - p1 * p2
        return ((1.0 / theta - 2.0) * np.log(big_a) + (theta - 1.0) * (ls1 + ls2)
                + np.log(theta - 1.0 + big_a))

    @staticmethod
    def hfun(u1, u2, par):
        theta = par[0]
        ls1, ls2 = np.log1p(-u1), np.log1p(-u2)
        p1, p2 = np.exp(theta * ls1), np.exp(theta * ls2)
        big_a = p1 + p2 - p1 * p2
        return np.exp((1.0 / theta - 1.0) * np.log(big_a) + (theta - 1.0) * ls2
                      + np.log(-np.expm1(theta * ls1)))

    hinv = None

    @staticmethod
    def cdf(u1, u2, par):
        theta = par[0]
        p1, p2 = (1.0 - u1) ** theta, (1.0 - u2) ** theta
        return 1.0 - (p1 + p2 - p1 * p2) ** (1.0 / theta)

    @staticmethod
    def _log_h_bundle(s1, s2, theta, ls1, ls2, big_a, g_a, h_a):
        la = np.log(big_a)
        k = 1.0 / theta - 1.0
        g, h = _compose(
            g_a, h_a,
            f_a=k / big_a,
            f_aa=-k / big_a ** 2,
            f_at=-1.0 / (theta ** 2 * big_a),
            f_t=-la / theta ** 2,
            f_tt=2.0 * la / theta ** 3,
            t=2,
        )
        q = -np.expm1(theta * ls1)
        val = k * la + (theta - 1.0) * ls2 + np.log(q)
        g[1] += (theta - 1.0) / s2
        g[2] += ls2
        h[1, 1] -= (theta - 1.0) / s2 ** 2
        h[1, 2] += 1.0 / s2
        h[2, 1] += 1.0 / s2
        n = len(s1)
        g_q, h_q = _empty(3, n)
        q1 = s1 ** (theta - 1.0)
        g_q[0] = -theta * q1
        g_q[2] = -np.exp(theta * ls1) * ls1
        h_q[0, 0] = -theta * (theta - 1.0) * s1 ** (theta - 2.0)
        h_q[0, 2] = h_q[2, 0] = -q1 * (1.0 + theta * ls1)
        h_q[2, 2] = -np.exp(theta * ls1) * ls1 ** 2
        _add_log(g, h, g_q, h_q, q)
        return val, g, h

    @classmethod
    def bundles(cls, u1, u2, par):
        theta = par[0]
        s1, s2 = 1.0 - u1, 1.0 - u2
        ls1, ls2 = np.log1p(-u1), np.log1p(-u2)
        n = len(u1)
        dx = -np.ones((2, n))
        d2x = np.zeros((2, n))
        big_a, g_a, h_a = _joe_sum(s1, s2, theta, ls1, ls2)
        la = np.log(big_a)

        r = theta - 1.0 + big_a
        k = 1.0 / theta - 2.0
        g, h = _compose(
            g_a, h_a,
            f_a=k / big_a + 1.0 / r,
            f_aa=-k / big_a ** 2 - 1.0 / r ** 2,
            f_at=-1.0 / (theta ** 2 * big_a) - 1.0 / r ** 2,
            f_t=-la / theta ** 2 + 1.0 / r,
            f_tt=2.0 * la / theta ** 3 - 1.0 / r ** 2,
            t=2,
        )
        val = k * la + (theta - 1.0) * (ls1 + ls2) + np.log(r)
        for j, (sj, lsj) in enumerate(((s1, ls1), (s2, ls2))):
            g[j] += (theta - 1.0) / sj
            g[2] += lsj
            h[j, j] -= (theta - 1.0) / sj ** 2
            h[j, 2] += 1.0 / sj
            h[2, j] += 1.0 / sj
        g, h = _to_unit_scale(g, h, dx, d2x)
        log_density = PairBundle(val, g, h)

        val, g, h = cls._log_h_bundle(s1, s2, theta, ls1, ls2, big_a, g_a, h_a)
        g, h = _to_unit_scale(g, h, dx, d2x)
        h_first = PairBundle(val, g, h).exp()

        perm = [1, 0, 2]
        val, g, h = cls._log_h_bundle(s2, s1, theta, ls2, ls1, big_a, g_a[perm], h_a[perm][:, perm])
        g, h = _to_unit_scale(g, h, dx, d2x)
        h_second = PairBundle(val, g, h).exp().swap()
        return log_density, h_first, h_second


FAMILIES = {
    0: Independence,
    1: Gaussian,
    2: StudentT,
    3: Frank,
    4: Gumbel,
    5: Joe,
}
