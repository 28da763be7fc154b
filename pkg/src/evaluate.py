"""Log-likelihood of an R-vine on copula data and sampling from it.

All work is vectorized over observations: a workspace stores, per matrix
position, one array of length ``n``.
"""
# Standard library imports
from dataclasses import dataclass, field

# Third-party imports
import numpy as np

# Local imports
from src.bicop import FamilyCode, clamp
from src.dataset import CopulaDataset
from src.errors import EvalError, StructureError
from src.structure import second_argument


@dataclass
class EvalWorkspace:
    """``vdirect``, ``vindirect`` and ``vvalues`` for ``n`` observations.

    Arrays are ``(d + 2, d + 2, n)`` with 1-based matrix indices. ``vvalues``
    holds log pair densities; ``args[(k, i)]`` keeps the ``(z1, z2)`` pair
    each copula term was evaluated at and ``bundles`` caches their derivative
    bundles once computed.
    """
    vdirect: np.ndarray
    vindirect: np.ndarray
    vvalues: np.ndarray
    args: dict = field(default_factory=dict)
    bundles: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.vdirect.shape[2]

    def loglik_rows(self):
        return self.vvalues.sum(axis=(0, 1))


def _as_matrix(spec, data):
    if isinstance(data, CopulaDataset):
        data = data.values
    u = np.atleast_2d(np.asarray(data, dtype=float))
    if u.size == 0:
        return u.reshape(0, spec.d)
    if u.shape[1] != spec.d:
        raise EvalError(f"observations have {u.shape[1]} components, spec has dimension {spec.d}")
    return clamp(u)


def _require_normalized(spec):
    if not spec.is_normalized():
        raise StructureError("spec must be normalized (diagonal d, ..., 1); call normalize() first")


def second_arg(spec, ws, k, i):
    j, direct = second_argument(spec.structure, spec.mtil, k, i)
    return (ws.vdirect if direct else ws.vindirect)[k, j]


def evaluate(spec, data) -> EvalWorkspace:
    """Run the direct/indirect recursion over all rows of ``data``."""
    _require_normalized(spec)
    u = _as_matrix(spec, data)
    d, n = spec.d, u.shape[0]
    vdirect = np.zeros((d + 2, d + 2, n))
    vindirect = np.zeros((d + 2, d + 2, n))
    vvalues = np.zeros((d + 2, d + 2, n))
    ws = EvalWorkspace(vdirect, vindirect, vvalues)
    # row d holds (u_d, ..., u_1)
    for i in range(1, d + 1):
        vdirect[d, i] = u[:, d - i]
    for i in range(d - 1, 0, -1):
        for k in range(d, i, -1):
            z1 = vdirect[k, i]
            z2 = second_arg(spec, ws, k, i)
            ws.args[(k, i)] = (z1, z2)
            if spec.family(k, i).code == FamilyCode.INDEPENDENCE:
                vdirect[k - 1, i] = z1
                vindirect[k - 1, i] = z2
                continue
            cop = spec.bicop(k, i)
            values = cop.log_pdf(z1, z2)
            bad = ~np.isfinite(values)
            if bad.any():
                raise EvalError(
                    f"pair density of {cop.family.name} at position ({k},{i}) is not positive",
                    row=int(np.argmax(bad)))
            vvalues[k, i] = values
            vdirect[k - 1, i] = cop.h(z1, z2)
            vindirect[k - 1, i] = cop.v(z1, z2)
    return ws


def loglik_obs(spec, u):
    """Log-likelihood of one observation and its workspace."""
    ws = evaluate(spec, np.asarray(u, dtype=float).reshape(1, -1))
    return float(ws.loglik_rows()[0]), ws


def loglik_rows(spec, data):
    return evaluate(spec, data).loglik_rows()


def loglik_dataset(spec, data):
    rows = loglik_rows(spec, data)
    # fixed left-to-right order
    total = 0.0
    for value in rows:
        total += value
    return float(total)


def loglik_trees(spec, data):
    """Per-tree log-likelihoods ``l_1, ..., l_{d-1}``."""
    ws = evaluate(spec, data)
    d = spec.d
    return np.array([ws.vvalues[d - t + 1].sum() for t in range(1, d)])


def aic(loglik, n_par):
    return -2.0 * loglik + 2.0 * n_par


def bic(loglik, n_par, n_obs):
    return -2.0 * loglik + np.log(max(n_obs, 1)) * n_par


def simulate(spec, n, seed=None):
    """Sample ``n`` observations by inverting the Rosenblatt transform along the vine.

    Columns are returned in the spec's variable order (``u_1, ..., u_d``).
    """
    _require_normalized(spec)
    d = spec.d
    rng = np.random.default_rng(seed)
    w = rng.uniform(size=(n, d))
    vdirect = np.zeros((d + 2, d + 2, n))
    vindirect = np.zeros((d + 2, d + 2, n))
    ws = EvalWorkspace(vdirect, vindirect, np.zeros((1, 1, n)))
    vdirect[d, d] = w[:, 0]
    for i in range(d - 1, 0, -1):
        # vdirect[i, i] = F(u_{m_ii} | rest of column i)
        vdirect[i, i] = w[:, d - i]
        for k in range(i + 1, d + 1):
            z2 = second_arg(spec, ws, k, i)
            if spec.family(k, i).code == FamilyCode.INDEPENDENCE:
                vdirect[k, i] = vdirect[k - 1, i]
            else:
                vdirect[k, i] = spec.bicop(k, i).h_inverse(vdirect[k - 1, i], z2)
        for k in range(d, i, -1):
            z1 = vdirect[k, i]
            z2 = second_arg(spec, ws, k, i)
            if spec.family(k, i).code == FamilyCode.INDEPENDENCE:
                vindirect[k - 1, i] = z2
            else:
                vindirect[k - 1, i] = spec.bicop(k, i).v(z1, z2)
    u = np.column_stack([vdirect[d, d - j + 1] for j in range(1, d + 1)])
    return CopulaDataset(u, list(spec.labels))
