"""Unconstrained optimizer coordinates for copula parameters.

rho   -> atanh(rho)        (Gaussian, Student-t)
nu    -> log(nu - 2)       (Student-t, capped at NU_MAX)
theta -> log(theta - 1)    (Gumbel, Joe)
theta -> theta             (Frank)
"""
import numpy as np

from constants import (
    RHO_MAX,
    NU_MIN,
    NU_MAX,
    FRANK_MIN_ABS,
    FRANK_MAX_ABS,
    GUMBEL_MAX,
    JOE_MAX,
    ARCHIMEDEAN_MIN_OFFSET,
)

_FRANK_NUDGE = 10.0 * FRANK_MIN_ABS


def natural_bounds(code, slot):
    """Box used by the optimizer in natural coordinates (slot is 0-based)."""
    if code in (1, 2) and slot == 0:
        return -RHO_MAX, RHO_MAX
    if code == 2:
        return NU_MIN, NU_MAX
    if code == 3:
        return -FRANK_MAX_ABS, FRANK_MAX_ABS
    if code == 4:
        return 1.0 + ARCHIMEDEAN_MIN_OFFSET, GUMBEL_MAX
    if code == 5:
        return 1.0 + ARCHIMEDEAN_MIN_OFFSET, JOE_MAX
    raise ValueError(f"family code {code} has no parameter slot {slot}")


def to_internal(code, slot, value):
    lo, hi = natural_bounds(code, slot)
    value = float(np.clip(value, lo, hi))
    if code in (1, 2) and slot == 0:
        return float(np.arctanh(value))
    if code == 2:
        return float(np.log(value - 2.0))
    if code in (4, 5):
        return float(np.log(value - 1.0))
    return value


def from_internal(code, slot, eta):
    if code in (1, 2) and slot == 0:
        return float(np.tanh(eta))
    if code == 2:
        return float(2.0 + np.exp(eta))
    if code in (4, 5):
        return float(1.0 + np.exp(eta))
    # Frank: keep clear of the independence point
    if abs(eta) < _FRANK_NUDGE:
        return _FRANK_NUDGE if eta >= 0 else -_FRANK_NUDGE
    return float(eta)


def jacobian(code, slot, eta):
    """d(natural)/d(internal) at ``eta``."""
    if code in (1, 2) and slot == 0:
        return float(1.0 - np.tanh(eta) ** 2)
    if code in (2, 4, 5):
        return float(np.exp(eta))
    return 1.0


def internal_bounds(code, slot):
    lo, hi = natural_bounds(code, slot)
    return to_internal(code, slot, lo), to_internal(code, slot, hi)


def near_bound(code, slot, value, dist):
    lo, hi = natural_bounds(code, slot)
    return value - lo < dist or hi - value < dist
