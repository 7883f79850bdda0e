"""Internals of the compact-support extremal radial family.

The family in dimension k is driven by J_nu with nu = sqrt(2k-1)/2: its
unit-scale radial CDF is H(r) = sqrt(r) J_nu(r) / (sqrt(c) J_nu(c)) on
(0, c], where c is the first stationary point of sqrt(x) J_nu(x). Shared
by the radial-family dispatch and the efficiency engine.
"""
import math
from functools import lru_cache

from .errors import DomainError, RangeError
from .specialfn import bessel_j, find_root

_SCAN_STEP = 0.05
_SCAN_MAX = 60.0


def order(k):
    """Bessel order attached to dimension k."""
    return 0.5 * math.sqrt(2.0 * k - 1.0)


def _stationarity(k, x):
    # g(x) = (d/dx)[sqrt(x) J_nu(x)] / sqrt(x), written with orders
    # >= 0 via the derivative identity J_nu' = (nu/x) J_nu - J_{nu+1}
    nu = order(k)
    return ((2.0 * nu + 1.0) / (2.0 * x)) * bessel_j(nu, x) - bessel_j(nu + 1.0, x)


@lru_cache(maxsize=None)
def bessel_critical(k):
    """First positive stationary point c_k of sqrt(x) J_nu(x)."""
    if int(k) != k or k < 1:
        raise DomainError(f"dimension must be an integer >= 1, got {k}")
    x = _SCAN_STEP
    g_prev = _stationarity(k, x)
    while x < _SCAN_MAX:
        x_next = x + _SCAN_STEP
        g_next = _stationarity(k, x_next)
        if g_prev == 0.0:
            return x
        if (g_prev > 0.0) != (g_next > 0.0):
            return find_root(lambda t: _stationarity(k, t), x, x_next, 1e-13)
        x, g_prev = x_next, g_next
    raise RangeError(f"no stationary point found below x={_SCAN_MAX} for k={k}")


def omega(k):
    """Scale at which the unit-uniform-score linear functional equals 1."""
    c = bessel_critical(k)
    return (2.0 * c * c + k - 1.0) / (8.0 * c)


@lru_cache(maxsize=None)
def _norm_const(k):
    c = bessel_critical(k)
    return math.sqrt(c) * bessel_j(order(k), c)


def cdf_unit(k, r):
    """Unit-scale radial CDF H(r); 0 at r <= 0, 1 beyond the cutoff."""
    c = bessel_critical(k)
    if r <= 0.0:
        return 0.0
    if r >= c:
        return 1.0
    return math.sqrt(r) * bessel_j(order(k), r) / _norm_const(k)


def density_unit(k, r):
    """Unit-scale density h(r) = H'(r) / r^(k-1); 0 outside (0, cutoff)."""
    c = bessel_critical(k)
    if r <= 0.0 or r >= c:
        return 0.0
    nu = order(k)
    slope = ((2.0 * nu + 1.0) / (2.0 * r)) * bessel_j(nu, r) - bessel_j(nu + 1.0, r)
    val = math.sqrt(r) * slope / (_norm_const(k) * r ** (k - 1))
    return max(val, 0.0)


def score_unit(k, r):
    """Unit-scale location score -h'(r)/h(r) on the open support."""
    c = bessel_critical(k)
    if not 0.0 < r < c:
        raise DomainError(f"score is defined on (0, {c}), got r={r}")
    nu = order(k)
    j = bessel_j(nu, r)
    slope = ((2.0 * nu + 1.0) / (2.0 * r)) * j - bessel_j(nu + 1.0, r)
    return (k - 1.0) / r + j * (1.0 - (k - 1.0) / (2.0 * r * r)) / slope


def quantile_unit(k, u):
    """Inverse of cdf_unit on (0, 1)."""
    if not 0.0 < u < 1.0:
        raise DomainError(f"quantile requires u in (0, 1), got {u}")
    c = bessel_critical(k)
    hi = c
    lo = 0.5 * c
    # exponential bracket tightening toward 0 for small u
    while cdf_unit(k, lo) > u:
        hi = lo
        lo *= 0.5
        if lo < 1e-280:
            return 0.0
    if cdf_unit(k, lo) == u:
        return lo
    return find_root(lambda r: cdf_unit(k, r) - u, lo, hi, 1e-14)
