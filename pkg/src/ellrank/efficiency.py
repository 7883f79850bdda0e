"""Asymptotic efficiency engine.

Linear and cross score functionals of a radial model, asymptotic
relative efficiencies of the normal-score and linear-score rank tests
against the Gaussian determinant test, the extremal compact-support
family attaining the linear-score lower bound, and the reference grids
over dimensions and tail indices.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from . import _extremal
from .errors import DomainError
import numpy as np

from .radial import Extremal, Gaussian, RadialModel, StudentT, location_score, radial_quantile
from .specialfn import (
    DEFAULT_QUADRATURE,
    Integrand,
    bessel_j,
    chi2_quantile,
    chi2_quantile_upper,
    integrate,
)

_U_CLIP = 1.0 - 2.0**-53
_GL7_NODES, _GL7_WEIGHTS = np.polynomial.legendre.leggauss(7)

__all__ = [
    "GaussScores",
    "UniformScores",
    "CustomScores",
    "AREResult",
    "BoundResult",
    "Lemma1Record",
    "Lemma2Record",
    "c_functional",
    "d_functional",
    "are_vdw",
    "are_wilcoxon",
    "bessel_critical",
    "omega_scale",
    "hl_lower_bound",
    "extremal_radial_cdf",
    "extremal_radial_density",
    "extremal_location_score",
    "verify_lemma1",
    "verify_lemma2",
    "table1",
    "table2",
    "table3",
    "hl_trend",
    "family_for_nu",
    "TABLE_DIMS",
    "TABLE_NUS",
]

TABLE_DIMS = (1, 2, 3, 4, 6, 10)
TABLE_NUS = (3.0, 4.0, 6.0, 12.0, None)


@dataclass(frozen=True)
class GaussScores:
    """Weight w(u) = dimension-k Gaussian radial quantile at u."""


@dataclass(frozen=True)
class UniformScores:
    """Weight w(u) = u."""


@dataclass(frozen=True)
class CustomScores:
    """User-supplied square-integrable weight on (0, 1)."""

    fn: Callable[[float], float]


def _weight(kind, k):
    if isinstance(kind, GaussScores):
        return lambda u: math.sqrt(chi2_quantile(k, u))
    if isinstance(kind, UniformScores):
        return lambda u: u
    if isinstance(kind, CustomScores):
        return kind.fn
    raise DomainError(f"unknown score kind {type(kind).__name__}")


def _weight_from_tail(kind, k):
    # Weight as a function of the upper-tail mass 1 - u, for the region
    # where u itself has no spare precision left in a double.
    if isinstance(kind, GaussScores):
        return lambda tail: math.sqrt(chi2_quantile_upper(k, tail))
    if isinstance(kind, UniformScores):
        return lambda tail: 1.0 - tail
    return None


def _extremal_functional(model, kind, target):
    # Radius-space form: with compact support and closed-form CDF and
    # density, no quantile inversion is needed. In scaled coordinates
    # s = sigma * r the CDF is sqrt(s) J(s) / norm and its derivative
    # is sqrt(s) g(s) / norm with g the stationarity function, so the
    # score-times-density product stays finite at both endpoints.
    k = model.k
    sigma = model.family.sigma
    c = _extremal.bessel_critical(k)
    nu = _extremal.order(k)
    norm = math.sqrt(c) * bessel_j(nu, c)
    w = _weight(kind, k)
    w_tail = _weight_from_tail(kind, k)
    km1 = k - 1.0
    tail_zone = 0.01 * c

    def scaled_density(s):
        j0 = bessel_j(nu, s)
        j1 = bessel_j(nu + 1.0, s)
        g = (2.0 * nu + 1.0) / (2.0 * s) * j0 - j1
        return math.sqrt(s) * g / norm

    def f(s):
        j0 = bessel_j(nu, s)
        j1 = bessel_j(nu + 1.0, s)
        g = (2.0 * nu + 1.0) / (2.0 * s) * j0 - j1
        root_s = math.sqrt(s)
        dens = root_s * g / norm
        if w_tail is not None and c - s < tail_zone:
            # tail mass by a local panel: near the endpoint the CDF is
            # within rounding of 1, but its complement is still exact
            half = 0.5 * (c - s)
            mid = 0.5 * (c + s)
            tail = half * float(
                sum(
                    wt * scaled_density(mid + half * xn)
                    for xn, wt in zip(_GL7_NODES, _GL7_WEIGHTS)
                )
            )
            weight = w_tail(min(max(tail, 2.0**-54), 1.0))
        else:
            weight = w(min(max(root_s * j0 / norm, 0.0), _U_CLIP))
        if target == "d":
            return weight * (s / sigma) * dens
        score_times_dens = km1 / s * dens + j0 * (
            1.0 - km1 / (2.0 * s * s)
        ) * root_s / norm
        return weight * sigma * score_times_dens

    f = Integrand(f, singular_left=True, singular_right=True)
    return integrate(f, 0.0, c, DEFAULT_QUADRATURE)


@lru_cache(maxsize=None)
def _functional(model, kind, target):
    if isinstance(model.family, Extremal):
        return _extremal_functional(model, kind, target)
    w = _weight(kind, model.k)
    if target == "c":
        inner = lambda u: location_score(model, radial_quantile(model, u))
    else:
        inner = lambda u: radial_quantile(model, u)
    f = Integrand(
        lambda u: w(u) * inner(u), singular_left=True, singular_right=True
    )
    return integrate(f, 0.0, 1.0, DEFAULT_QUADRATURE)


def c_functional(model, kind):
    """Cross functional: expectation of w(U) times the location score
    evaluated at the radial quantile of U."""
    return _functional(model, kind, "c")


def d_functional(model, kind):
    """Linear functional: expectation of w(U) times the radial quantile
    of U."""
    return _functional(model, kind, "d")


@dataclass(frozen=True)
class AREResult:
    """Asymptotic relative efficiency with its building blocks.

    ``a_diag`` and ``b_diag`` decompose the numerator so that
    value = (a_diag + b_diag) / normalizer for the method's normalizer;
    b_diag >= 0 measures the scale mismatch between the two marginals.
    """

    p: int
    q: int
    method: str
    value: float
    c_p: float
    d_p: float
    c_q: float
    d_q: float
    a_diag: float
    b_diag: float


def are_vdw(p, f, q, g):
    """Efficiency of the normal-score rank test vs the determinant test."""
    cp = c_functional(RadialModel(p, f), GaussScores())
    dp = d_functional(RadialModel(p, f), GaussScores())
    cq = c_functional(RadialModel(q, g), GaussScores())
    dq = d_functional(RadialModel(q, g), GaussScores())
    value = (dp * cq + dq * cp) ** 2 / (4.0 * p * p * q * q)
    a_diag = 4.0 * dp * cp * dq * cq
    b_diag = (dp * cq - dq * cp) ** 2
    return AREResult(
        p=p, q=q, method="vdw", value=value,
        c_p=cp, d_p=dp, c_q=cq, d_q=dq, a_diag=a_diag, b_diag=b_diag,
    )


def are_wilcoxon(p, f, q, g):
    """Efficiency of the linear-score rank test vs the determinant test."""
    cp = c_functional(RadialModel(p, f), UniformScores())
    dp = d_functional(RadialModel(p, f), UniformScores())
    cq = c_functional(RadialModel(q, g), UniformScores())
    dq = d_functional(RadialModel(q, g), UniformScores())
    value = 9.0 / (4.0 * p * q) * (dp * cq + dq * cp) ** 2
    a_diag = 9.0 / (p * q) * dp * cp * dq * cq
    b_diag = 9.0 / (4.0 * p * q) * (dp * cq - dq * cp) ** 2
    return AREResult(
        p=p, q=q, method="wilcoxon", value=value,
        c_p=cp, d_p=dp, c_q=cq, d_q=dq, a_diag=a_diag, b_diag=b_diag,
    )


def bessel_critical(k):
    """First positive stationary point c_k of sqrt(x) J_nu(x),
    nu = sqrt(2k-1)/2."""
    return _extremal.bessel_critical(k)


def omega_scale(k):
    """The scale omega_k = (2 c_k^2 + k - 1) / (8 c_k)."""
    return _extremal.omega(k)


@dataclass(frozen=True)
class BoundResult:
    """Lower bound for the linear-score efficiency over all radial laws."""

    p: int
    q: int
    c_p: float
    c_q: float
    omega_p: float
    omega_q: float
    bound: float


def hl_lower_bound(p, q):
    """Infimum of are_wilcoxon over radial families, in closed form."""
    cp = bessel_critical(p)
    cq = bessel_critical(q)
    bound = (
        9.0
        * (2.0 * cp * cp + p - 1.0) ** 2
        * (2.0 * cq * cq + q - 1.0) ** 2
        / (2.0**10 * p * q * cp * cp * cq * cq)
    )
    return BoundResult(
        p=p, q=q, c_p=cp, c_q=cq,
        omega_p=_extremal.omega(p), omega_q=_extremal.omega(q), bound=bound,
    )


def extremal_radial_cdf(k, r):
    """Unit-scale radial CDF of the extremal family in dimension k."""
    if r < 0.0:
        raise DomainError(f"requires r >= 0, got {r}")
    return _extremal.cdf_unit(k, r)


def extremal_radial_density(k, sigma, r):
    """Extremal radial density at scale sigma: zero outside the support."""
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not r > 0.0:
        raise DomainError(f"requires r > 0, got {r}")
    return _extremal.density_unit(k, sigma * r)


def extremal_location_score(k, sigma, r):
    """Location score of the scale-sigma extremal density on its support."""
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return sigma * _extremal.score_unit(k, sigma * r)


@dataclass(frozen=True)
class Lemma1Record:
    """Product bound for Gaussian-weight functionals at one model."""

    k: int
    c_value: float
    d_value: float
    product: float
    slack: float


def verify_lemma1(k, family):
    """Check D * C >= k^2 for the Gaussian-weight functionals.

    The slack is zero exactly at Gaussian families (any scale).
    """
    model = RadialModel(k, family)
    c = c_functional(model, GaussScores())
    d = d_functional(model, GaussScores())
    product = c * d
    return Lemma1Record(
        k=k, c_value=c, d_value=d, product=product, slack=product - float(k * k)
    )


@dataclass(frozen=True)
class Lemma2Record:
    """Attainment of the uniform-weight product infimum at the extremal law."""

    k: int
    c_k: float
    omega_k: float
    product_numeric: float
    product_closed_form: float
    product_gap: float
    d_at_omega: float


def verify_lemma2(k):
    """Check the uniform-weight product infimum against its closed form.

    The product D * C at the unit-scale extremal family must equal
    (2 c_k^2 + k - 1)^2 / (32 c_k^2), and the linear functional D at
    scale omega_k must equal 1.
    """
    c_k = bessel_critical(k)
    model = RadialModel(k, Extremal(sigma=1.0))
    c = c_functional(model, UniformScores())
    d = d_functional(model, UniformScores())
    product = c * d
    closed = (2.0 * c_k * c_k + k - 1.0) ** 2 / (32.0 * c_k * c_k)
    omega = _extremal.omega(k)
    d_at_omega = d_functional(RadialModel(k, Extremal(sigma=omega)), UniformScores())
    return Lemma2Record(
        k=k,
        c_k=c_k,
        omega_k=omega,
        product_numeric=product,
        product_closed_form=closed,
        product_gap=product - closed,
        d_at_omega=d_at_omega,
    )


def family_for_nu(nu):
    """Gaussian when nu is None (the infinite-tail limit), else Student."""
    return Gaussian(scale=1.0) if nu is None else StudentT(nu=float(nu))


def _grid(are_fn, qs, nus, p):
    rows = []
    for q in qs:
        for nu_q in nus:
            for nu_p in nus:
                res = are_fn(p, family_for_nu(nu_p), q, family_for_nu(nu_q))
                rows.append(
                    {
                        "p": p,
                        "q": q,
                        "nu_p": math.inf if nu_p is None else nu_p,
                        "nu_q": math.inf if nu_q is None else nu_q,
                        "value": res.value,
                    }
                )
    return rows


def table1(qs=TABLE_DIMS, nus=TABLE_NUS, p=2):
    """Normal-score efficiency grid over block-2 dimensions and tails."""
    return _grid(are_vdw, qs, nus, p)


def table2(qs=TABLE_DIMS, nus=TABLE_NUS, p=2):
    """Linear-score efficiency grid over block-2 dimensions and tails."""
    return _grid(are_wilcoxon, qs, nus, p)


def table3(dims=TABLE_DIMS):
    """Lower-bound grid over dimension pairs p <= q."""
    rows = []
    for i, p in enumerate(dims):
        for q in dims[i:]:
            rows.append({"p": p, "q": q, "value": hl_lower_bound(p, q).bound})
    return rows


def hl_trend(max_k=50):
    """Non-normative: diagonal lower bound for dimensions up to max_k.

    There is no closed form for an infinite-dimension row, so this trend
    is descriptive only and not part of any reproduction target.
    """
    rows = []
    for k in range(1, max_k + 1):
        rows.append(
            {"k": k, "c_k": bessel_critical(k), "value": hl_lower_bound(k, k).bound}
        )
    return rows
