"""Radial families of elliptical laws and the local-alternative sampler.

A radial family fixes the law of the standardized radius in any
dimension k; this module evaluates densities, location scores, radial
CDFs/quantiles, draws spherical samples by inverse-CDF, and mixes two
independent spherical blocks into a locally dependent pair.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import _extremal, kernels
from .errors import DomainError, ModelError
from .hypotests import PairedSample
from .ranksigns import BlockData
from .specialfn import (
    DEFAULT_QUADRATURE,
    Integrand,
    QuadratureSpec,
    chi2_quantile,
    f_cdf,
    find_root,
    integrate,
    reg_lower_gamma,
)

__all__ = [
    "Gaussian",
    "StudentT",
    "Extremal",
    "Custom",
    "RadialModel",
    "KonijnModel",
    "RngStream",
    "density",
    "location_score",
    "radial_cdf",
    "radial_quantile",
    "sample_spherical",
    "sample_konijn",
    "default_mixing",
]


@dataclass(frozen=True)
class Gaussian:
    """Gaussian radial family at a fixed scale: f(r) = exp(-(a r)^2 / 2)."""

    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ModelError(f"scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class StudentT:
    """Student radial family f(r) = (1 + r^2/nu)^(-(k+nu)/2), nu > 2.

    The restriction nu > 2 keeps second moments finite in every
    dimension, which the determinant test requires.
    """

    nu: float

    def __post_init__(self):
        if not self.nu > 2.0:
            raise ModelError(
                f"tail index must exceed 2 for finite variance, got {self.nu}"
            )


@dataclass(frozen=True)
class Extremal:
    """Compact-support Bessel-driven family at scale sigma."""

    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ModelError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class Custom:
    """User-supplied radial density and location score.

    ``max_finite_moment`` declares the largest j with the j-th radial
    moment finite; a dimension-k model needs at least k + 1.
    """

    density: Callable[[float], float] = field(repr=False)
    score: Callable[[float], float] = field(repr=False)
    max_finite_moment: float = math.inf


@dataclass(frozen=True)
class RadialModel:
    """A marginal dimension k bound to a radial family."""

    k: int
    family: object

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"dimension must be an integer >= 1, got {self.k}")
        if not isinstance(self.family, (Gaussian, StudentT, Extremal, Custom)):
            raise ModelError(f"unsupported radial family {type(self.family).__name__}")
        if isinstance(self.family, Custom) and self.family.max_finite_moment < self.k + 1:
            raise ModelError(
                f"family declares moments only up to order "
                f"{self.family.max_finite_moment}; dimension {self.k} needs {self.k + 1}"
            )


def density(model, r):
    """Radial function value f(r), in the family's fixed normalization."""
    if not r > 0.0:
        raise DomainError(f"density requires r > 0, got {r}")
    fam = model.family
    if isinstance(fam, Gaussian):
        return math.exp(-0.5 * (fam.scale * r) ** 2)
    if isinstance(fam, StudentT):
        return (1.0 + r * r / fam.nu) ** (-0.5 * (model.k + fam.nu))
    if isinstance(fam, Extremal):
        return _extremal.density_unit(model.k, fam.sigma * r)
    return fam.density(r)


def location_score(model, r):
    """Optimal location score -f'(r)/f(r) of the radial density."""
    if not r > 0.0:
        raise DomainError(f"location_score requires r > 0, got {r}")
    fam = model.family
    if isinstance(fam, Gaussian):
        return fam.scale * fam.scale * r
    if isinstance(fam, StudentT):
        return (model.k + fam.nu) * r / (fam.nu + r * r)
    if isinstance(fam, Extremal):
        return fam.sigma * _extremal.score_unit(model.k, fam.sigma * r)
    return fam.score(r)


@lru_cache(maxsize=None)
def _custom_normalizer(model):
    # (k-1)-th radial moment of the unnormalized density, via r = t/(1-t)
    k, fam = model.k, model.family

    def g(t):
        r = t / (1.0 - t)
        return r ** (k - 1) * fam.density(r) / (1.0 - t) ** 2

    return integrate(
        Integrand(g, singular_left=True, singular_right=True), 0.0, 1.0
    )


def radial_cdf(model, r):
    """CDF of the radius of a spherical draw in dimension k."""
    if r < 0.0:
        raise DomainError(f"radial_cdf requires r >= 0, got {r}")
    if r == 0.0:
        return 0.0
    fam = model.family
    k = model.k
    if isinstance(fam, Gaussian):
        return reg_lower_gamma(0.5 * k, 0.5 * (fam.scale * r) ** 2)
    if isinstance(fam, StudentT):
        return f_cdf(k, fam.nu, r * r / k) if fam.nu == int(fam.nu) else _student_cdf(
            k, fam.nu, r
        )
    if isinstance(fam, Extremal):
        return _extremal.cdf_unit(k, fam.sigma * r)
    mass = _custom_normalizer(model)

    def g(s):
        return s ** (k - 1) * fam.density(s) / mass

    upper = min(r, 1e12)
    return min(integrate(Integrand(g, singular_left=True), 0.0, upper), 1.0)


def _student_cdf(k, nu, r):
    # non-integer tail index: same beta ratio, bypassing the integer
    # degrees-of-freedom wrapper
    y = r * r / (r * r + nu)
    return kernels.reg_inc_beta(0.5 * k, 0.5 * nu, y)


def radial_quantile(model, u):
    """Inverse radial CDF on (0, 1)."""
    if not 0.0 < u < 1.0:
        raise DomainError(f"radial_quantile requires u in (0, 1), got {u}")
    fam = model.family
    k = model.k
    if isinstance(fam, Gaussian):
        return math.sqrt(chi2_quantile(k, u)) / fam.scale
    if isinstance(fam, StudentT):
        return kernels.student_radial_quantile(k, fam.nu, u)
    if isinstance(fam, Extremal):
        return _extremal.quantile_unit(k, u) / fam.sigma
    lo, hi = 0.0, 1.0
    while radial_cdf(model, hi) < u:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            raise DomainError("quantile bracket expansion failed; check the density")
    return find_root(lambda r: radial_cdf(model, r) - u, lo, hi, 1e-12)


class RngStream:
    """Counter-based random stream keyed by (master seed, path).

    Child streams are statistically independent and reproducible without
    coordination; the generator is created lazily and owned by this
    stream, so a stream value should not be shared across tasks.
    """

    def __init__(self, master_seed, path=()):
        self.master_seed = int(master_seed)
        self.path = tuple(int(i) for i in path)
        self._generator = None

    @property
    def generator(self):
        if self._generator is None:
            seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
            self._generator = np.random.Generator(np.random.Philox(seq))
        return self._generator

    def child(self, index):
        """Derived stream at path + (index,)."""
        return RngStream(self.master_seed, self.path + (int(index),))

    def derive_seed(self, index):
        """A fresh 63-bit master seed derived from this stream's key."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path + (int(index),))
        return int(seq.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _quantile_batch(model, u):
    fam = model.family
    k = model.k
    if isinstance(fam, Gaussian):
        return np.sqrt(2.0 * kernels.gammainc_inv_batch(0.5 * k, u)) / fam.scale
    if isinstance(fam, StudentT):
        return kernels.student_radial_quantile_batch(k, fam.nu, u)
    return np.array([radial_quantile(model, ui) for ui in u])


def sample_spherical(model, n, rng):
    """n spherical draws in R^k: uniform directions times radius quantiles."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    gen = rng.generator
    normals = gen.standard_normal((n, model.k))
    norms = np.sqrt(np.einsum("ij,ij->i", normals, normals))
    directions = normals / norms[:, None]
    uniforms = np.maximum(gen.random(n), 2.0**-53)
    radii = _quantile_batch(model, uniforms)
    return directions * radii[:, None]


def default_mixing(p, q):
    """Default cross-block matrix: a single unit entry at position (1,1)."""
    m = np.zeros((p, q))
    m[0, 0] = 1.0
    return m


@dataclass(frozen=True, eq=False)
class KonijnModel:
    """Local-alternative generator mixing two independent spherical blocks.

    With d = delta / sqrt(n), the mixed pair is
    X1 = (1 - d) Y1 + d M Y2 and X2 = d M' Y1 + (1 - d) Y2.
    """

    p: int
    q: int
    f: RadialModel
    g: RadialModel
    m: np.ndarray = field(repr=False)
    delta: float
    n: int

    def __post_init__(self):
        if self.f.k != self.p or self.g.k != self.q:
            raise ModelError("marginal model dimensions disagree with p, q")
        if self.n < 1:
            raise ModelError(f"need n >= 1, got {self.n}")
        m = np.asarray(self.m, dtype=np.float64)
        if m.shape != (self.p, self.q):
            raise ModelError(f"mixing matrix must be {self.p} x {self.q}, got {m.shape}")
        object.__setattr__(self, "m", m)
        mix = self.mixing_matrix()
        sign, _ = np.linalg.slogdet(mix)
        if sign == 0.0 or np.linalg.cond(mix) > 1e12:
            raise ModelError("block mixing matrix is singular")

    def mixing_matrix(self):
        """The (p+q) x (p+q) block mixing matrix."""
        d = self.delta / math.sqrt(self.n)
        top = np.hstack([(1.0 - d) * np.eye(self.p), d * self.m])
        bottom = np.hstack([d * self.m.T, (1.0 - d) * np.eye(self.q)])
        return np.vstack([top, bottom])


def sample_konijn(model, rng):
    """One paired sample of size n from the local-alternative model.

    Block draws use the child streams rng.child(0) and rng.child(1), so
    at delta = 0 the output is bit-identical to two independent
    spherical samples on those streams.
    """
    y1 = sample_spherical(model.f, model.n, rng.child(0))
    y2 = sample_spherical(model.g, model.n, rng.child(1))
    if model.delta == 0.0:
        x1, x2 = y1, y2
    else:
        mix = model.mixing_matrix()
        stacked = np.hstack([y1, y2]) @ mix.T
        x1 = stacked[:, : model.p]
        x2 = stacked[:, model.p :]
    return PairedSample(
        block1=BlockData(k=model.p, observations=x1),
        block2=BlockData(k=model.q, observations=x2),
    )
