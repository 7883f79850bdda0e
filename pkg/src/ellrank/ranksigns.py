"""Affine standardization of a data block.

Location/shape estimation (moment pair or robust pair), the symmetric
inverse square root, and the standardized spatial signs, radii, and
radius ranks that the test statistics consume.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConvergenceError, DegenerateDataError, DomainError

__all__ = [
    "BlockData",
    "ShapeEstimate",
    "StandardizedBlock",
    "moment_estimate",
    "spatial_median",
    "tyler_shape",
    "robust_estimate",
    "inv_sqrt_spd",
    "standardize",
]

_RELATIVE_EIG_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class BlockData:
    """n observations in R^k, n >= k + 2."""

    k: int
    observations: np.ndarray = field(repr=False)

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=np.float64)
        if obs.ndim != 2 or obs.shape[1] != self.k:
            raise DomainError(
                f"observations must have shape (n, {self.k}), got {obs.shape}"
            )
        if self.k < 1:
            raise DomainError(f"dimension must be >= 1, got {self.k}")
        if obs.shape[0] < self.k + 2:
            raise DegenerateDataError(
                f"need at least k + 2 = {self.k + 2} observations, got {obs.shape[0]}"
            )
        if not np.all(np.isfinite(obs)):
            raise DomainError("observations must all be finite")
        object.__setattr__(self, "observations", obs)

    @property
    def n(self):
        return self.observations.shape[0]


@dataclass(frozen=True, eq=False)
class ShapeEstimate:
    """Location vector plus determinant-one SPD shape matrix."""

    location: np.ndarray = field(repr=False)
    shape: np.ndarray = field(repr=False)
    method: str = "moment"

    def __post_init__(self):
        loc = np.asarray(self.location, dtype=np.float64)
        shp = np.asarray(self.shape, dtype=np.float64)
        if shp.ndim != 2 or shp.shape[0] != shp.shape[1] or loc.shape != (shp.shape[0],):
            raise DomainError("location/shape dimensions are inconsistent")
        if not np.allclose(shp, shp.T, atol=1e-12):
            raise DomainError("shape matrix must be symmetric")
        eigvals = np.linalg.eigvalsh(shp)
        if eigvals[0] <= 0.0:
            raise DomainError("shape matrix must be positive definite")
        logdet = float(np.sum(np.log(eigvals)))
        if abs(math.expm1(logdet)) > 1e-10:
            raise DomainError("shape matrix must have determinant 1")
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "shape", shp)


@dataclass(frozen=True, eq=False)
class StandardizedBlock:
    """Spatial signs, radii, and radius ranks of a standardized block."""

    signs: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    ranks: np.ndarray = field(repr=False)


def moment_estimate(data):
    """Sample mean plus determinant-normalized sample covariance."""
    obs = data.observations
    location = obs.mean(axis=0)
    cov = np.cov(obs, rowvar=False).reshape(data.k, data.k)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0.0 or not math.isfinite(logdet):
        raise DegenerateDataError("sample covariance is singular")
    eigvals = np.linalg.eigvalsh(cov)
    if eigvals[0] <= _RELATIVE_EIG_FLOOR * eigvals[-1]:
        raise DegenerateDataError("sample covariance is numerically rank-deficient")
    shape = cov / math.exp(logdet / data.k)
    return ShapeEstimate(location=location, shape=shape, method="moment")


def spatial_median(data, tol=1e-10):
    """Minimizer of the summed Euclidean distances to the observations."""
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    median, iterations, converged = kernels.weiszfeld_median(
        data.observations, tol, 500
    )
    if not converged:
        raise ConvergenceError(
            f"spatial median did not converge in {iterations} iterations",
            estimate=median,
        )
    return median


def tyler_shape(data, location, tol=1e-10):
    """Direction-only fixed-point shape estimate, determinant one."""
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    location = np.asarray(location, dtype=np.float64)
    if location.shape != (data.k,):
        raise DomainError(f"location must have shape ({data.k},)")
    shape, iterations, status = kernels.tyler_fixed_point(
        data.observations, location, tol, 200
    )
    if status == 2:
        raise DegenerateDataError(
            "shape fixed point degenerate: data concentrated on a lower-dimensional set"
        )
    if status == 1:
        raise ConvergenceError(
            f"shape fixed point did not converge in {iterations} iterations",
            estimate=shape,
        )
    return ShapeEstimate(location=location, shape=shape, method="tyler")


def robust_estimate(data, tol=1e-13, max_iter=2000):
    """Jointly consistent robust location and shape.

    The location is the spatial median computed in the metric of the
    shape matrix, and the shape is the direction-only fixed point at
    that location; the two are alternated to a common fixed point.
    Unlike the plain spatial median paired with a shape taken at it,
    this pair transforms consistently under every invertible affine
    map, which is what makes the downstream statistics invariant.
    The tight default tolerance matters: residual left in the fixed
    point shows up as affine-equivariance error of the estimate and
    hence as transform noise in every statistic built on it.
    """
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    location, shape, _, status = kernels.joint_fixed_point(
        data.observations, tol, max_iter
    )
    if status == 2:
        raise DegenerateDataError(
            "joint fixed point degenerate: data concentrated on a "
            "lower-dimensional set, or the location cannot be resolved "
            "away from an observation"
        )
    if status == 1:
        raise ConvergenceError(
            f"joint location/shape fixed point did not converge in {max_iter} rounds",
            estimate=shape,
        )
    return ShapeEstimate(location=location, shape=shape, method="tyler")


def inv_sqrt_spd(m):
    """Symmetric inverse square root of an SPD matrix."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, atol=1e-10 * max(1.0, float(np.abs(m).max()))):
        raise DomainError("matrix is not symmetric")
    eigvals, eigvecs = np.linalg.eigh(m)
    if eigvals[0] < 0.0 and eigvals[0] <= -_RELATIVE_EIG_FLOOR * abs(eigvals[-1]):
        raise DomainError("matrix is not positive definite")
    if eigvals[0] <= _RELATIVE_EIG_FLOOR * eigvals[-1]:
        raise DegenerateDataError("matrix is numerically singular")
    return (eigvecs / np.sqrt(eigvals)) @ eigvecs.T


def standardize(data, est):
    """Standardized spatial signs, radii, and radius ranks of a block.

    Radius ties are broken by ascending original index (stable order),
    so ranks are always a permutation of 1..n.
    """
    w = inv_sqrt_spd(est.shape)
    z = (data.observations - est.location) @ w
    radii = np.sqrt(np.einsum("ij,ij->i", z, z))
    if np.any(radii == 0.0):
        raise DegenerateDataError("an observation coincides with the location")
    signs = z / radii[:, None]
    order = np.argsort(radii, kind="stable")
    ranks = np.empty(data.n, dtype=np.int64)
    ranks[order] = np.arange(1, data.n + 1)
    return StandardizedBlock(signs=signs, radii=radii, ranks=ranks)
