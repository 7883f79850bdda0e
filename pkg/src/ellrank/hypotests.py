"""Hypothesis tests of independence between two data blocks.

The Gaussian likelihood-ratio determinant test plus rank-score
statistics built from standardized spatial signs and radius ranks,
with sign, linear (Wilcoxon-type), normal-score (van der Waerden-type),
and custom score variants. All statistics are referred to the
chi-square law with p*q degrees of freedom.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import DegenerateDataError, DomainError
from .ranksigns import BlockData, moment_estimate, robust_estimate, standardize
from .specialfn import Integrand, chi2_cdf, chi2_quantile, integrate

__all__ = [
    "ScoreFunction",
    "sign_scores",
    "wilcoxon_scores",
    "vdw_scores",
    "custom_scores",
    "score_eval",
    "score_sigma2",
    "PairedSample",
    "TestResult",
    "wilks_test",
    "rank_score_test",
    "vdw_test",
    "wilcoxon_test",
    "sign_test",
]


@dataclass(frozen=True)
class ScoreFunction:
    """A square-integrable score on (0,1) together with its squared norm."""

    kind: str
    sigma2: float
    k: Optional[int] = None
    fn: Optional[Callable[[float], float]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("sign", "wilcoxon", "vdw", "custom"):
            raise DomainError(f"unknown score kind {self.kind!r}")
        if not self.sigma2 > 0.0:
            raise DomainError("score function must have positive squared norm")
        if self.kind == "vdw" and (self.k is None or self.k < 1):
            raise DomainError("normal scores require the block dimension k >= 1")
        if self.kind == "custom" and self.fn is None:
            raise DomainError("custom scores require an evaluation rule")


def sign_scores():
    """Constant scores K(u) = 1."""
    return ScoreFunction(kind="sign", sigma2=1.0)


def wilcoxon_scores():
    """Linear scores K(u) = u."""
    return ScoreFunction(kind="wilcoxon", sigma2=1.0 / 3.0)


def vdw_scores(k):
    """Normal scores: the dimension-k Gaussian radial quantile."""
    if int(k) != k or k < 1:
        raise DomainError(f"normal scores require an integer k >= 1, got {k}")
    return ScoreFunction(kind="vdw", sigma2=float(k), k=int(k))


def custom_scores(fn):
    """User-supplied scores; the squared norm is computed by quadrature."""
    sigma2 = integrate(
        Integrand(lambda u: fn(u) ** 2, singular_left=True, singular_right=True),
        0.0,
        1.0,
    )
    if not sigma2 > 1e-12:
        raise DomainError("custom score has (numerically) zero squared norm")
    return ScoreFunction(kind="custom", sigma2=sigma2, fn=fn)


def score_eval(score, u):
    """Evaluate a score function at u in (0, 1)."""
    if not 0.0 < u < 1.0:
        raise DomainError(f"scores are defined on (0, 1), got {u}")
    if score.kind == "sign":
        return 1.0
    if score.kind == "wilcoxon":
        return u
    if score.kind == "vdw":
        return math.sqrt(chi2_quantile(score.k, u))
    return score.fn(u)


def score_sigma2(score):
    """Squared norm of the score over (0, 1)."""
    return score.sigma2


def _scores_of_ranks(score, ranks, n):
    u = ranks / (n + 1.0)
    if score.kind == "sign":
        return np.ones(n)
    if score.kind == "wilcoxon":
        return u
    if score.kind == "vdw":
        return np.sqrt(2.0 * kernels.gammainc_inv_batch(0.5 * score.k, u))
    return np.array([score.fn(ui) for ui in u])


@dataclass(frozen=True, eq=False)
class PairedSample:
    """n joint observations split into a p-block and a q-block."""

    block1: BlockData
    block2: BlockData

    def __post_init__(self):
        if self.block1.n != self.block2.n:
            raise DomainError(
                f"blocks disagree on n: {self.block1.n} vs {self.block2.n}"
            )

    @property
    def p(self):
        return self.block1.k

    @property
    def q(self):
        return self.block2.k

    @property
    def n(self):
        return self.block1.n


@dataclass(frozen=True)
class TestResult:
    """Statistic, degrees of freedom, p-value, and the level-alpha decision."""

    statistic: float
    df: int
    p_value: float
    alpha: float
    reject: bool
    method: str


def _make_result(statistic, df, alpha, method):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    statistic = float(statistic)
    if math.isinf(statistic):
        p_value = 0.0
    else:
        p_value = 1.0 - chi2_cdf(df, statistic)
    return TestResult(
        statistic=statistic,
        df=df,
        p_value=p_value,
        alpha=alpha,
        reject=p_value < alpha,
        method=method,
    )


def wilks_test(sample, alpha=0.05):
    """Gaussian likelihood-ratio determinant test of block independence.

    The statistic is -n log(det S / (det S11 det S22)) for the
    partitioned sample covariance S; perfect cross-block collinearity
    is reported as an infinite statistic, not an error.
    """
    p, q, n = sample.p, sample.q, sample.n
    if n <= p + q:
        raise DomainError(f"need n > p + q = {p + q}, got n = {n}")
    stacked = np.hstack([sample.block1.observations, sample.block2.observations])
    cov = np.cov(stacked, rowvar=False)
    sign11, logdet11 = np.linalg.slogdet(cov[:p, :p])
    sign22, logdet22 = np.linalg.slogdet(cov[p:, p:])
    if sign11 <= 0.0 or sign22 <= 0.0:
        raise DegenerateDataError("a within-block covariance is singular")
    sign_all, logdet_all = np.linalg.slogdet(cov)
    if sign_all <= 0.0:
        statistic = math.inf
    else:
        statistic = max(-n * (logdet_all - logdet11 - logdet22), 0.0)
    return _make_result(statistic, p * q, alpha, "wilks")


def _estimate(block, estimator):
    if estimator == "moment":
        return moment_estimate(block)
    if estimator == "tyler":
        return robust_estimate(block)
    raise DomainError(f"unknown estimator {estimator!r}; use 'tyler' or 'moment'")


def _standardized_pair(sample, estimator):
    s1 = standardize(sample.block1, _estimate(sample.block1, estimator))
    s2 = standardize(sample.block2, _estimate(sample.block2, estimator))
    return s1, s2


def _cross_matrix(s1, s2, w1, w2, n):
    # p x q average of K1_i K2_i U1_i U2_i'
    return (s1.signs * (w1 * w2)[:, None]).T @ s2.signs / n


def rank_score_test(sample, score1, score2, estimator="tyler", alpha=0.05):
    """Generic rank-score statistic for a pair of score functions.

    Both blocks are standardized with the chosen estimator pair; the
    statistic is n p q / (sigma1^2 sigma2^2) times the squared Frobenius
    norm of the score-weighted average of sign outer products.
    """
    p, q, n = sample.p, sample.q, sample.n
    s1, s2 = _standardized_pair(sample, estimator)
    w1 = _scores_of_ranks(score1, s1.ranks, n)
    w2 = _scores_of_ranks(score2, s2.ranks, n)
    a = _cross_matrix(s1, s2, w1, w2, n)
    statistic = (
        n * p * q / (score1.sigma2 * score2.sigma2) * float(np.sum(a * a))
    )
    return _make_result(statistic, p * q, alpha, "rank_score")


def _vdw_statistic(s1, s2, p, q, n):
    w1 = np.sqrt(2.0 * kernels.gammainc_inv_batch(0.5 * p, s1.ranks / (n + 1.0)))
    w2 = np.sqrt(2.0 * kernels.gammainc_inv_batch(0.5 * q, s2.ranks / (n + 1.0)))
    a = _cross_matrix(s1, s2, w1, w2, n)
    return n * float(np.sum(a * a))


def _wilcoxon_statistic(s1, s2, p, q, n):
    a = _cross_matrix(
        s1, s2, s1.ranks.astype(np.float64), s2.ranks.astype(np.float64), n
    )
    return 9.0 * n * p * q / (n + 1.0) ** 4 * float(np.sum(a * a))


def _sign_statistic(s1, s2, p, q, n):
    a = s1.signs.T @ s2.signs / n
    return n * p * q * float(np.sum(a * a))


def vdw_test(sample, estimator="tyler", alpha=0.05):
    """Normal-score rank test, computed in its specialized form.

    Identical (to floating-point reassociation) to rank_score_test with
    normal scores on both blocks: there the constant n p q / (p q)
    collapses to n, which is the form evaluated here.
    """
    s1, s2 = _standardized_pair(sample, estimator)
    statistic = _vdw_statistic(s1, s2, sample.p, sample.q, sample.n)
    return _make_result(statistic, sample.p * sample.q, alpha, "vdw")


def wilcoxon_test(sample, estimator="tyler", alpha=0.05):
    """Linear-score rank test, computed from integer ranks.

    Equals rank_score_test with linear scores on both blocks: the two
    squared norms contribute the factor 9 and the rank normalization
    contributes (n+1)^-4.
    """
    s1, s2 = _standardized_pair(sample, estimator)
    statistic = _wilcoxon_statistic(s1, s2, sample.p, sample.q, sample.n)
    return _make_result(statistic, sample.p * sample.q, alpha, "wilcoxon")


def sign_test(sample, estimator="tyler", alpha=0.05):
    """Pure sign test: constant scores on both blocks."""
    s1, s2 = _standardized_pair(sample, estimator)
    statistic = _sign_statistic(s1, s2, sample.p, sample.q, sample.n)
    return _make_result(statistic, sample.p * sample.q, alpha, "sign")
