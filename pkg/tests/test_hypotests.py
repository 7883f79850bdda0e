"""Independence tests: score functions, rank statistics, and the likelihood ratio."""
import math

import numpy as np
import pytest
import scipy.special as sp
import scipy.stats as st
from hypothesis import given, settings, strategies as hs

import _tools
from ellrank import hypotests as ht
from ellrank import ranksigns as rs
from ellrank.errors import DomainError
from ellrank.hypotests import PairedSample
from ellrank.ranksigns import BlockData


class TestScoreFunctions:
    def test_sigma2_values(self):
        assert ht.score_sigma2(ht.sign_scores()) == pytest.approx(1.0, rel=1e-14)
        assert ht.score_sigma2(ht.wilcoxon_scores()) == pytest.approx(
            1.0 / 3.0, rel=1e-14
        )
        for k in range(1, 8):
            assert ht.score_sigma2(ht.vdw_scores(k)) == pytest.approx(
                float(k), rel=1e-10
            )

    def test_sign_is_constant(self):
        s = ht.sign_scores()
        for u in (0.01, 0.4, 0.99):
            assert ht.score_eval(s, u) == 1.0

    def test_wilcoxon_is_identity(self):
        w = ht.wilcoxon_scores()
        for u in (0.01, 0.4, 0.99):
            assert ht.score_eval(w, u) == pytest.approx(u, rel=1e-14)

    def test_vdw_matches_chi_quantile(self):
        # K(u) is the u-quantile of a chi(k) radius
        for k in (1, 2, 3, 6):
            v = ht.vdw_scores(k)
            for u in (0.05, 0.3, 0.5, 0.8, 0.99):
                oracle = math.sqrt(2.0 * sp.gammaincinv(0.5 * k, u))
                assert ht.score_eval(v, u) == pytest.approx(oracle, rel=1e-10)

    def test_custom_sigma2_is_numeric_moment(self):
        c = ht.custom_scores(lambda u: u)
        assert c.kind == "custom"
        assert c.sigma2 == pytest.approx(1.0 / 3.0, rel=1e-9)
        c2 = ht.custom_scores(lambda u: u * u)
        assert c2.sigma2 == pytest.approx(0.2, rel=1e-9)

    def test_vdw_requires_positive_k(self):
        with pytest.raises(DomainError):
            ht.vdw_scores(0)

    def test_score_eval_domain(self):
        w = ht.wilcoxon_scores()
        for bad in (0.0, 1.0, -0.3):
            with pytest.raises(DomainError):
                ht.score_eval(w, bad)


class TestWilks:
    def test_hand_example(self):
        # det ratio 0.8 on four points gives statistic -4 ln 0.8
        x = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([[2.0], [0.0], [2.0], [0.0]])
        sample = PairedSample(BlockData(1, x), BlockData(1, y))
        res = ht.wilks_test(sample)
        assert res.statistic == pytest.approx(-4.0 * math.log(0.8), rel=1e-14)
        assert res.df == 1
        assert res.p_value == pytest.approx(
            st.chi2.sf(res.statistic, 1), rel=1e-12
        )
        assert res.reject is False
        assert res.method == "wilks"

    def test_collinear_blocks_degenerate(self):
        t = np.linspace(0.0, 1.0, 12)
        sample = PairedSample(
            BlockData(1, t[:, None]), BlockData(1, (2.0 * t)[:, None])
        )
        res = ht.wilks_test(sample)
        assert math.isinf(res.statistic)
        assert res.p_value == 0.0
        assert res.reject is True

    def test_affine_invariance(self):
        rng = np.random.default_rng(11)
        sample = _tools.paired(101, 35, 2, 3)
        base = ht.wilks_test(sample).statistic
        for _ in range(5):
            a1, b1 = _tools.random_affine(rng, 2)
            a2, b2 = _tools.random_affine(rng, 3)
            moved = _tools.transform_sample(sample, a1, b1, a2, b2)
            assert ht.wilks_test(moved).statistic == pytest.approx(base, rel=1e-9)

    def test_df_is_pq(self):
        sample = _tools.paired(7, 30, 3, 2)
        assert ht.wilks_test(sample).df == 6


class TestRankScoreTests:
    @pytest.mark.parametrize("p,q", [(1, 1), (1, 3), (2, 2), (3, 2)])
    def test_specialized_equals_generic(self, p, q):
        for seed in range(4):
            sample = _tools.paired(1000 + seed, 45, p, q)
            pairs = [
                (ht.sign_test, (ht.sign_scores(), ht.sign_scores())),
                (ht.wilcoxon_test, (ht.wilcoxon_scores(), ht.wilcoxon_scores())),
                (ht.vdw_test, (ht.vdw_scores(p), ht.vdw_scores(q))),
            ]
            for special, (s1, s2) in pairs:
                a = special(sample)
                b = ht.rank_score_test(sample, s1, s2)
                assert b.statistic == pytest.approx(a.statistic, rel=1e-12)
                assert b.df == a.df == p * q

    def test_custom_identity_matches_wilcoxon(self):
        sample = _tools.paired(55, 40, 2, 2)
        ident = ht.custom_scores(lambda u: u)
        a = ht.rank_score_test(sample, ident, ident)
        b = ht.wilcoxon_test(sample)
        assert a.statistic == pytest.approx(b.statistic, rel=1e-12)

    def test_sign_statistic_from_scratch(self):
        sample = _tools.paired(123, 30, 2, 3)
        res = ht.sign_test(sample)
        e1 = rs.robust_estimate(sample.block1)
        e2 = rs.robust_estimate(sample.block2)
        u1 = rs.standardize(sample.block1, e1).signs
        u2 = rs.standardize(sample.block2, e2).signs
        m = u1.T @ u2 / 30.0
        assert res.statistic == pytest.approx(
            30.0 * 2.0 * 3.0 * float((m * m).sum()), rel=1e-12
        )

    def test_wilcoxon_statistic_from_scratch(self):
        sample = _tools.paired(124, 30, 2, 3)
        res = ht.wilcoxon_test(sample)
        e1 = rs.robust_estimate(sample.block1)
        e2 = rs.robust_estimate(sample.block2)
        s1 = rs.standardize(sample.block1, e1)
        s2 = rs.standardize(sample.block2, e2)
        a1 = (s1.ranks / 31.0)[:, None] * s1.signs
        a2 = (s2.ranks / 31.0)[:, None] * s2.signs
        m = a1.T @ a2 / 30.0
        expect = 30.0 * 2.0 * 3.0 * 9.0 * float((m * m).sum())
        assert res.statistic == pytest.approx(expect, rel=1e-12)

    def test_pvalue_and_reject_convention(self):
        for seed in range(6):
            sample = _tools.paired(200 + seed, 40, 2, 2)
            res = ht.wilcoxon_test(sample, alpha=0.3)
            assert 0.0 <= res.p_value <= 1.0
            assert res.statistic >= 0.0
            assert res.p_value == pytest.approx(
                st.chi2.sf(res.statistic, res.df), rel=1e-10
            )
            assert res.reject == (res.p_value < 0.3)
            assert res.alpha == 0.3

    def test_moment_estimator_path(self):
        sample = _tools.paired(31, 50, 2, 2)
        a = ht.wilcoxon_test(sample, estimator="moment")
        b = ht.wilcoxon_test(sample, estimator="tyler")
        assert a.df == b.df == 4
        assert a.statistic != b.statistic

    @given(hs.integers(min_value=0, max_value=10_000))
    @settings(deadline=None, max_examples=20)
    def test_affine_invariance(self, seed):
        rng = np.random.default_rng(seed)
        sample = _tools.paired(seed, 25, 2, 2)
        base = ht.wilcoxon_test(sample).statistic
        a1, b1 = _tools.random_affine(rng, 2)
        a2, b2 = _tools.random_affine(rng, 2)
        moved = _tools.transform_sample(sample, a1, b1, a2, b2)
        assert ht.wilcoxon_test(moved).statistic == pytest.approx(base, rel=1e-8)


class TestValidation:
    def test_alpha_bounds(self):
        sample = _tools.paired(1, 20, 1, 1)
        for bad in (0.0, 1.0, -0.1):
            with pytest.raises(DomainError):
                ht.wilcoxon_test(sample, alpha=bad)

    def test_unknown_estimator(self):
        sample = _tools.paired(1, 20, 1, 1)
        with pytest.raises(DomainError):
            ht.wilcoxon_test(sample, estimator="huber")

    def test_block_length_mismatch(self):
        x = np.random.default_rng(0).standard_normal((10, 1))
        y = np.random.default_rng(1).standard_normal((9, 1))
        with pytest.raises(DomainError):
            PairedSample(BlockData(1, x), BlockData(1, y))
