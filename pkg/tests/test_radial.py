"""Radial families, sampling streams, and the mixing alternative."""
import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings, strategies as hs

from ellrank import radial as rd
from ellrank.efficiency import bessel_critical
from ellrank.errors import DomainError, ModelError


FAMILIES = [
    rd.Gaussian(),
    rd.Gaussian(scale=2.5),
    rd.StudentT(nu=3.0),
    rd.StudentT(nu=12.0),
    rd.Extremal(),
    rd.Extremal(sigma=0.7),
]


class TestQuantileCdf:
    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: repr(f))
    @pytest.mark.parametrize("k", [1, 2, 3, 6])
    def test_roundtrip(self, family, k):
        model = rd.RadialModel(k, family)
        for u in (1e-9, 0.01, 0.3, 0.5, 0.77, 0.99, 1.0 - 1e-9):
            r = rd.radial_quantile(model, u)
            assert rd.radial_cdf(model, r) == pytest.approx(u, rel=1e-8, abs=1e-11)

    def test_gaussian_against_scipy(self):
        for k in (1, 2, 5):
            model = rd.RadialModel(k, rd.Gaussian())
            for u in (0.05, 0.5, 0.95):
                expect = math.sqrt(2.0 * float(sp.gammaincinv(k / 2.0, u)))
                assert rd.radial_quantile(model, u) == pytest.approx(expect, rel=1e-12)

    def test_student_against_scipy(self):
        for k in (1, 3):
            for nu in (3.0, 7.5):
                model = rd.RadialModel(k, rd.StudentT(nu=nu))
                for u in (0.1, 0.5, 0.9):
                    y = float(sp.betaincinv(k / 2.0, nu / 2.0, u))
                    expect = math.sqrt(nu * y / (1.0 - y))
                    assert rd.radial_quantile(model, u) == pytest.approx(expect, rel=1e-10)

    def test_scale_divides_radius(self):
        # family scale s transforms f(r) to f(s r): radii shrink by 1/s
        base = rd.RadialModel(2, rd.Gaussian())
        scaled = rd.RadialModel(2, rd.Gaussian(scale=2.5))
        for u in (0.2, 0.8):
            assert rd.radial_quantile(scaled, u) == pytest.approx(
                rd.radial_quantile(base, u) / 2.5, rel=1e-12
            )

    def test_extremal_dimension_one_closed_form(self):
        model = rd.RadialModel(1, rd.Extremal())
        for r in (0.0, 0.4, 1.0, 1.5, math.pi / 2.0):
            assert rd.radial_cdf(model, r) == pytest.approx(math.sin(r), abs=1e-12)
        for u in (0.1, 0.6, 0.99):
            assert rd.radial_quantile(model, u) == pytest.approx(math.asin(u), rel=1e-10)

    def test_extremal_support_endpoint(self):
        for k in (1, 2, 5):
            for sigma in (1.0, 2.0):
                model = rd.RadialModel(k, rd.Extremal(sigma=sigma))
                top = bessel_critical(k) / sigma
                assert rd.radial_quantile(model, 1.0 - 1e-15) <= top + 1e-9
                assert rd.radial_cdf(model, top) == pytest.approx(1.0, abs=1e-9)
                assert rd.radial_cdf(model, top + 1.0) == 1.0

    def test_domain(self):
        model = rd.RadialModel(2, rd.Gaussian())
        with pytest.raises(DomainError):
            rd.radial_quantile(model, -0.1)
        with pytest.raises(DomainError):
            rd.radial_quantile(model, 1.5)


class TestDensityScore:
    @pytest.mark.parametrize(
        "family", [rd.Gaussian(), rd.Gaussian(scale=1.7), rd.StudentT(nu=4.0), rd.Extremal()],
        ids=lambda f: repr(f),
    )
    def test_score_is_negative_log_slope(self, family):
        model = rd.RadialModel(3, family)
        h = 1e-6
        for r in (0.3, 0.9, 1.4):
            fd = -(
                math.log(rd.density(model, r + h)) - math.log(rd.density(model, r - h))
            ) / (2.0 * h)
            assert rd.location_score(model, r) == pytest.approx(fd, rel=1e-5, abs=1e-6)

    def test_gaussian_density_shape(self):
        model = rd.RadialModel(2, rd.Gaussian())
        for r in (0.05, 1.0, 2.2):
            assert rd.density(model, r) == pytest.approx(math.exp(-0.5 * r * r), rel=1e-12)
        with pytest.raises(DomainError):
            rd.density(model, 0.0)

    def test_student_score_closed_form(self):
        k, nu = 3, 4.0
        model = rd.RadialModel(k, rd.StudentT(nu=nu))
        for r in (0.2, 1.0, 4.0):
            expect = (k + nu) * r / (nu + r * r)
            assert rd.location_score(model, r) == pytest.approx(expect, rel=1e-12)

    def test_custom_family_matches_gaussian(self):
        custom = rd.Custom(
            density=lambda r: math.exp(-0.5 * r * r),
            score=lambda r: r,
            max_finite_moment=math.inf,
        )
        a = rd.RadialModel(2, custom)
        b = rd.RadialModel(2, rd.Gaussian())
        for u in (0.05, 0.5, 0.95):
            assert rd.radial_quantile(a, u) == pytest.approx(
                rd.radial_quantile(b, u), rel=1e-9
            )
        assert rd.location_score(a, 1.3) == pytest.approx(1.3, rel=1e-12)

    def test_student_needs_nu_above_two(self):
        with pytest.raises(ModelError):
            rd.StudentT(nu=2.0)
        with pytest.raises(ModelError):
            rd.StudentT(nu=-1.0)


class TestRngStream:
    def test_deterministic(self):
        a = rd.RngStream(11, path=(4,)).generator.standard_normal(8)
        b = rd.RngStream(11, path=(4,)).generator.standard_normal(8)
        assert np.array_equal(a, b)

    def test_children_are_distinct_streams(self):
        root = rd.RngStream(11)
        x = root.child(0).generator.standard_normal(16)
        y = root.child(1).generator.standard_normal(16)
        assert not np.allclose(x, y)

    def test_child_path_extends(self):
        s = rd.RngStream(7, path=(3,))
        c = s.child(2)
        assert c.path == (3, 2)
        assert c.master_seed == 7
        direct = rd.RngStream(7, path=(3, 2))
        assert np.array_equal(
            c.generator.standard_normal(4), direct.generator.standard_normal(4)
        )

    def test_derive_seed_stable(self):
        s = rd.RngStream(7, path=(3,))
        assert s.derive_seed(0) == s.derive_seed(0)
        assert s.derive_seed(0) != s.derive_seed(1)
        assert rd.RngStream(7, path=(3,)).derive_seed(5) == s.derive_seed(5)


class TestSampling:
    def test_shapes_and_determinism(self):
        model = rd.RadialModel(3, rd.StudentT(nu=5.0))
        x = rd.sample_spherical(model, 50, rd.RngStream(5))
        y = rd.sample_spherical(model, 50, rd.RngStream(5))
        assert x.shape == (50, 3)
        assert np.array_equal(x, y)

    def test_directions_uniform_and_radii_match_quantiles(self):
        model = rd.RadialModel(2, rd.Gaussian())
        x = rd.sample_spherical(model, 4000, rd.RngStream(12))
        radii = np.linalg.norm(x, axis=1)
        dirs = x / radii[:, None]
        # mean direction near zero at the 5 sigma scale
        assert np.linalg.norm(dirs.mean(axis=0)) < 5.0 / math.sqrt(4000)
        # chi(2) mean radius is sqrt(pi/2)
        assert radii.mean() == pytest.approx(math.sqrt(math.pi / 2.0), abs=0.05)

    def test_extremal_radii_respect_support(self):
        model = rd.RadialModel(4, rd.Extremal(sigma=1.0))
        x = rd.sample_spherical(model, 500, rd.RngStream(3))
        assert np.linalg.norm(x, axis=1).max() <= bessel_critical(4) + 1e-9

    @given(hs.integers(min_value=0, max_value=2**32 - 1))
    @settings(deadline=None, max_examples=20)
    def test_seed_to_sample_function(self, seed):
        model = rd.RadialModel(2, rd.Gaussian())
        a = rd.sample_spherical(model, 4, rd.RngStream(seed))
        b = rd.sample_spherical(model, 4, rd.RngStream(seed))
        assert np.array_equal(a, b)


class TestKonijn:
    @staticmethod
    def _model(delta, n=40, m=None):
        p, q = 2, 3
        if m is None:
            m = rd.default_mixing(p, q)
        return rd.KonijnModel(
            p=p, q=q,
            f=rd.RadialModel(p, rd.Gaussian()),
            g=rd.RadialModel(q, rd.StudentT(nu=6.0)),
            m=m, delta=delta, n=n,
        )

    def test_zero_delta_reduces_to_independent_blocks(self):
        model = self._model(0.0)
        rng = rd.RngStream(21)
        sample = rd.sample_konijn(model, rng)
        y1 = rd.sample_spherical(model.f, model.n, rd.RngStream(21).child(0))
        y2 = rd.sample_spherical(model.g, model.n, rd.RngStream(21).child(1))
        assert np.array_equal(sample.block1.observations, y1)
        assert np.array_equal(sample.block2.observations, y2)

    def test_mixing_matches_manual_reconstruction(self):
        model = self._model(1.5)
        sample = rd.sample_konijn(model, rd.RngStream(21))
        y1 = rd.sample_spherical(model.f, model.n, rd.RngStream(21).child(0))
        y2 = rd.sample_spherical(model.g, model.n, rd.RngStream(21).child(1))
        d = 1.5 / math.sqrt(model.n)
        x1 = (1.0 - d) * y1 + d * (y2 @ np.asarray(model.m).T)
        x2 = d * (y1 @ np.asarray(model.m)) + (1.0 - d) * y2
        assert np.allclose(sample.block1.observations, x1, atol=1e-14)
        assert np.allclose(sample.block2.observations, x2, atol=1e-14)

    def test_mixing_matrix_blocks(self):
        model = self._model(2.0, n=25)
        mix = model.mixing_matrix()
        d = 2.0 / math.sqrt(25)
        assert mix.shape == (5, 5)
        assert np.allclose(mix[:2, :2], (1.0 - d) * np.eye(2))
        assert np.allclose(mix[:2, 2:], d * np.asarray(model.m))

    def test_default_mixing_is_single_unit_entry(self):
        m = rd.default_mixing(2, 4)
        assert m.shape == (2, 4)
        assert m[0, 0] == 1.0
        assert np.count_nonzero(m) == 1

    def test_rank_deficient_mixing_matrix_is_allowed(self):
        # Only the composite block matrix must be invertible, so a
        # rank-one cross matrix is legitimate.
        m = np.zeros((2, 3))
        m[0, 0] = 1.0
        model = rd.KonijnModel(
            p=2, q=3,
            f=rd.RadialModel(2, rd.Gaussian()),
            g=rd.RadialModel(3, rd.Gaussian()),
            m=m, delta=3.0, n=500,
        )
        sign, _ = np.linalg.slogdet(model.mixing_matrix())
        assert sign != 0.0

    def test_validation(self):
        with pytest.raises(ModelError):
            self._model(0.0, n=0)
        with pytest.raises(ModelError):
            self._model(0.0, m=np.zeros((3, 2)))
        with pytest.raises(ModelError):
            rd.KonijnModel(
                p=2, q=2,
                f=rd.RadialModel(3, rd.Gaussian()),
                g=rd.RadialModel(2, rd.Gaussian()),
                m=np.eye(2), delta=0.0, n=10,
            )

    def test_singular_composite_rejected(self):
        # delta chosen so 1 - d equals d with m = identity: singular mix
        n = 16
        delta = 0.5 * math.sqrt(n)
        with pytest.raises(ModelError):
            rd.KonijnModel(
                p=2, q=2,
                f=rd.RadialModel(2, rd.Gaussian()),
                g=rd.RadialModel(2, rd.Gaussian()),
                m=np.eye(2), delta=delta, n=n,
            )
