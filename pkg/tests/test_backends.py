"""Parity between the compiled kernel backend and the pure NumPy twin."""
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from ellrank import _purekernels as pure
from ellrank import kernels

compiled = pytest.importorskip("ellrank._ckernels")

# Largest double below 1: inverse problems there are non-unique at double
# granularity (several x share forward error 0), so parity at that point is
# checked through forward residuals instead of through the inverses.
P_EDGE = 1.0 - 2.0**-53


def test_compiled_extension_is_default():
    if os.environ.get("ELLRANK_BACKEND", "").strip().lower() in ("", "compiled"):
        assert kernels.BACKEND == "compiled"
    assert compiled.BACKEND == "compiled"
    assert pure.BACKEND == "pure"


def test_backend_env_override():
    code = "from ellrank import kernels; print(kernels.backend_name())"
    for forced in ("pure", "compiled"):
        env = dict(os.environ, ELLRANK_BACKEND=forced)
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == forced


class TestScalarParity:
    def test_reg_gamma(self):
        # The interpreter's lgamma and the C library's differ by an ulp at
        # some arguments; the exp(...) prefactor amplifies that to ~1e-13.
        for a in (0.1, 0.5, 1.0, 2.5, 17.0, 120.0):
            for x in (0.0, 1e-9, 0.2, 1.0, a, 3.0 * a + 5.0):
                assert pure.reg_lower_gamma(a, x) == pytest.approx(
                    compiled.reg_lower_gamma(a, x), rel=1e-12, abs=1e-15
                )
                assert pure.reg_upper_gamma(a, x) == pytest.approx(
                    compiled.reg_upper_gamma(a, x), rel=1e-12, abs=1e-15
                )

    def test_reg_inc_beta(self):
        for a in (0.3, 1.0, 4.5, 30.0):
            for b in (0.7, 2.0, 12.0):
                for x in (0.0, 1e-7, 0.25, 0.5, 0.93, 1.0):
                    assert pure.reg_inc_beta(a, b, x) == pytest.approx(
                        compiled.reg_inc_beta(a, b, x), rel=1e-13, abs=1e-15
                    )

    def test_gammainc_inv(self):
        ps = (1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1.0 - 1e-6)
        for a in (0.25, 0.5, 1.0, 2.0, 8.0, 60.0):
            for p in ps:
                assert pure.gammainc_inv(a, p) == pytest.approx(
                    compiled.gammainc_inv(a, p), rel=1e-13
                )

    def test_gammainc_inv_q(self):
        for a in (0.5, 1.0, 3.0, 25.0):
            for q in (1e-300, 1e-120, 1e-15, 1e-4, 0.2, 0.499):
                assert pure.gammainc_inv_q(a, q) == pytest.approx(
                    compiled.gammainc_inv_q(a, q), rel=1e-13
                )

    def test_betainc_inv(self):
        for a in (0.4, 1.0, 3.0, 20.0):
            for b in (0.6, 2.5, 15.0):
                for p in (1e-9, 0.02, 0.5, 0.97, 1.0 - 1e-4):
                    assert pure.betainc_inv(a, b, p) == pytest.approx(
                        compiled.betainc_inv(a, b, p), rel=1e-10, abs=1e-13
                    )

    def test_student_radial_quantile(self):
        for k in (1, 2, 3, 6):
            for nu in (2.5, 3.0, 5.0, 12.0):
                for u in (1e-9, 0.05, 0.5, 0.95, 1.0 - 1e-9):
                    assert pure.student_radial_quantile(k, nu, u) == pytest.approx(
                        compiled.student_radial_quantile(k, nu, u), rel=1e-11
                    )

    def test_inverse_forward_residual_at_double_edge(self):
        # At the largest double below 1 the two backends may return
        # different inverses; both must still solve the equation exactly
        # at double resolution.
        for a in (0.5, 1.0, 2.0):
            for impl in (pure, compiled):
                x = impl.gammainc_inv(a, P_EDGE)
                assert abs(impl.reg_lower_gamma(a, x) - P_EDGE) <= 4e-16
        for a, b in ((0.5, 2.0), (1.5, 1.5)):
            for impl in (pure, compiled):
                x = impl.betainc_inv(a, b, P_EDGE)
                assert abs(impl.reg_inc_beta(a, b, x) - P_EDGE) <= 4e-16


class TestBatchParity:
    def test_gammainc_inv_batch_matches_scalar(self):
        u = np.linspace(1.0 / 201.0, 200.0 / 201.0, 200)
        for impl in (pure, compiled):
            batch = np.asarray(impl.gammainc_inv_batch(1.5, u))
            scalar = np.array([impl.gammainc_inv(1.5, float(v)) for v in u])
            assert np.array_equal(batch, scalar)

    def test_student_batch_matches_scalar(self):
        u = np.linspace(0.01, 0.99, 57)
        for impl in (pure, compiled):
            batch = np.asarray(impl.student_radial_quantile_batch(3, 4.0, u))
            scalar = np.array(
                [impl.student_radial_quantile(3, 4.0, float(v)) for v in u]
            )
            assert np.array_equal(batch, scalar)

    def test_batches_cross_backend(self):
        u = np.linspace(0.002, 0.998, 499)
        a = np.asarray(pure.gammainc_inv_batch(2.0, u))
        b = np.asarray(compiled.gammainc_inv_batch(2.0, u))
        assert np.max(np.abs(a - b) / a) < 1e-13


class TestFixedPointParity:
    @staticmethod
    def _data(seed, n, k):
        rng = np.random.default_rng(seed)
        return rng.standard_normal((n, k)) @ rng.standard_normal((k, k)) + rng.standard_normal(k)

    def test_weiszfeld_objective(self):
        # The k = 1 even-n median is an interval, so locations may differ
        # while the objective agrees; compare objectives for every k.
        for seed in range(8):
            k = 1 + seed % 4
            x = self._data(seed, 30 + seed, k)
            lp = np.asarray(pure.weiszfeld_median(x, 1e-10, 2000)[0])
            lc = np.asarray(compiled.weiszfeld_median(x, 1e-10, 2000)[0])
            op = float(np.linalg.norm(x - lp, axis=1).sum())
            oc = float(np.linalg.norm(x - lc, axis=1).sum())
            assert oc == pytest.approx(op, rel=1e-12)
            if k > 1:
                assert np.max(np.abs(lp - lc)) < 1e-7

    def test_tyler_same_location(self):
        for seed in range(6):
            k = 2 + seed % 3
            x = self._data(100 + seed, 40, k)
            loc = np.asarray(pure.weiszfeld_median(x, 1e-10, 2000)[0])
            vp = np.asarray(pure.tyler_fixed_point(x, loc, 1e-11, 2000)[0])
            vc = np.asarray(compiled.tyler_fixed_point(x, loc, 1e-11, 2000)[0])
            assert np.max(np.abs(vp - vc)) < 1e-9

    def test_joint_fixed_point(self):
        for seed in range(8):
            k = 1 + seed % 5
            n = 20 + 5 * seed
            x = self._data(200 + seed, n, k)
            mp, vp, _, stp = pure.joint_fixed_point(x, 1e-10, 2000)
            mcv, vcv, _, stc = compiled.joint_fixed_point(x, 1e-10, 2000)
            assert stp == 0 and stc == 0
            assert np.max(np.abs(np.asarray(mp) - np.asarray(mcv))) < 1e-9
            assert np.max(np.abs(np.asarray(vp) - np.asarray(vcv))) < 1e-9

    def test_joint_degenerate_status_matches(self):
        line = np.outer(np.arange(12.0), np.array([1.0, 2.0]))
        assert pure.joint_fixed_point(line, 1e-10, 500)[3] == 2
        assert compiled.joint_fixed_point(line, 1e-10, 500)[3] == 2

    def test_large_dimension_delegates(self):
        # Dimensions beyond the compiled stack-buffer limit route to the
        # pure implementation and must agree exactly.
        rng = np.random.default_rng(9)
        k = 40
        x = rng.standard_normal((3 * k, k))
        mp, vp, ip, sp_ = pure.joint_fixed_point(x, 1e-8, 500)
        mcv, vcv, icv, sc = compiled.joint_fixed_point(x, 1e-8, 500)
        assert sp_ == sc == 0
        assert np.array_equal(np.asarray(mp), np.asarray(mcv))
        assert np.array_equal(np.asarray(vp), np.asarray(vcv))


def test_statistics_match_across_backends(tmp_path):
    # End to end: the four statistics on one dataset, computed by each
    # backend in a fresh interpreter, agree to near machine precision.
    script = tmp_path / "stats_probe.py"
    script.write_text(
        "import json\n"
        "import numpy as np\n"
        "from ellrank import BlockData, PairedSample\n"
        "from ellrank.hypotests import wilks_test, sign_test, wilcoxon_test, vdw_test\n"
        "rng = np.random.default_rng(314)\n"
        "sample = PairedSample(\n"
        "    block1=BlockData(k=2, observations=rng.standard_normal((45, 2))),\n"
        "    block2=BlockData(k=3, observations=rng.standard_normal((45, 3))),\n"
        ")\n"
        "out = {fn.__name__: fn(sample).statistic\n"
        "       for fn in (wilks_test, sign_test, wilcoxon_test, vdw_test)}\n"
        "print(json.dumps(out))\n"
    )
    results = {}
    for forced in ("pure", "compiled"):
        env = dict(os.environ, ELLRANK_BACKEND=forced)
        out = subprocess.run(
            [sys.executable, str(script)], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        results[forced] = __import__("json").loads(out.stdout)
    for name, v in results["pure"].items():
        assert results["compiled"][name] == pytest.approx(v, rel=1e-10)
