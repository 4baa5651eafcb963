import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from northpole.densities import beta_cdf_g0, cdf_f
from northpole.haar import decompose_gamma, sample_haar_decomposition, sample_haar_qr
from northpole.linalg import sample_uniform_sphere
from northpole.mc import estimate_mean, one_sample_ks, two_sample_ks
from northpole.pole import (
    XiTriple,
    sample_u1,
    sample_u2,
    sample_u3,
    sample_u_direct,
    sample_u_exact,
    sample_xi,
    u2_identity,
    u2_kernel,
    u3_identity,
    u3_kernel,
    u_k_direct,
)
from tests.helpers import rotation

unit = st.floats(-1, 1)


class TestDirect:
    @pytest.mark.parametrize("k", [1, 2, 3, 7])
    def test_identity_matrix(self, k):
        assert u_k_direct(np.eye(5), k) == 1.0

    def test_rotation(self):
        assert u_k_direct(rotation(math.pi / 3, 4), 2) == pytest.approx(-0.5, abs=1e-15)

    def test_rejects_non_orthogonal(self):
        with pytest.raises(ValueError):
            u_k_direct(np.full((3, 3), 0.2), 2)

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            u_k_direct(np.eye(3), 0)

    def test_stack(self, rng):
        g = sample_haar_qr(4, rng, size=10).gamma
        assert np.array_equal(u_k_direct(g, 1), g[:, 0, 0])


class TestIdentities:
    def test_u2_single(self, rng):
        g = sample_haar_qr(6, rng).gamma
        assert u_k_direct(g, 2) == pytest.approx(u2_identity(decompose_gamma(g)), abs=1e-10)

    @pytest.mark.parametrize("p", range(3, 13))
    def test_u2_and_u3_over_draws(self, rng, p):
        for sampler in (sample_haar_qr, sample_haar_decomposition):
            g = sampler(p, rng, size=2000).gamma
            part = decompose_gamma(g)
            assert np.max(np.abs(u_k_direct(g, 2) - u2_identity(part))) <= 1e-10
            assert np.max(np.abs(u_k_direct(g, 3) - u3_identity(part))) <= 1e-10

    def test_u2_zero_corner(self, rng):
        part = decompose_gamma(sample_haar_qr(5, rng).gamma)
        part = part.__class__(0.0, part.gamma21, part.gamma12_t, part.gamma22, part.w1, part.w2)
        assert u2_identity(part) == pytest.approx(float(part.w2 @ part.w1), abs=1e-15)
        assert u3_identity(part) == pytest.approx(float(part.w2 @ part.gamma22 @ part.w1), abs=1e-15)

    def test_u2_equal_directions(self, rng):
        part = decompose_gamma(sample_haar_qr(5, rng).gamma)
        part = part.__class__(0.3, part.gamma21, part.gamma12_t, part.gamma22, part.w1, part.w1)
        assert u2_identity(part) == pytest.approx(1.0, abs=1e-15)

    def test_identity_matrix_is_outside_domain(self):
        from northpole.haar import OutsideOpPlusError
        with pytest.raises(OutsideOpPlusError):
            u3_identity(decompose_gamma(np.eye(4)))


class TestKernels:
    def test_u2_examples(self):
        assert u2_kernel(1.0, -0.7) == 1.0
        assert u2_kernel(0.0, 0.3) == 0.3
        assert u2_kernel(0.6, 0.5) == pytest.approx(0.68, abs=1e-15)

    def test_u3_examples(self):
        assert u3_kernel(1.0, 0.2, -0.9) == 1.0
        assert u3_kernel(0.0, 0.4, 0.7) == pytest.approx((1 - 0.16) * 0.7, abs=1e-15)
        assert u3_kernel(0.5, 0.5, 0.5) == pytest.approx(0.6875, abs=1e-15)

    def test_range_on_grid(self):
        g = np.linspace(-1, 1, 41)
        a, b, c = np.meshgrid(g, g, g, indexing="ij")
        assert np.all(np.abs(u2_kernel(a[..., 0], b[..., 0])) <= 1 + 1e-12)
        assert np.all(np.abs(u3_kernel(a, b, c)) <= 1 + 1e-12)

    @given(unit, unit, unit)
    def test_range_random(self, x1, x2, x3):
        assert abs(u2_kernel(x1, x2)) <= 1 + 1e-12
        assert abs(u3_kernel(x1, x2, x3)) <= 1 + 1e-12


class TestRepresentationSamplers:
    def test_xi_triple_p3(self, rng):
        t = sample_xi(3, rng, 1000)
        assert isinstance(t, XiTriple)
        assert set(np.unique(t.xi3)) == {-1.0, 1.0}

    def test_ranges(self, rng):
        for f in (sample_u1, sample_u2, sample_u3):
            xs = f(4, rng, 5000)
            assert np.all(np.abs(xs) <= 1.0)
        assert isinstance(sample_u3(5, rng), float)

    @pytest.mark.parametrize("f,p", [(sample_u2, 2), (sample_u3, 2), (sample_u1, 1)])
    def test_dimension_guard(self, rng, f, p):
        with pytest.raises(ValueError):
            f(p, rng)

    def test_exact_k4_refused(self, rng):
        with pytest.raises(ValueError, match="no exact representation"):
            sample_u_exact(4, 5, rng)

    def test_u1_law(self, ks_pass):
        ks_pass(lambda s: one_sample_ks(sample_u1(6, s, 100_000), lambda x: cdf_f(x, 6)))
        ks_pass(lambda s: one_sample_ks(sample_u1(6, s, 100_000) ** 2, lambda y: beta_cdf_g0(y, 6)), "sq")

    def test_u2_mean(self, rng):
        est = estimate_mean(lambda n: sample_u2(5, rng, n), 1_000_000)
        assert est.within(0.2, 4)

    def test_u3_mean(self, rng):
        est = estimate_mean(lambda n: sample_u3(5, rng, n), 1_000_000)
        assert est.within(0.0, 4)

    @pytest.mark.parametrize("k,p", [(2, 3), (3, 3), (3, 5)])
    def test_matches_direct(self, ks_pass, k, p):
        def check(s):
            direct = sample_u_direct((k,), p, 100_000, s)[k]
            return two_sample_ks(sample_u_exact(k, p, s, 100_000), direct)

        ks_pass(check, f"rep{k}{p}")


class TestDirectSampler:
    def test_outputs(self, rng):
        out = sample_u_direct((3, 1), 4, 2500, rng, method="decomposition")
        assert set(out) == {1, 3, "defect"}
        assert out[1].shape == (2500,) and out["defect"] <= 1e-10

    def test_high_power_allowed(self, rng):
        out = sample_u_direct((6,), 5, 100, rng)
        assert np.all(np.abs(out[6]) <= 1 + 1e-12)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_base_point_invariance(self, ks_pass, rng, k):
        y = sample_uniform_sphere(5, rng.child("y"))

        def check(s):
            at_y = sample_u_direct((k,), 5, 100_000, s, base=y)[k]
            at_pole = sample_u_direct((k,), 5, 100_000, s)[k]
            return two_sample_ks(at_y, at_pole)

        ks_pass(check, f"base{k}")
