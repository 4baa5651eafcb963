import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from northpole.densities import cdf_f, sample_f
from northpole.mc import (
    REFERENCE_TABLE,
    EstimateWithCI,
    KsReport,
    clt_check,
    estimate_mean,
    estimate_prob_positive,
    ks_critical_coefficient,
    ks_with_retry,
    one_sample_ks,
    reproduce_table,
    two_sample_ks,
)
from northpole.pole import sample_u2, sample_u3
from northpole.rng import RngStream

# P(U_2 > 0) at p = 3 from p_u2_positive_p3_quadrature(); frozen
P_U2_POSITIVE_P3 = 0.7071067811876219


def p_u2_positive_p3_quadrature():
    """2-D quadrature of 1{xi1^2 + (1 - xi1^2) xi2 > 0} f(xi1|3) f(xi2|2).

    f(.|3) is 1/2 on (-1, 1); xi2 = sin(theta) turns f(.|2) into the uniform
    density 1/pi on theta in (-pi/2, pi/2), and the indicator becomes a lower
    limit on theta.
    """
    def lower(t):
        return math.asin(max(-1.0, -t * t / (1.0 - t * t)))

    val, _ = integrate.dblquad(lambda th, t: 0.5 / math.pi, -1, 1, lower, lambda t: math.pi / 2,
                               epsabs=1e-10, epsrel=1e-10)
    return val


class TestKsCritical:
    def test_coefficient_0001(self):
        assert ks_critical_coefficient(0.001) == pytest.approx(1.9495, abs=1e-3)
        assert ks_critical_coefficient(0.001) == pytest.approx(math.sqrt(-math.log(0.0005) / 2), abs=1e-15)

    def test_close_to_kolmogorov_quantile(self):
        # the exact Kolmogorov-distribution quantile at small alpha
        assert ks_critical_coefficient(0.001) == pytest.approx(special.kolmogi(0.001), abs=1e-3)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1])
    def test_bad_alpha(self, alpha):
        with pytest.raises(ValueError):
            ks_critical_coefficient(alpha)


class TestTwoSample:
    def test_identical(self, rng):
        xs = rng.normal(500)
        r = two_sample_ks(xs, xs.copy())
        assert r.statistic == 0.0 and r.passed

    def test_disjoint(self, rng):
        r = two_sample_ks(rng.uniform(300), 2 + rng.uniform(200))
        assert r.statistic == 1.0 and not r.passed
        assert (r.n, r.m) == (300, 200)

    def test_critical_formula(self, rng):
        r = two_sample_ks(rng.normal(400), rng.normal(100), alpha=0.01)
        assert r.critical == pytest.approx(ks_critical_coefficient(0.01) * math.sqrt(500 / 40_000), rel=1e-15)

    def test_matches_scipy(self, rng):
        for n, m in ((50, 70), (1000, 999), (5, 3)):
            xs, ys = rng.normal(n), 0.2 + rng.normal(m)
            assert two_sample_ks(xs, ys).statistic == pytest.approx(stats.ks_2samp(xs, ys).statistic, abs=1e-15)

    def test_ties(self):
        xs = [0, 0, 1, 1, 1]
        ys = [0, 1, 1, 1, 1]
        assert two_sample_ks(xs, ys).statistic == pytest.approx(0.2)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40),
           st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40))
    def test_symmetric(self, xs, ys):
        assert two_sample_ks(xs, ys).statistic == two_sample_ks(ys, xs).statistic

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(-50, 50), min_size=1, max_size=40),
           st.lists(st.integers(-50, 50), min_size=1, max_size=40),
           st.sampled_from(["exp", "cube", "affine"]))
    def test_monotone_invariance(self, xs, ys, which):
        f = {"exp": lambda v: np.exp(np.asarray(v) / 10.0),
             "cube": lambda v: np.asarray(v, dtype=float) ** 3,
             "affine": lambda v: 3.0 * np.asarray(v) - 7.0}[which]
        assert two_sample_ks(f(xs), f(ys)).statistic == two_sample_ks(xs, ys).statistic

    def test_same_sampler_different_seeds(self):
        def check(attempt):
            a = sample_u2(4, RngStream(11).child("a", attempt), 100_000)
            b = sample_u2(4, RngStream(12).child("b", attempt), 100_000)
            return two_sample_ks(a, b)

        report, _ = ks_with_retry(check)
        assert report.passed

    def test_empty(self):
        with pytest.raises(ValueError):
            two_sample_ks([], [1.0])


class TestOneSample:
    def test_self_test_uniform(self, ks_pass):
        ks_pass(lambda s: one_sample_ks(2 * s.uniform(100_000) - 1, lambda x: cdf_f(x, 3)))

    def test_constant_sample(self):
        r = one_sample_ks(np.zeros(10_000), special.ndtr)
        assert r.statistic >= 0.5 and not r.passed

    def test_matches_scipy(self, rng):
        xs = rng.normal(2000) * 1.1
        assert one_sample_ks(xs, special.ndtr).statistic == pytest.approx(
            stats.kstest(xs, "norm").statistic, abs=1e-15)

    def test_sample_f5(self, ks_pass):
        ks_pass(lambda s: one_sample_ks(sample_f(5, s, 100_000), lambda x: cdf_f(x, 5)))

    def test_report_fields(self, rng):
        r = one_sample_ks(rng.uniform(100), lambda x: x, alpha=0.05, name="u")
        assert isinstance(r, KsReport) and r.m == 0 and r.name == "u"
        assert r.critical == pytest.approx(ks_critical_coefficient(0.05) / 10)
        assert r.passed == (r.statistic < r.critical)

    def test_empty(self):
        with pytest.raises(ValueError):
            one_sample_ks([], special.ndtr)


class TestRetry:
    def _report(self, passed):
        return KsReport(0.0, 1, 0, 0.001, 1.0, passed)

    def test_first_pass(self):
        seen = []
        report, attempts = ks_with_retry(lambda a: seen.append(a) or self._report(True))
        assert attempts == 1 and seen == [0]

    def test_second_attempt_decides(self):
        report, attempts = ks_with_retry(lambda a: self._report(a == 1))
        assert attempts == 2 and report.passed
        report, attempts = ks_with_retry(lambda a: self._report(False))
        assert attempts == 2 and not report.passed


class TestEstimates:
    def test_constant_positive(self):
        est = estimate_prob_positive(lambda n: np.ones(n), 1000)
        assert (est.mean, est.std_error, est.n) == (1.0, 0.0, 1000)

    def test_binomial_se(self):
        xs = np.array([1.0] * 300 + [-1.0] * 700)
        est = estimate_prob_positive(lambda n: xs, 1000)
        assert est.mean == 0.3
        assert est.std_error == math.sqrt(0.3 * 0.7 / 1000)

    def test_zero_is_not_positive(self):
        assert estimate_prob_positive(lambda n: np.zeros(n), 1000).mean == 0.0

    def test_too_few(self):
        with pytest.raises(ValueError):
            estimate_prob_positive(lambda n: np.ones(n), 999)
        with pytest.raises(ValueError):
            estimate_mean(lambda n: np.ones(n), 10)

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            estimate_mean(lambda n: np.ones(n + 1), 1000)

    def test_constant_mean(self):
        est = estimate_mean(lambda n: np.full(n, 2.5), 1000)
        assert est.mean == 2.5 and est.std_error == 0.0

    def test_mean_u2_u3(self, rng):
        assert estimate_mean(lambda n: sample_u2(5, rng, n), 1_000_000).within(0.2)
        assert estimate_mean(lambda n: sample_u3(5, rng, n), 1_000_000).within(0.0)

    def test_within(self):
        est = EstimateWithCI(1.0, 0.1, 100)
        assert est.within(1.39) and not est.within(1.41)


class TestProbPositiveP3:
    def test_oracle_value_frozen(self):
        assert p_u2_positive_p3_quadrature() == pytest.approx(P_U2_POSITIVE_P3, abs=1e-9)

    def test_estimate_against_quadrature_and_table(self, rng):
        est = estimate_prob_positive(lambda n: sample_u2(3, rng, n), 1_000_000)
        assert abs(est.mean - P_U2_POSITIVE_P3) <= 4 * est.std_error
        assert est.mean == pytest.approx(REFERENCE_TABLE[3], abs=0.01)


class TestTable:
    def test_rows_and_se(self):
        rows = reproduce_table([3, 4], 1000, RngStream(5))
        assert [r.p for r in rows] == [3, 4] and all(r.n == 1000 for r in rows)
        for r in rows:
            assert r.std_error == math.sqrt(r.prob_positive * (1 - r.prob_positive) / r.n)
        assert rows[0].std_error == pytest.approx(math.sqrt(0.71 * 0.29 / 1000), abs=1e-3)

    def test_reproducible(self):
        assert reproduce_table([3, 10], 2000, RngStream(8)) == reproduce_table([3, 10], 2000, RngStream(8))

    def test_monotone_in_p(self):
        rows = reproduce_table([3, 4, 5, 10, 20, 50], 200_000, RngStream(13))
        for a, b in zip(rows, rows[1:]):
            assert b.prob_positive <= a.prob_positive + 2 * max(a.std_error, b.std_error)

    def test_rejects_small_p(self):
        with pytest.raises(ValueError):
            reproduce_table([2], 1000, RngStream(1))


class TestClt:
    def test_small_p_is_visibly_non_normal(self, rng):
        assert clt_check(3, 2, 20_000, rng).statistic > 0.1

    @pytest.mark.parametrize("k", [2, 3])
    def test_large_p_close_to_normal(self, rng, k):
        assert clt_check(400, k, 100_000, rng).statistic <= 0.05

    def test_only_k2_k3(self, rng):
        with pytest.raises(ValueError):
            clt_check(10, 1, 1000, rng)
