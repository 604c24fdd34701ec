"""
Tests for the special-function kernel
"""
import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, special, stats

from src.errors import DomainError
from src.special.numbers import (SpecialValue, StableParams, gen_stirling, log_canonical_eppf, log_pochhammer,
                                 neg_moment_stable, signed_log_pochhammer)
from src.special.series import hyp1f1_neg, ml3_function
from src.special.stable import (kanter_floor, kanter_function, ml_density, stable_cdf, stable_log_pdf,
                                stable_log_pdf_table, stable_pdf)


def integrate_log_scale(f):
    lower, _ = integrate.quad(lambda s: f(math.exp(s)) * math.exp(s), -np.inf, 0.0, limit=400)
    upper, _ = integrate.quad(lambda s: f(math.exp(s)) * math.exp(s), 0.0, np.inf, limit=400)
    return lower + upper


class TestStableParams:
    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5, float('nan')])
    def test_rejects_outside_open_interval(self, alpha):
        with pytest.raises(DomainError):
            StableParams(alpha)

    def test_kappa(self):
        assert StableParams(0.5).kappa == pytest.approx(1.0)
        assert StableParams(0.25).kappa == pytest.approx(1.0 / 3.0)


class TestSpecialValue:
    def test_zero_forces_minus_inf(self):
        zero = SpecialValue(5.0, 0)
        assert zero.log_magnitude == -math.inf
        assert zero.value == 0.0

    def test_nonzero_needs_finite_log(self):
        with pytest.raises(DomainError):
            SpecialValue(math.inf, 1)

    def test_arithmetic(self):
        x = SpecialValue.from_float(-2.0) * 3.0
        assert x.value == pytest.approx(-6.0)
        assert (x / SpecialValue.from_float(-2.0)).value == pytest.approx(3.0)
        assert (SpecialValue.from_float(1.5) + SpecialValue.from_float(2.5)).value == pytest.approx(4.0)
        assert (SpecialValue.from_float(2.0) - SpecialValue.from_float(2.0)).sign == 0

    def test_division_by_zero(self):
        with pytest.raises(DomainError):
            SpecialValue.one() / SpecialValue.zero()

    def test_round_trip_extremes(self):
        for x in (1e-300, 3.7e-12, 0.5, 1e300):
            assert SpecialValue.from_float(x).value == pytest.approx(x, rel=1e-15)


class TestPochhammer:
    def test_values(self):
        assert log_pochhammer(0.5, 0).log_magnitude == 0.0
        assert log_pochhammer(0.5, 3).value == pytest.approx(1.875, rel=1e-14)
        assert log_pochhammer(1.0, 5).value == pytest.approx(120.0, rel=1e-14)

    def test_additivity(self):
        for x in (0.3, 2.5):
            for n in range(40):
                step = log_pochhammer(x, n + 1).log_magnitude - log_pochhammer(x, n).log_magnitude
                assert step == pytest.approx(math.log(x + n), abs=1e-12)

    def test_vanishing_factor(self):
        assert signed_log_pochhammer(-2.0, 4).sign == 0
        with pytest.raises(DomainError):
            log_pochhammer(-2.0, 4)

    def test_negative_base_sign(self):
        # (-0.5)_3 = -0.5 * 0.5 * 1.5
        value = signed_log_pochhammer(-0.5, 3)
        assert value.value == pytest.approx(-0.375)


class TestStableDensity:
    def test_levy_closed_form(self):
        assert stable_pdf(StableParams(0.5), 1.0) == pytest.approx(math.exp(-0.25) / (2 * math.sqrt(math.pi)))

    def test_rejects_nonpositive_t(self):
        with pytest.raises(DomainError):
            stable_pdf(StableParams(0.3), 0.0)

    @pytest.mark.parametrize("alpha", [0.3, 0.7])
    def test_integrates_to_one(self, alpha):
        params = StableParams(alpha)
        assert integrate_log_scale(lambda t: stable_pdf(params, t)) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    def test_laplace_transform(self, alpha):
        params = StableParams(alpha)
        for lam in (0.5, 1.0, 2.0):
            value = integrate_log_scale(lambda t: math.exp(-lam * t) * stable_pdf(params, t))
            assert value == pytest.approx(math.exp(-lam ** alpha), abs=1e-6)

    def test_cdf_matches_density(self):
        params = StableParams(0.3)
        for t in (0.5, 2.0, 10.0):
            mass, _ = integrate.quad(lambda s: stable_pdf(params, math.exp(s)) * math.exp(s),
                                     -np.inf, math.log(t), limit=400)
            assert stable_cdf(params, t) == pytest.approx(mass, abs=1e-8)

    def test_half_cdf_closed_form(self):
        assert stable_cdf(StableParams(0.5), 4.0) == pytest.approx(float(special.erfc(0.25)))

    def test_table_matches_direct_quadrature(self):
        params = StableParams(0.3)
        points = np.array([0.2, 1.0, 3.0, 20.0])
        table = stable_log_pdf_table(params)
        np.testing.assert_allclose(table.log_pdf(points), [stable_log_pdf(params, t) for t in points],
                                   atol=1e-5)

    def test_table_is_shared(self):
        assert stable_log_pdf_table(StableParams(0.4)) is stable_log_pdf_table(StableParams(0.4))

    def test_kanter_floor_is_left_limit(self):
        params = StableParams(0.6)
        assert float(kanter_function(params, 1e-6)) == pytest.approx(kanter_floor(params), rel=1e-6)

    def test_ml_density_normalized(self):
        params = StableParams(0.5)
        assert integrate_log_scale(lambda s: ml_density(params, s, 0.5)) == pytest.approx(1.0, abs=1e-6)


class TestGeneralizedStirling:
    def test_small_values(self):
        params = StableParams(0.5)
        assert gen_stirling(params, 1, 1).value == pytest.approx(1.0)
        assert gen_stirling(params, 3, 2).value == pytest.approx(1.5)
        assert gen_stirling(params, 3, 3).value == pytest.approx(1.0)

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    def test_recursion(self, alpha):
        params = StableParams(alpha)
        for n in range(1, 15):
            for k in range(2, n + 1):
                lhs = gen_stirling(params, n + 1, k).value
                rhs = gen_stirling(params, n, k - 1).value + (n - k * alpha) * gen_stirling(params, n, k).value
                assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_block_count_law_normalizes(self):
        alpha = 0.3
        params = StableParams(alpha)
        for n in range(1, 13):
            total = sum(math.exp((k - 1) * math.log(alpha) + math.lgamma(k) - math.lgamma(n)
                                 + gen_stirling(params, n, k).log_magnitude) for k in range(1, n + 1))
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_large_n_stays_finite(self):
        value = gen_stirling(StableParams(0.5), 200, 20)
        assert value.sign == 1 and math.isfinite(value.log_magnitude)

    def test_k_out_of_range(self):
        with pytest.raises(DomainError):
            gen_stirling(StableParams(0.5), 3, 4)


def test_canonical_eppf_two_blocks():
    # p_alpha(2, 1) = alpha (1 - alpha) / 2
    assert log_canonical_eppf(StableParams(0.5), (2, 1)).value == pytest.approx(0.125)


class TestNegativeMoment:
    def test_values(self):
        params = StableParams(0.5)
        assert neg_moment_stable(params, 0.0).value == pytest.approx(1.0)
        assert neg_moment_stable(params, 1.0).value == pytest.approx(2.0)
        assert neg_moment_stable(params, 2.0).value == pytest.approx(12.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            neg_moment_stable(StableParams(0.5), -0.5)


ML_GAMMA = 0.5 / 0.3 + 1.0


def ml3_direct_sum(gamma, alpha, beta, lam, dps=250, n_terms=4000):
    with mpmath.workdps(dps):
        g, a, b, x = (mpmath.mpf(v) for v in (gamma, alpha, beta, lam))
        total = mpmath.fsum((-x) ** l / mpmath.factorial(l) * mpmath.rf(g, l) * mpmath.gamma(b)
                            * mpmath.rgamma(a * l + b) for l in range(n_terms))
        return float(total)


def ml3_laplace_inversion(gamma, alpha, beta, lam):
    """t^(beta-1) E(-lam t^alpha) has Laplace transform s^(alpha gamma - beta) / (s^alpha + lam)^gamma."""
    with mpmath.workdps(40):
        g, a, b, x = (mpmath.mpf(v) for v in (gamma, alpha, beta, lam))
        value = mpmath.invertlaplace(lambda s: s ** (a * g - b) * (s ** a + x) ** -g, 1, method="talbot")
        return float(value * mpmath.gamma(b))


class TestSeries:
    def test_ml3_at_zero(self):
        assert ml3_function(2.3, 0.4, 1.7, 0.0) == 1.0

    def test_ml3_half_stable(self):
        expected = 2.0 * math.e * stats.norm.cdf(-math.sqrt(2.0))
        assert ml3_function(1.0, 0.5, 1.0, 1.0) == pytest.approx(expected, rel=1e-10)

    def test_ml3_nonincreasing(self):
        values = [ml3_function(0.5 / 0.3 + 1.0, 0.3, 1.5, lam) for lam in (0.0, 0.5, 1.0, 2.0, 5.0, 20.0)]
        assert all(b <= a for a, b in zip(values, values[1:]))
        assert all(0 < v <= 1 for v in values)

    @pytest.mark.parametrize("lam", [3.0, 5.0])
    def test_ml3_matches_high_precision_sum(self, lam):
        expected = ml3_direct_sum(ML_GAMMA, 0.3, 1.5, lam)
        assert ml3_function(ML_GAMMA, 0.3, 1.5, lam) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("lam", [5.0, 20.0])
    def test_ml3_matches_laplace_inversion(self, lam):
        expected = ml3_laplace_inversion(ML_GAMMA, 0.3, 1.5, lam)
        assert ml3_function(ML_GAMMA, 0.3, 1.5, lam) == pytest.approx(expected, rel=1e-9)

    def test_ml3_cancellation_regime(self):
        # peak terms near exp(lam^2) cancel down to O(1 / lam)
        for lam in (3.5, 4.0, 4.5):
            expected = 2.0 * math.exp(lam ** 2 + stats.norm.logcdf(-lam * math.sqrt(2.0)))
            assert ml3_function(1.0, 0.5, 1.0, lam) == pytest.approx(expected, rel=1e-9)

    def test_ml3_large_argument(self):
        lam = 10.0
        expected = 2.0 * math.exp(lam ** 2 + stats.norm.logcdf(-lam * math.sqrt(2.0)))
        assert ml3_function(1.0, 0.5, 1.0, lam) == pytest.approx(expected, rel=1e-8)

    def test_ml3_domain(self):
        with pytest.raises(DomainError):
            ml3_function(1.0, 0.5, 1.0, -1.0)

    def test_hyp1f1_closed_form(self):
        assert hyp1f1_neg(1.0, 2.0, 2.0) == pytest.approx((1.0 - math.exp(-2.0)) / 2.0, rel=1e-12)
        assert hyp1f1_neg(0.7, 1.9, 0.0) == 1.0

    @pytest.mark.parametrize("a,b,lam", [(0.5, 1.5, 1.0), (2.0, 5.0, 3.0), (1.5, 4.0, 10.0)])
    def test_hyp1f1_matches_scipy(self, a, b, lam):
        assert hyp1f1_neg(a, b, lam) == pytest.approx(float(special.hyp1f1(a, b, -lam)), rel=1e-10)

    def test_hyp1f1_domain(self):
        with pytest.raises(DomainError):
            hyp1f1_neg(2.0, 1.0, 1.0)
