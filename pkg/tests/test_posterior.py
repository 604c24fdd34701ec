"""
Tests for joint posterior draws, posterior measures, batches and posterior moments
"""
import math

import numpy as np
import pytest
from scipy import integrate, stats

from src.errors import DomainError
from src.families.mittag_leffler import MLTiltParams, ml_beta_lambda_pdf, ml_posterior_rk_pdf
from src.gibbs.model import Custom, GeneralizedGamma, GibbsModel, PitmanYor, register_custom_h
from src.gibbs.partition import Partition
from src.gibbs.prior import predict
from src.posterior.joint import (SIR_ESS_FLOOR, choose_method, representation_scale, sample_joint,
                                 sample_joint_rt_t1, sample_joint_rt_t2)
from src.posterior.measure import PosteriorMeasure
from src.posterior.moments import (importance_identity_check, posterior_mean_atom_masses, posterior_t_density_t1,
                                   posterior_t_density_t2)
from src.posterior.sampler import sample_posterior_batch, sample_posterior_t1, sample_posterior_t2
from src.sampling.rng import RngState
from src.simulation.stats import chi_square_pmf
from src.special.numbers import StableParams

SEED = 20240613
P_FLOOR = 1e-3
Z_MAX = 4.0
EPS = 1e-2

register_custom_h('posterior-unbounded', lambda t: np.ones_like(np.asarray(t, dtype=float)))
register_custom_h('posterior-decreasing', lambda t: np.exp(1.0 - np.asarray(t, dtype=float)), monotone='decreasing')


def model(alpha, family):
    return GibbsModel(StableParams(alpha), family)


def z_score(values, target):
    values = np.asarray(values, dtype=float)
    return (values.mean() - target) / (values.std(ddof=1) / math.sqrt(values.size))


def integrate_log_scale(f):
    lower, _ = integrate.quad(lambda s: f(math.exp(s)) * math.exp(s), -np.inf, 0.0, limit=400)
    upper, _ = integrate.quad(lambda s: f(math.exp(s)) * math.exp(s), 0.0, np.inf, limit=400)
    return lower + upper


class TestChooseMethod:
    def test_auto(self):
        assert choose_method(model(0.5, PitmanYor(1.0))) == 'exact'
        assert choose_method(model(0.5, GeneralizedGamma(1.0))) == 'rejection'
        assert choose_method(MLTiltParams(0.5, 0.5, 0, 1.0).to_model()) == 'rejection'
        assert choose_method(model(0.5, Custom('posterior-unbounded'))) == 'sir'
        assert choose_method(model(0.5, Custom('posterior-decreasing'))) == 'rejection'

    def test_explicit_mismatch(self):
        with pytest.raises(DomainError):
            choose_method(model(0.5, GeneralizedGamma(1.0)), 'exact')
        with pytest.raises(DomainError):
            choose_method(model(0.5, Custom('posterior-unbounded')), 'rejection')
        with pytest.raises(DomainError):
            choose_method(model(0.5, PitmanYor(0.0)), 'gibbs')

    def test_sir_is_always_allowed(self):
        assert choose_method(model(0.5, PitmanYor(0.0)), 'sir') == 'sir'


class TestJointDraws:
    def test_pitman_yor_scale_splits_are_beta(self):
        m = model(0.5, PitmanYor(1.0))
        rng = RngState(SEED)
        first = [sample_joint_rt_t1(rng, m, 3, 2)[0] for _ in range(2000)]
        second = [sample_joint_rt_t2(rng, m, 3, 2)[0] for _ in range(2000)]
        assert stats.kstest(first, stats.beta(2.0, 2.0).cdf).pvalue > P_FLOOR
        assert stats.kstest(second, stats.beta(4.0, 4.0).cdf).pvalue > P_FLOOR

    def test_mittag_leffler_rejection_scale_split(self):
        params = MLTiltParams(StableParams(0.5), 0.5, 0, 2.0)
        m = params.to_model()
        rng = RngState(SEED)
        draws = [sample_joint(rng, m, 3, 2) for _ in range(4000)]
        assert {d.method for d in draws} == {'rejection'}
        expected, _ = integrate.quad(lambda b: b * ml_posterior_rk_pdf(params, 3, 2, b), 0.0, 1.0, limit=400)
        assert abs(z_score([d.b for d in draws], expected)) < Z_MAX

    def test_generalized_gamma_total_matches_density(self):
        m = model(0.5, GeneralizedGamma(1.0))
        rng = RngState(SEED)
        totals = np.array([sample_joint_rt_t1(rng, m, 3, 2)[1] for _ in range(4000)])
        expected = integrate_log_scale(lambda t: math.exp(-t) * posterior_t_density_t1(m, 3, 2, t))
        assert abs(z_score(np.exp(-totals), expected)) < Z_MAX

    def test_sir_with_flat_tilt(self):
        # h = 1 leaves R_k ~ Beta(k alpha, n - k alpha)
        m = model(0.5, Custom('posterior-unbounded'))
        rng = RngState(SEED)
        draws = [sample_joint(rng, m, 3, 2, proposals=256) for _ in range(1000)]
        assert {d.method for d in draws} == {'sir'}
        assert min(d.ess for d in draws) >= SIR_ESS_FLOOR
        assert stats.kstest([d.b for d in draws], stats.beta(1.0, 2.0).cdf).pvalue > P_FLOOR

    def test_exact_and_rejection_draws_report_unit_ess(self):
        rng = RngState(SEED)
        exact = sample_joint(rng, model(0.5, PitmanYor(1.0)), 3, 2, proposals=4096)
        accepted = sample_joint(rng, model(0.5, GeneralizedGamma(1.0)), 3, 2, proposals=4096)
        assert (exact.method, exact.ess) == ('exact', 1.0)
        assert (accepted.method, accepted.ess) == ('rejection', 1.0)
        measure = sample_posterior_t1(rng, model(0.5, PitmanYor(1.0)), (2, 1), eps=EPS)
        assert measure.ess == 1.0

    def test_sticks_attached_when_requested(self):
        draw = sample_joint(RngState(SEED), model(0.3, PitmanYor(0.5)), 4, 2, with_sticks=True, eps=EPS)
        assert draw.sticks is not None and draw.sticks.residual <= EPS

    @pytest.mark.parametrize("n,k,representation,proposals", [(2, 3, 'T1', 16), (0, 0, 'T1', 16),
                                                               (3, 2, 'T3', 16), (3, 2, 'T1', 0)])
    def test_domain(self, n, k, representation, proposals):
        with pytest.raises(DomainError):
            sample_joint(RngState(SEED), model(0.5, PitmanYor(0.0)), n, k, representation, proposals)

    def test_representation_scale(self):
        m = model(0.5, PitmanYor(0.0))
        assert representation_scale(m, 0.3, 'T1') == 0.3
        assert representation_scale(m, 0.3, 'T2') == pytest.approx(0.09)


class TestSirAccuracy:
    """Forced SIR against known posterior laws at the default pool size."""

    @pytest.mark.parametrize("representation,shapes", [('T1', (2.7, 10.8)), ('T2', (9.0, 36.0))])
    def test_pitman_yor_scale_split(self, representation, shapes):
        # PY(1.5), alpha = 0.3, n = 12, k = 4: both splits have mean 0.2
        m = model(0.3, PitmanYor(1.5))
        rng = RngState(SEED)
        draws = [sample_joint(rng, m, 12, 4, representation, method='sir') for _ in range(600)]
        splits = [d.b for d in draws]
        assert min(d.ess for d in draws) >= SIR_ESS_FLOOR
        assert abs(z_score(splits, 0.2)) < Z_MAX
        assert stats.kstest(splits, stats.beta(*shapes).cdf).pvalue > P_FLOOR

    @pytest.mark.parametrize("representation", ['T1', 'T2'])
    def test_mittag_leffler_scale_split(self, representation):
        params = MLTiltParams(StableParams(0.3), 0.5, 0, 1.0)
        m = params.to_model()
        pdf = ml_posterior_rk_pdf if representation == 'T1' else ml_beta_lambda_pdf
        rng = RngState(SEED)
        splits = [sample_joint(rng, m, 3, 2, representation, method='sir').b for _ in range(2000)]
        edges = np.linspace(0.0, 1.0, 11)
        counts, _ = np.histogram(splits, bins=edges)
        probs = np.array([integrate.quad(lambda b: pdf(params, 3, 2, b), lo, hi, limit=200)[0]
                          for lo, hi in zip(edges[:-1], edges[1:])])
        assert chi_square_pmf(counts, probs / probs.sum())[1] > P_FLOOR


class TestPosteriorMeasure:
    @pytest.mark.parametrize("sampler", [sample_posterior_t1, sample_posterior_t2])
    @pytest.mark.parametrize("family", [PitmanYor(0.5), GeneralizedGamma(1.0)])
    def test_masses(self, sampler, family):
        p = Partition((3, 1, 2))
        measure = sampler(RngState(SEED), model(0.3, family), p, eps=EPS)
        assert measure.k == 3
        assert measure.total_mass() == pytest.approx(1.0, abs=1e-10)
        assert measure.residual <= EPS
        assert 0.0 < measure.scale_split < 1.0

    def test_first_representation_split(self):
        measure = sample_posterior_t1(RngState(SEED), model(0.3, PitmanYor(0.5)), (2, 1), eps=EPS)
        assert measure.fixed_mass() == pytest.approx(1.0 - measure.scale_split, abs=1e-12)
        assert measure.continuous_mass() == pytest.approx(measure.scale_split, abs=1e-12)

    def test_dict_round_trip(self):
        measure = sample_posterior_t2(RngState(SEED), model(0.3, PitmanYor(0.5)), (2, 1), eps=EPS)
        restored = PosteriorMeasure.from_dict(measure.to_dict())
        np.testing.assert_array_equal(restored.fixed_atoms, measure.fixed_atoms)
        np.testing.assert_array_equal(restored.continuous, measure.continuous)
        assert (restored.residual, restored.method) == (measure.residual, measure.method)
        assert measure.to_dict()['fixed_atoms'][0][0] == 1

    def test_validation(self):
        with pytest.raises(DomainError):
            PosteriorMeasure('T1', np.array([0.5]), np.array([0.4]), 0.0, 0.5, 1.0, 1.0)
        with pytest.raises(DomainError):
            PosteriorMeasure('T1', np.array([1.2]), np.array([-0.2]), 0.0, 0.5, 1.0, 1.0)
        with pytest.raises(DomainError):
            PosteriorMeasure('T9', np.array([1.0]), np.array([]), 0.0, 0.5, 1.0, 1.0)


class TestBatch:
    def test_workers_do_not_change_draws(self):
        m = model(0.3, GeneralizedGamma(1.0))
        serial = sample_posterior_batch(SEED, m, (2, 2), 6, 'T2', workers=1, eps=EPS)
        threaded = sample_posterior_batch(SEED, m, (2, 2), 6, 'T2', workers=3, eps=EPS)
        for a, b in zip(serial, threaded):
            np.testing.assert_array_equal(a.fixed_atoms, b.fixed_atoms)
            np.testing.assert_array_equal(a.continuous, b.continuous)

    def test_draws_differ_across_streams(self):
        measures = sample_posterior_batch(SEED, model(0.3, PitmanYor(0.5)), (2, 1), 2, eps=EPS)
        assert measures[0].scale_split != measures[1].scale_split

    def test_unknown_representation(self):
        with pytest.raises(DomainError):
            sample_posterior_batch(SEED, model(0.3, PitmanYor(0.5)), (2, 1), 2, 'T3')


class TestMoments:
    def test_posterior_mean_is_prediction_rule(self):
        m = model(0.4, GeneralizedGamma(1.0))
        p = Partition((2, 1))
        new, masses = posterior_mean_atom_masses(m, p)
        new_rule, existing_rule = predict(m, p)
        assert new == new_rule
        np.testing.assert_array_equal(masses, existing_rule)

    @pytest.mark.parametrize("representation", ['T1', 'T2'])
    def test_mean_atom_masses_monte_carlo(self, representation):
        m = model(0.3, PitmanYor(1.0))
        p = Partition((3, 1))
        measures = sample_posterior_batch(SEED, m, p, 2000, representation, eps=EPS)
        new, masses = posterior_mean_atom_masses(m, p)
        fixed = np.array([x.fixed_atoms for x in measures])
        for j in range(p.k):
            assert abs(z_score(fixed[:, j], masses[j])) < Z_MAX
        assert abs(z_score([x.continuous_mass() for x in measures], new)) < Z_MAX

    def test_representations_agree_on_fixed_mass(self):
        m = model(0.3, PitmanYor(0.5))
        p = Partition((2, 1, 1))
        first = [x.fixed_mass() for x in sample_posterior_batch(SEED, m, p, 600, 'T1', eps=EPS)]
        second = [x.fixed_mass() for x in sample_posterior_batch(SEED + 1, m, p, 600, 'T2', eps=EPS)]
        assert stats.ks_2samp(first, second).pvalue > P_FLOOR

    @pytest.mark.parametrize("family", [PitmanYor(1.0), GeneralizedGamma(1.0)])
    @pytest.mark.parametrize("density", [posterior_t_density_t1, posterior_t_density_t2])
    def test_total_densities_normalized(self, family, density):
        m = model(0.5, family)
        assert integrate_log_scale(lambda t: density(m, 3, 2, t)) == pytest.approx(1.0, abs=1e-4)

    def test_pitman_yor_total_densities_closed_form(self):
        # at alpha = 1/2, 1/T_{1/2,c} ~ Gamma(c + 1/2, scale 4)
        m = model(0.5, PitmanYor(1.0))
        for t in (0.05, 0.3, 2.0):
            first = stats.gamma.pdf(1.0 / t, 2.5, scale=4.0) / t ** 2
            second = stats.gamma.pdf(1.0 / t, 4.5, scale=4.0) / t ** 2
            assert posterior_t_density_t1(m, 3, 2, t) == pytest.approx(first, rel=1e-4)
            assert posterior_t_density_t2(m, 3, 2, t) == pytest.approx(second, rel=1e-4)
        assert posterior_t_density_t1(m, 3, 2, -1.0) == 0.0

    @pytest.mark.parametrize("n", [0, 4])
    def test_importance_identity(self, n):
        m = model(0.5, GeneralizedGamma(1.0))

        def functional(sticks, partition):
            if partition is None:
                return sticks.weights.max(initial=0.0)
            return partition.k / n

        lhs, rhs, se = importance_identity_check(RngState(SEED), m, n, functional, 3000, eps=EPS)
        assert abs(lhs - rhs) < Z_MAX * se

    def test_importance_identity_needs_draws(self):
        with pytest.raises(DomainError):
            importance_identity_check(RngState(SEED), model(0.5, PitmanYor(0.0)), 2, lambda s, p: 1.0, 0)
