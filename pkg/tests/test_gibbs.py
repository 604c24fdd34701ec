"""
Tests for partitions, models, Gibbs weights and prior partition laws
"""
import math

import numpy as np
import pytest

from src.errors import DomainError
from src.gibbs.model import (Custom, GeneralizedGamma, GibbsModel, MittagLefflerTilt, PitmanYor, family_from_dict,
                             get_custom_h)
from src.gibbs.partition import Partition, integer_partitions, set_partitions
from src.gibbs.prior import (eppf, k_pmf, predict, profile_pmf, sample_marginal, sample_partition_sequential)
from src.gibbs.weights import gibbs_weight_v, psi_weight
from src.sampling.rng import RngState
from src.sampling.stable import sample_tilted_stable
from src.simulation.stats import chi_square_pmf
from src.special.numbers import StableParams

SEED = 7


def model(alpha, family):
    return GibbsModel(StableParams(alpha), family)


BUILT_IN = [PitmanYor(0.5), GeneralizedGamma(1.0), MittagLefflerTilt(1.0, 0.5), MittagLefflerTilt(2.0, 0.0, j=1)]


class TestPartition:
    def test_basic(self):
        p = Partition((2, 1))
        assert (p.n, p.k) == (3, 2)
        assert str(p) == "(2,1)"
        assert p.to_dict() == {'block_sizes': [2, 1]}

    @pytest.mark.parametrize("sizes", [(), (0, 1), (2, -1), (1.5,)])
    def test_rejects_bad_blocks(self, sizes):
        with pytest.raises(DomainError):
            Partition(sizes)

    @pytest.mark.parametrize("sizes,count", [((2, 1), 3), ((1, 1, 1), 1), ((2, 2), 3), ((3, 1), 4), ((4,), 1)])
    def test_multiplicity(self, sizes, count):
        assert Partition(sizes).multiplicity() == count

    def test_profile_and_seat(self):
        p = Partition((1, 3))
        assert p.profile() == (3, 1)
        assert p.seat(0).block_sizes == (2, 3)
        assert p.seat(2).block_sizes == (1, 3, 1)
        with pytest.raises(DomainError):
            p.seat(3)

    def test_from_labels(self):
        assert Partition.from_labels(['b', 'a', 'b', 'c', 'b']).block_sizes == (3, 1, 1)

    def test_integer_partitions(self):
        assert list(integer_partitions(4)) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]

    def test_set_partitions_are_bell_numbers(self):
        assert [sum(1 for _ in set_partitions(n)) for n in range(1, 7)] == [1, 2, 5, 15, 52, 203]

    def test_profile_counts_cover_set_partitions(self):
        n = 6
        assert sum(Partition(s).multiplicity() for s in integer_partitions(n)) == 203


class TestModel:
    @pytest.mark.parametrize("family", BUILT_IN + [Custom('unit')])
    def test_json_round_trip(self, family):
        m = model(0.4, family)
        assert GibbsModel.from_json(m.to_json()) == m

    def test_generalized_gamma_key(self):
        assert model(0.4, GeneralizedGamma(2.0)).to_dict()['family'] == {'type': 'generalized_gamma', 'lambda': 2.0}

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            family_from_dict({'type': 'dirichlet'})
        with pytest.raises(DomainError):
            GibbsModel.from_dict({'alpha': 0.5})

    @pytest.mark.parametrize("family", [PitmanYor(-0.6), GeneralizedGamma(0.0), MittagLefflerTilt(-1.0, 0.0),
                                        MittagLefflerTilt(1.0, 0.0, j=-1), Custom('no-such-h')])
    def test_validation(self, family):
        with pytest.raises(DomainError):
            model(0.5, family)

    @pytest.mark.parametrize("family", BUILT_IN)
    def test_h_normalized(self, family):
        assert model(0.4, family).normalization_gap() < 1e-6

    def test_sup_bounds(self):
        t = np.geomspace(1e-4, 1e4, 2000)
        for family in (GeneralizedGamma(1.0), MittagLefflerTilt(1.0, 0.5), PitmanYor(0.0)):
            m = model(0.4, family)
            assert np.all(m.log_h(t) <= m.log_sup_h() + 1e-12)
        assert model(0.4, PitmanYor(0.5)).log_sup_h() is None

    def test_unit_registered(self):
        assert get_custom_h('unit').sup_h == 1.0
        assert model(0.5, Custom('unit')).h(3.0) == 1.0


class TestWeights:
    def test_psi_one_one(self):
        for family in BUILT_IN:
            assert psi_weight(model(0.3, family), 1, 1).value == 1.0

    def test_pitman_yor_zero_is_one(self):
        m = model(0.6, PitmanYor(0.0))
        for n in range(1, 8):
            for k in range(1, n + 1):
                assert psi_weight(m, n, k).value == pytest.approx(1.0)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    @pytest.mark.parametrize("family", BUILT_IN)
    def test_recursion(self, alpha, family):
        m = model(alpha, family)
        for n in range(1, 11):
            for k in range(1, n + 1):
                lhs = gibbs_weight_v(m, n, k).value
                rhs = (n - k * alpha) * gibbs_weight_v(m, n + 1, k).value + gibbs_weight_v(m, n + 1, k + 1).value
                assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_mittag_leffler_without_tilt_is_pitman_yor(self):
        ml = model(0.4, MittagLefflerTilt(0.0, 0.7))
        py = model(0.4, PitmanYor(0.7))
        for n, k in ((3, 2), (6, 4), (10, 1)):
            assert psi_weight(ml, n, k).value == pytest.approx(psi_weight(py, n, k).value, rel=1e-12)

    def test_generalized_gamma_monte_carlo(self):
        alpha, lam, n, k = 0.5, 1.0, 3, 2
        m = model(alpha, GeneralizedGamma(lam))
        rng = RngState(SEED)
        t = sample_tilted_stable(rng, m.params, k * alpha, 200_000)
        b = rng.generator.beta(k * alpha, n - k * alpha, t.size)
        values = m.h(t / b)
        se = values.std() / math.sqrt(values.size)
        assert abs(values.mean() - psi_weight(m, n, k).value) < 4 * se

    def test_custom_unit(self):
        m = model(0.5, Custom('unit', mc_fallback=False))
        for n, k in ((2, 1), (2, 2), (3, 2)):
            assert psi_weight(m, n, k).value == pytest.approx(1.0, abs=1e-6)

    def test_cached(self):
        m = model(0.5, GeneralizedGamma(1.0))
        psi_weight(m, 4, 2)
        assert m.psi_cache.contains((4, 2))

    def test_domain(self):
        with pytest.raises(DomainError):
            psi_weight(model(0.5, PitmanYor(0.0)), 2, 3)


class TestPrior:
    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    def test_eppf_sums_to_one(self, alpha):
        for family in (PitmanYor(-alpha / 2), PitmanYor(0.5), PitmanYor(2.0), GeneralizedGamma(1.0)):
            m = model(alpha, family)
            for n in range(1, 7):
                total = math.fsum(eppf(m, Partition.from_labels(labels)).value for labels in set_partitions(n))
                assert total == pytest.approx(1.0, abs=1e-9)

    def test_k_pmf_half(self):
        np.testing.assert_allclose(k_pmf(model(0.5, PitmanYor(0.0)), 3), [0.375, 0.375, 0.25], rtol=1e-12)

    @pytest.mark.parametrize("family", BUILT_IN)
    def test_k_pmf_normalized(self, family):
        for n in (1, 5, 12):
            assert math.fsum(k_pmf(model(0.3, family), n)) == pytest.approx(1.0, abs=1e-9)

    def test_predict_pitman_yor(self):
        alpha, theta = 0.3, 1.2
        p = Partition((3, 1, 2))
        new, existing = predict(model(alpha, PitmanYor(theta)), p)
        np.testing.assert_allclose(existing, (np.array([3, 1, 2]) - alpha) / (theta + 6), rtol=1e-12)
        assert new == pytest.approx((theta + 3 * alpha) / (theta + 6), rel=1e-12)

    @pytest.mark.parametrize("family", BUILT_IN)
    def test_predict_sums_to_one(self, family):
        new, existing = predict(model(0.6, family), Partition((2, 2, 1)))
        assert new + existing.sum() == pytest.approx(1.0, abs=1e-10)

    def test_profile_pmf(self):
        law = profile_pmf(model(0.5, GeneralizedGamma(2.0)), 5)
        assert set(law) == set(integer_partitions(5))
        assert math.fsum(law.values()) == pytest.approx(1.0, abs=1e-10)

    def test_sequential_matches_k_law(self):
        m = model(0.5, GeneralizedGamma(1.0))
        rng = RngState(SEED)
        counts = np.zeros(4, dtype=int)
        for _ in range(5000):
            counts[sample_partition_sequential(rng, m, 4).k - 1] += 1
        _, p_value = chi_square_pmf(counts, k_pmf(m, 4))
        assert p_value > 1e-3

    def test_marginal_ties(self):
        rng = RngState(SEED)
        values = sample_marginal(rng, model(0.5, PitmanYor(1.0)), 30, lambda r: r.generator.random())
        assert len(values) == 30
        assert Partition.from_labels(values).n == 30
