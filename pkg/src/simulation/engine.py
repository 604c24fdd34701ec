"""
Verification engine: named suites of exact and statistical checks, run into SuiteReports
"""
import copy
import functools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate, special
from scipy import stats as sps

from ..errors import GibbsError, UnknownSuiteError
from ..families.mittag_leffler import (MLTiltParams, ml_beta_lambda_pdf, ml_diversity_pdf, ml_eppf,
                                       ml_gnk_pdf, ml_normalizer_consistency, ml_posterior_rk_pdf,
                                       ml_predict, sample_ml_first_stick, thin_pitman_yor)
from ..gibbs.model import Custom, GibbsModel, PitmanYor, family_from_dict
from ..gibbs.partition import Partition, integer_partitions, set_partitions
from ..gibbs.prior import eppf, k_pmf, predict, profile_pmf, sample_partition_sequential
from ..gibbs.weights import gibbs_weight_v, psi_weight
from ..posterior.joint import sample_joint_rt_t1, sample_joint_rt_t2
from ..posterior.moments import importance_identity_check, posterior_mean_atom_masses
from ..posterior.sampler import sample_posterior_batch
from ..sampling.mixing import sample_model_sticks
from ..sampling.rng import RngState
from ..sampling.stable import (sample_exp_tilted_stable, sample_positive_stable, sample_tilted_kanter,
                              sample_tilted_stable)
from ..sampling.sticks import sample_gem_with_total, sample_partition_from_sticks
from ..special.numbers import StableParams, gen_stirling, log_pochhammer, neg_moment_stable
from ..special.series import hyp1f1_neg, ml3_function
from ..special.stable import ml_density, stable_cdf, stable_pdf
from .metrics import CaseResult, SuiteReport
from .species import species_discovery_sim
from .stats import chi_square_pmf, ks_one_sample, ks_two_sample

logger = logging.getLogger(__name__)

OVERALL_ALPHA = 0.01
EPPF_TOL = 1e-9
RECURSION_RTOL = 1e-8
CUSTOM_PSI_TOL = 1e-6
DENSITY_TOL = 1e-6
PDF_NORMALIZATION_TOL = 1e-8
LAPLACE_TOL = 1e-6
SPECIES_FINAL_KS = 0.05
SPECIES_STREAM = 1 << 32
SIR_BINS = 20

DEFAULT_CONFIG = {
    'suite': None,
    'seed': 20240613,
    'sample_sizes': {
        'ks': 100_000,
        'laplace_mc': 1_000_000,
        'chi_square': 20_000,
        'sticks': 2_000,
        'joint': 20_000,
        'posterior_py': 5_000,
        'sir': 2_000,
        'agreement': 50_000,
        'mean': 100_000,
        'ml_mc': 1_000_000,
        'thinning': 5_000,
        'species_reps': 2_000,
    },
    'alpha_grid': [0.3, 0.5, 0.7],
    'eppf_alpha_grid': [0.1, 0.3, 0.5, 0.7, 0.9],
    'stick_alpha_grid': [0.3, 0.5],
    'nk_grid': [[3, 2], [5, 2], [6, 4]],
    'families': [
        {'type': 'pitman_yor', 'theta': 0.5},
        {'type': 'generalized_gamma', 'lambda': 1.0},
        {'type': 'mittag_leffler_tilt', 'lambda': 1.0, 'theta': 0.5},
    ],
    'partitions': {
        'eppf_n_max': 8,
        'stirling_n_max': 10,
        'recursion_n_max': 12,
        'custom_n_max': 4,
        'agreement_n_max': 5,
        'mean_n_max': 4,
    },
    'py_theta': 0.5,
    'ml': {'lambda': 1.0, 'theta': 0.5},
    'species': {'alpha': 0.5, 'theta': 0.5, 'partition': [2, 1], 'batches': 5},
    'm_values': [100, 1000, 10000],
    'eps': 1e-2,
    'workers': 1,
    'include_timing': False,
}


def merge_config(base, override):
    """Deep merge of override into a copy of base; nested dicts merge key by key."""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class Outcome(NamedTuple):
    statistic_name: str
    statistic: float
    p_or_gap: float
    n_samples: int


class Case(NamedTuple):
    """A named check; run(rng) returns an Outcome."""
    case_id: str
    run: Callable
    kind: str = 'statistical'
    tolerance: Optional[float] = None


def _exact(case_id, compute, tolerance, statistic_name='gap'):
    def run(rng):
        gap = float(compute())
        return Outcome(statistic_name, gap, gap, 0)
    return Case(case_id, run, 'exact', tolerance)


def _ks_case(case_id, draw_pair):
    def run(rng):
        xs, ys = draw_pair(rng)
        statistic, p = ks_two_sample(xs, ys)
        return Outcome('ks', statistic, p, int(np.size(xs)))
    return Case(case_id, run)


def _ks_cdf_case(case_id, draw, cdf):
    def run(rng):
        xs = draw(rng)
        statistic, p = ks_one_sample(xs, cdf)
        return Outcome('ks', statistic, p, int(np.size(xs)))
    return Case(case_id, run)


def _z_outcome(values, target):
    values = np.asarray(values, dtype=float)
    se = float(np.std(values, ddof=1)) / math.sqrt(values.size)
    z = (float(np.mean(values)) - target) / se if se > 0 else 0.0
    return Outcome('z', z, float(2.0 * sps.norm.sf(abs(z))), int(values.size))


def _models(config, alpha):
    params = StableParams(alpha)
    return [GibbsModel(params, family_from_dict(doc)) for doc in config['families']]


def _partition_with(n, k):
    return Partition((n - k + 1,) + (1,) * (k - 1))


def _partitions_up_to(n_max, n_min=1):
    return [Partition(sizes) for n in range(n_min, n_max + 1) for sizes in integer_partitions(n)]


def _log_integral(f):
    """int_0^inf f(t) dt computed over log t in two halves."""
    def integrand(s):
        t = math.exp(s)
        return f(t) * t
    lower, _ = integrate.quad(integrand, -np.inf, 0.0, limit=400, epsabs=1e-13, epsrel=1e-11)
    upper, _ = integrate.quad(integrand, 0.0, np.inf, limit=400, epsabs=1e-13, epsrel=1e-11)
    return lower + upper


def _unit_integral(f):
    value, _ = integrate.quad(f, 0.0, 1.0, limit=400, epsabs=1e-12, epsrel=1e-10)
    return value


# eppf-exact ------------------------------------------------------------------

def _eppf_sum_gap(model, n_max):
    gap = 0.0
    for n in range(1, n_max + 1):
        total = math.fsum(eppf(model, Partition.from_labels(labels)).value for labels in set_partitions(n))
        gap = max(gap, abs(total - 1.0))
    return gap


def _kpmf_sum_gap(model, n_max):
    return max(abs(math.fsum(k_pmf(model, n)) - 1.0) for n in range(1, n_max + 1))


def _recursion_gap(model, n_max):
    """max relative |V_{n,k} - (n - k alpha) V_{n+1,k} - V_{n+1,k+1}|."""
    alpha = model.alpha
    gap = 0.0
    for n in range(1, n_max):
        for k in range(1, n + 1):
            v = gibbs_weight_v(model, n, k)
            rhs = gibbs_weight_v(model, n + 1, k) * (n - k * alpha) + gibbs_weight_v(model, n + 1, k + 1)
            gap = max(gap, abs((v - rhs).value) / v.value)
    return gap


def _custom_unit_gap(alpha, n_max):
    model = GibbsModel(StableParams(alpha), Custom('unit', mc_fallback=False))
    return max(abs(psi_weight(model, n, k).value - 1.0)
               for n in range(2, n_max + 1) for k in range(1, n + 1))


def _suite_eppf_exact(config):
    sizes = config['partitions']
    cases = []
    for alpha in config['eppf_alpha_grid']:
        params = StableParams(alpha)
        for theta in (0.0, -alpha / 2.0, 0.5, 2.0):
            model = GibbsModel(params, PitmanYor(theta))
            cases.append(_exact(f"eppf-sum/{model}",
                                functools.partial(_eppf_sum_gap, model, sizes['eppf_n_max']), EPPF_TOL))
            cases.append(_exact(f"kpmf-sum/{model}",
                                functools.partial(_kpmf_sum_gap, model, sizes['recursion_n_max']), EPPF_TOL))
    for alpha in config['alpha_grid']:
        for model in _models(config, alpha):
            cases.append(_exact(f"recursion/{model}",
                                functools.partial(_recursion_gap, model, sizes['recursion_n_max']),
                                RECURSION_RTOL, 'relative_gap'))
        cases.append(_exact(f"custom-unit-psi/alpha={alpha}",
                            functools.partial(_custom_unit_gap, alpha, sizes['custom_n_max']), CUSTOM_PSI_TOL))
    return cases


# stirling --------------------------------------------------------------------

def _stirling_enumeration_gap(alpha, n_max):
    params = StableParams(alpha)
    gap = 0.0
    for n in range(1, n_max + 1):
        by_k = {}
        for sizes in integer_partitions(n):
            weight = math.prod(log_pochhammer(1.0 - alpha, m - 1).value for m in sizes)
            by_k[len(sizes)] = by_k.get(len(sizes), 0.0) + Partition(sizes).multiplicity() * weight
        for k, expected in by_k.items():
            gap = max(gap, abs(gen_stirling(params, n, k).value / expected - 1.0))
    return gap


def _block_count_normalization_gap(alpha, n_max):
    params = StableParams(alpha)
    gap = 0.0
    for n in range(1, n_max + 1):
        total = math.fsum(math.exp((k - 1) * math.log(alpha) + math.lgamma(k) - math.lgamma(n)
                                   + gen_stirling(params, n, k).log_magnitude) for k in range(1, n + 1))
        gap = max(gap, abs(total - 1.0))
    return gap


def _suite_stirling(config):
    sizes = config['partitions']
    cases = []
    for alpha in config['eppf_alpha_grid']:
        cases.append(_exact(f"stirling-enumeration/alpha={alpha}",
                            functools.partial(_stirling_enumeration_gap, alpha, sizes['stirling_n_max']),
                            EPPF_TOL, 'relative_gap'))
        cases.append(_exact(f"block-count-normalization/alpha={alpha}",
                            functools.partial(_block_count_normalization_gap, alpha, sizes['recursion_n_max']),
                            EPPF_TOL))
    return cases


# special-fn ------------------------------------------------------------------

def _pochhammer_additivity_gap():
    gap = 0.0
    for x in (0.3, 1.0, 2.5):
        for n in range(50):
            step = log_pochhammer(x, n + 1).log_magnitude - log_pochhammer(x, n).log_magnitude
            gap = max(gap, abs(step - math.log(x + n)))
    return gap


def _half_stable_ml3_gap():
    # T_{1/2}^{-1/2} is |N(0, 2)|, so E[exp(-T^{-1/2})] = 2 e Phi(-sqrt 2)
    expected = 2.0 * math.e * float(sps.norm.cdf(-math.sqrt(2.0)))
    return abs(ml3_function(1.0, 0.5, 1.0, 1.0) - expected)


def _hyp1f1_gap():
    gap = abs(hyp1f1_neg(1.0, 2.0, 2.0) - (1.0 - math.exp(-2.0)) / 2.0)
    for a, b, lam in ((0.5, 1.5, 1.0), (2.0, 5.0, 3.0), (1.5, 4.0, 10.0)):
        gap = max(gap, abs(hyp1f1_neg(a, b, lam) / float(special.hyp1f1(a, b, -lam)) - 1.0))
    return gap


def _suite_special_fn(config):
    cases = [
        _exact("pochhammer-additivity", _pochhammer_additivity_gap, 1e-12),
        _exact("ml3-half-stable", _half_stable_ml3_gap, 1e-10),
        _exact("hyp1f1-closed-forms", _hyp1f1_gap, 1e-10),
        _exact("levy-cdf", lambda: abs(stable_cdf(StableParams(0.5), 2.0)
                                       - _unit_integral(lambda u: 2.0 * stable_pdf(StableParams(0.5), 2.0 * u)
                                                        if u > 0 else 0.0)), 1e-8),
    ]
    for alpha in config['alpha_grid']:
        params = StableParams(alpha)
        cases.append(_exact(f"stable-pdf-normalization/alpha={alpha}",
                            functools.partial(lambda p: abs(_log_integral(lambda t: stable_pdf(p, t)) - 1.0), params),
                            PDF_NORMALIZATION_TOL))
        for lam in (0.5, 1.0, 2.0):
            cases.append(_exact(
                f"stable-laplace/alpha={alpha}/lambda={lam}",
                functools.partial(lambda p, s: abs(_log_integral(lambda t: math.exp(-s * t) * stable_pdf(p, t))
                                                   - math.exp(-s ** p.alpha)), params, lam),
                LAPLACE_TOL))
        for theta in (1.0, 2.0):
            cases.append(_exact(
                f"neg-moment/alpha={alpha}/theta={theta}",
                functools.partial(lambda p, th: abs(_log_integral(lambda t: t ** -th * stable_pdf(p, t))
                                                    / neg_moment_stable(p, th).value - 1.0), params, theta),
                LAPLACE_TOL, 'relative_gap'))
        cases.append(_exact(f"ml-density-normalization/alpha={alpha}",
                            functools.partial(lambda p: abs(_log_integral(lambda s: ml_density(p, s, 0.5)) - 1.0),
                                              params),
                            DENSITY_TOL))
    return cases


# samplers-oracle -------------------------------------------------------------

def _half_stable_inverse(theta, size):
    # c = theta at alpha = 1/2, so the tilts reach every angle envelope of sample_tilted_kanter
    params = StableParams(0.5)

    def draw(rng):
        if theta == 0.0:
            return 1.0 / sample_positive_stable(rng, params, size)
        return 1.0 / sample_tilted_kanter(rng, params, theta, size)
    return draw


def _exp_tilted_half_pair(lam, size):
    # T_{1/2} tilted by exp(-lam t) is inverse Gaussian with mean 1/(2 sqrt lam) and shape 1/2
    params = StableParams(0.5)

    def draw(rng):
        xs = sample_exp_tilted_stable(rng, params, lam, size)
        ys = sps.invgauss.rvs(1.0 / math.sqrt(lam), scale=0.5, size=size, random_state=rng.generator)
        return xs, ys
    return draw


def _gem_total_pair(alpha, theta, eps, size):
    params = StableParams(alpha)

    def draw(rng):
        xs = np.array([sample_gem_with_total(rng, params, theta, eps)[0] for _ in range(size)])
        return xs, sample_tilted_stable(rng, params, theta, size)
    return draw


def _k_counts_case(case_id, model, n, size, draw_partition):
    def run(rng):
        counts = np.zeros(n, dtype=np.int64)
        for _ in range(size):
            counts[draw_partition(rng).k - 1] += 1
        statistic, p = chi_square_pmf(counts, k_pmf(model, n))
        return Outcome('chi_square', statistic, p, size)
    return Case(case_id, run)


def _suite_samplers_oracle(config):
    sizes = config['sample_sizes']
    cases = [_ks_cdf_case(f"half-stable/theta={theta}", _half_stable_inverse(theta, sizes['ks']),
                          sps.gamma(theta + 0.5, scale=4.0).cdf)
             for theta in (0.0, -0.25, 0.5, 2.0)]
    cases += [_ks_case(f"half-exp-tilted/lambda={lam}", _exp_tilted_half_pair(lam, sizes['ks']))
              for lam in (1.0, 9.0)]
    for alpha in config['alpha_grid']:
        params = StableParams(alpha)
        cases.append(Case(f"stable-laplace-mc/alpha={alpha}",
                          functools.partial(lambda p, rng: _z_outcome(
                              np.exp(-sample_positive_stable(rng, p, sizes['laplace_mc'])), math.exp(-1.0)),
                              params)))
    cases.append(_ks_case("gem-with-total/alpha=0.3/theta=1.0",
                          _gem_total_pair(0.3, 1.0, 1e-6, sizes['sticks'])))
    unit = GibbsModel(StableParams(0.5), PitmanYor(0.0))
    cases.append(_k_counts_case("k-law/sequential/alpha=0.5/n=3", unit, 3, sizes['chi_square'],
                                lambda rng: sample_partition_sequential(rng, unit, 3)))
    sticky = GibbsModel(StableParams(0.3), PitmanYor(0.0))
    cases.append(_k_counts_case(
        "k-law/sticks/alpha=0.3/n=4", sticky, 4, sizes['sticks'],
        lambda rng: sample_partition_from_sticks(rng, sample_model_sticks(rng, sticky, 1e-6)[1], 4)))
    return cases


# identity-2-13 ---------------------------------------------------------------

def _identity_pair(alpha, n, k, size):
    params = StableParams(alpha)

    def draw(rng):
        gen = rng.generator
        xs = sample_tilted_stable(rng, params, k * alpha, size) / gen.beta(k * alpha, n - k * alpha, size)
        ys = sample_tilted_stable(rng, params, float(n), size) / gen.beta(k, n / alpha - k, size) ** (1.0 / alpha)
        return xs, ys
    return draw


def _suite_identity(config):
    size = config['sample_sizes']['ks']
    return [_ks_case(f"total-identity/alpha={alpha}/n={n}/k={k}", _identity_pair(alpha, n, k, size))
            for alpha in config['alpha_grid'] for n, k in config['nk_grid']]


# posterior-py ----------------------------------------------------------------

def _py_measure_case(model, p, representation, size, eps, workers):
    """Full posterior draws against the Pitman-Yor posterior Dirichlet(n_j - alpha, ..., theta + k alpha)."""
    alpha, theta = model.alpha, model.family.theta
    n, k = p.n, p.k
    split = (theta + k * alpha, n - k * alpha) if representation == 'T1' else (theta / alpha + k, n / alpha - k)
    first = p.block_sizes[0] - alpha
    laws = {
        'scale_split': sps.beta(*split),
        'fresh_mass': sps.beta(theta + k * alpha, n - k * alpha),
        'first_atom': sps.beta(first, theta + n - first),
    }

    def run(rng):
        draws = sample_posterior_batch(_batch_seeds(rng, 1)[0], model, p, size, representation,
                                       workers=workers, eps=eps)
        observed = {
            'scale_split': [draw.scale_split for draw in draws],
            'fresh_mass': [draw.continuous_mass() for draw in draws],
            'first_atom': [draw.fixed_atoms[0] for draw in draws],
        }
        results = [ks_one_sample(observed[name], law.cdf) for name, law in laws.items()]
        statistic = max(r[0] for r in results)
        p_value = min(1.0, len(results) * min(r[1] for r in results))
        return Outcome('ks_max_over_marginals', statistic, p_value, size)
    return run


def _sir_split(model, n, k, representation, rng):
    joint = sample_joint_rt_t1 if representation == 'T1' else sample_joint_rt_t2
    return joint(rng, model, n, k, method='sir')[0]


def _sir_ks_case(case_id, model, n, k, representation, size, law):
    draw = functools.partial(_sir_split, model, n, k, representation)
    return _ks_cdf_case(case_id, lambda rng: np.array([draw(rng) for _ in range(size)]), law.cdf)


def _suite_posterior_py(config):
    sizes = config['sample_sizes']
    theta = config['py_theta']
    cases = []
    for alpha in config['stick_alpha_grid']:
        model = GibbsModel(StableParams(alpha), PitmanYor(theta))
        for n, k in config['nk_grid']:
            p = _partition_with(n, k)
            for representation in ('T1', 'T2'):
                cases.append(Case(f"posterior-marginals/{representation}/{model}/{p}",
                                  _py_measure_case(model, p, representation, sizes['posterior_py'],
                                                   config['eps'], config['workers'])))
    alpha = min(config['alpha_grid'])
    model = GibbsModel(StableParams(alpha), PitmanYor(theta))
    for n, k in config['nk_grid']:
        laws = {'T1': sps.beta(theta + k * alpha, n - k * alpha), 'T2': sps.beta(theta / alpha + k, n / alpha - k)}
        for representation, law in laws.items():
            cases.append(_sir_ks_case(f"sir-scale-split/{representation}/{model}/n={n}/k={k}",
                                      model, n, k, representation, sizes['sir'], law))
    return cases


# posterior-t1t2 --------------------------------------------------------------

def _batch_seeds(rng, count):
    return [int(s) for s in rng.generator.integers(0, 2 ** 63, size=count)]


def _fixed_mass_agreement(model, p, size, eps, workers):
    def run(rng):
        seed_t1, seed_t2 = _batch_seeds(rng, 2)
        first = sample_posterior_batch(seed_t1, model, p, size, 'T1', workers=workers, eps=eps)
        second = sample_posterior_batch(seed_t2, model, p, size, 'T2', workers=workers, eps=eps)
        xs = np.array([draw.fixed_atoms for draw in first])
        ys = np.array([draw.fixed_atoms for draw in second])
        results = [ks_two_sample(xs[:, j], ys[:, j]) for j in range(p.k)]
        # atoms are compared jointly at the case's own Bonferroni share
        statistic = max(r[0] for r in results)
        p_value = min(1.0, p.k * min(r[1] for r in results))
        return Outcome('ks_max_over_atoms', statistic, p_value, size)
    return run


def _suite_posterior_t1t2(config):
    size = config['sample_sizes']['agreement']
    cases = []
    for alpha in config['stick_alpha_grid']:
        for model in _models(config, alpha):
            for p in _partitions_up_to(config['partitions']['agreement_n_max']):
                cases.append(Case(f"fixed-masses/{model}/{p}",
                                  _fixed_mass_agreement(model, p, size, config['eps'], config['workers'])))
    return cases


# posterior-mean --------------------------------------------------------------

def _mean_case(model, p, size, eps, workers):
    def run(rng):
        draws = sample_posterior_batch(_batch_seeds(rng, 1)[0], model, p, size, 'T1', workers=workers, eps=eps)
        fixed = np.array([draw.fixed_atoms for draw in draws])
        _, expected = posterior_mean_atom_masses(model, p)
        outcomes = [_z_outcome(fixed[:, j], float(expected[j])) for j in range(p.k)]
        worst = max(outcomes, key=lambda o: abs(o.statistic))
        return Outcome('z_max_over_atoms', worst.statistic, min(1.0, p.k * worst.p_or_gap), size)
    return run


def _py_mean_gap(model, p):
    theta, alpha = model.family.theta, model.alpha
    new_mass, masses = posterior_mean_atom_masses(model, p)
    expected = (np.array(p.block_sizes, dtype=float) - alpha) / (theta + p.n)
    return max(float(np.max(np.abs(masses - expected))),
               abs(new_mass - (theta + p.k * alpha) / (theta + p.n)))


def _identity_case(model, n, draws, eps):
    def run(rng):
        lhs, rhs, se = importance_identity_check(rng, model, n, lambda sticks, partition: partition.k == 1,
                                                 draws, eps)
        z = (lhs - rhs) / se if se > 0 else 0.0
        return Outcome('z', z, float(2.0 * sps.norm.sf(abs(z))), draws)
    return run


def _suite_posterior_mean(config):
    size = config['sample_sizes']['mean']
    partitions = _partitions_up_to(config['partitions']['mean_n_max'])
    cases = []
    for alpha in config['stick_alpha_grid']:
        py = GibbsModel(StableParams(alpha), PitmanYor(config['py_theta']))
        for p in partitions:
            cases.append(_exact(f"py-closed-form/{py}/{p}", functools.partial(_py_mean_gap, py, p), 1e-10))
        for model in _models(config, alpha):
            for p in partitions:
                cases.append(Case(f"fixed-mass-means/{model}/{p}",
                                  _mean_case(model, p, size, config['eps'], config['workers'])))
    for model in _models(config, min(config['stick_alpha_grid'])):
        cases.append(Case(f"importance-identity/{model}",
                          _identity_case(model, 2, config['sample_sizes']['sticks'], config['eps'])))
    return cases


# ml-class --------------------------------------------------------------------

def _ml3_mc_case(params, size):
    def run(rng):
        a, theta = params.alpha.alpha, params.theta
        t = sample_tilted_stable(rng, params.alpha, theta, size)
        return _z_outcome(np.exp(-params.lam * t ** -a), ml3_function(theta / a + 1.0, a, theta + 1.0, params.lam))
    return run


def _predict_gap(params, p):
    model = params.to_model()
    new_ml, existing_ml = ml_predict(params, p)
    new_generic, existing_generic = predict(model, p)
    return max(abs(new_ml - new_generic), float(np.max(np.abs(existing_ml - existing_generic))))


def _eppf_gap(params, p):
    return abs((ml_eppf(params, p) / eppf(params.to_model(), p)).value - 1.0)


def _first_stick_pair(params, size):
    model = params.to_model()

    def draw(rng):
        first, _ = sample_ml_first_stick(rng, params, size)
        return 1.0 - first, np.array([sample_joint_rt_t1(rng, model, 1, 1)[0] for _ in range(size)])
    return draw


def _thinning_case(params, n, size):
    def run(rng):
        law = profile_pmf(params.to_model(), n)
        profiles = list(law)
        index = {sizes: i for i, sizes in enumerate(profiles)}
        counts = np.zeros(len(profiles), dtype=np.int64)
        for p in thin_pitman_yor(rng, params, n, size):
            counts[index[p.profile()]] += 1
        statistic, p_value = chi_square_pmf(counts, np.array([law[s] for s in profiles]))
        return Outcome('chi_square', statistic, p_value, size)
    return run


def _density_chi_square_case(draw, pdf, size):
    """Pearson test of draws on (0, 1) against SIR_BINS equal-width cells of a density."""
    edges = np.linspace(0.0, 1.0, SIR_BINS + 1)

    def run(rng):
        counts, _ = np.histogram([draw(rng) for _ in range(size)], bins=edges)
        probs = np.array([integrate.quad(pdf, lo, hi, limit=200)[0] for lo, hi in zip(edges[:-1], edges[1:])])
        statistic, p_value = chi_square_pmf(counts, probs / probs.sum())
        return Outcome('chi_square', statistic, p_value, size)
    return run


def _suite_ml_class(config):
    sizes = config['sample_sizes']
    lam, theta = config['ml']['lambda'], config['ml']['theta']
    cases = []
    for alpha in config['alpha_grid']:
        params = MLTiltParams(StableParams(alpha), theta, 0, lam)
        tag = f"alpha={alpha}/lambda={lam}/theta={theta}"
        cases.append(Case(f"ml3-mc/{tag}", _ml3_mc_case(params, sizes['ml_mc'])))
        cases.append(_exact(f"diversity-pdf-mass/{tag}",
                            functools.partial(lambda q: abs(_log_integral(lambda s: ml_diversity_pdf(q, s)) - 1.0),
                                              params), DENSITY_TOL))
        for n, k in config['nk_grid']:
            nk = f"{tag}/n={n}/k={k}"
            p = _partition_with(n, k)
            cases += [
                _exact(f"normalizer/{nk}", functools.partial(ml_normalizer_consistency, params, n, k), 1e-8),
                _exact(f"rk-pdf-mass/{nk}", functools.partial(
                    lambda q, n_, k_: abs(_unit_integral(lambda b: ml_posterior_rk_pdf(q, n_, k_, b)) - 1.0),
                    params, n, k), DENSITY_TOL),
                _exact(f"beta-lambda-pdf-mass/{nk}", functools.partial(
                    lambda q, n_, k_: abs(_unit_integral(lambda b: ml_beta_lambda_pdf(q, n_, k_, b)) - 1.0),
                    params, n, k), DENSITY_TOL),
                _exact(f"gnk-pdf-mass/{nk}", functools.partial(
                    lambda q, n_, k_: abs(_log_integral(lambda s: ml_gnk_pdf(q, n_, k_, s)) - 1.0),
                    params, n, k), DENSITY_TOL),
                _exact(f"predict/{tag}/{p}", functools.partial(_predict_gap, params, p), 1e-8),
                _exact(f"eppf/{tag}/{p}", functools.partial(_eppf_gap, params, p), 1e-8, 'relative_gap'),
            ]
        n, k = config['nk_grid'][0]
        model = params.to_model()
        cases.append(Case(f"sir-rk-pdf/{tag}/n={n}/k={k}", _density_chi_square_case(
            functools.partial(_sir_split, model, n, k, 'T1'), functools.partial(ml_posterior_rk_pdf, params, n, k),
            sizes['sir'])))
        cases.append(Case(f"sir-beta-lambda-pdf/{tag}/n={n}/k={k}", _density_chi_square_case(
            functools.partial(_sir_split, model, n, k, 'T2'), functools.partial(ml_beta_lambda_pdf, params, n, k),
            sizes['sir'])))
        cases.append(_ks_case(f"first-stick/{tag}", _first_stick_pair(params, sizes['joint'])))
        cases.append(Case(f"thinning/{tag}/n=4", _thinning_case(params, 4, sizes['thinning'])))
    return cases


# species ---------------------------------------------------------------------

def _suite_species(config):
    settings = config['species']
    model = GibbsModel(StableParams(settings['alpha']), PitmanYor(settings['theta']))
    p = Partition(tuple(settings['partition']))
    m_values = [int(m) for m in config['m_values']]
    reps = config['sample_sizes']['species_reps']
    seed = config['seed']

    @functools.lru_cache(maxsize=1)
    def medians():
        rng = RngState(seed, stream_id=SPECIES_STREAM)
        per_batch = []
        for _ in range(settings['batches']):
            result = species_discovery_sim(rng.spawn(), model, p.n, p, m_values, reps)
            per_batch.append(result.ks_by_m())
        return {m: float(np.median([batch[m] for batch in per_batch])) for m in m_values}

    def monotone_gap():
        values = [medians()[m] for m in m_values]
        return max([0.0] + [b - a for a, b in zip(values, values[1:])])

    cases = [_exact(f"median-ks/{model}/{p}/m={m}", functools.partial(lambda m_: medians()[m_], m),
                    math.inf, 'median_ks') for m in m_values[:-1]]
    cases.append(_exact(f"median-ks/{model}/{p}/m={m_values[-1]}", lambda: medians()[m_values[-1]],
                        SPECIES_FINAL_KS, 'median_ks'))
    cases.append(_exact(f"median-ks-decrease/{model}/{p}", monotone_gap, 0.0, 'max_increase'))
    return cases


SUITES = {
    'eppf-exact': _suite_eppf_exact,
    'stirling': _suite_stirling,
    'special-fn': _suite_special_fn,
    'samplers-oracle': _suite_samplers_oracle,
    'identity-2-13': _suite_identity,
    'posterior-py': _suite_posterior_py,
    'posterior-t1t2': _suite_posterior_t1t2,
    'posterior-mean': _suite_posterior_mean,
    'ml-class': _suite_ml_class,
    'species': _suite_species,
}


def _run_case(case, seed, stream, alpha_level):
    try:
        outcome = case.run(RngState(seed, stream_id=stream))
    except (GibbsError, ArithmeticError, ValueError) as exc:
        logger.warning("case %s failed with %s: %s", case.case_id, type(exc).__name__, exc)
        return CaseResult(case.case_id, 'error', None, None, 0, seed, False, case.kind, case.tolerance,
                          stream=stream, error=f"{type(exc).__name__}: {exc}")
    if case.kind == 'exact':
        passed = math.isfinite(outcome.p_or_gap) and outcome.p_or_gap <= case.tolerance
    else:
        passed = outcome.p_or_gap > alpha_level
    return CaseResult(case.case_id, outcome.statistic_name, outcome.statistic, outcome.p_or_gap,
                      outcome.n_samples, seed, bool(passed), case.kind, case.tolerance, stream=stream)


def run_suite(name, config=None):
    """Run the named suite; case i uses stream (seed, i) and reports come back in case order."""
    if name not in SUITES:
        raise UnknownSuiteError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    config = merge_config(DEFAULT_CONFIG, config)
    config['suite'] = name
    started = time.perf_counter()
    cases = SUITES[name](config)
    statistical = sum(case.kind == 'statistical' for case in cases)
    alpha_level = OVERALL_ALPHA / max(1, statistical)
    seed = int(config['seed'])
    logger.info("suite %s: %d cases (%d statistical, per-case level %.3g)", name, len(cases), statistical,
                alpha_level)

    def one(index):
        return _run_case(cases[index], seed, index, alpha_level)

    workers = int(config['workers'])
    if workers <= 1:
        results = [one(i) for i in range(len(cases))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(len(cases))))
    wall_time = time.perf_counter() - started if config['include_timing'] else None
    report = SuiteReport(name, results, alpha_level, config, wall_time)
    logger.info("suite %s: %s (%d of %d cases failed)", name, 'PASS' if report.overall_pass else 'FAIL',
                len(report.failures()), len(results))
    return report
