"""
Generalized Mittag-Leffler class: PD(alpha, theta) conditioned on N(lam L) = j

All E-functions are ml3_function, normalized to 1 at lam = 0.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from ..errors import DomainError, RejectionBudgetError
from ..gibbs.model import GibbsModel, MittagLefflerTilt, PitmanYor
from ..gibbs.partition import Partition
from ..gibbs.prior import sample_partition_sequential
from ..sampling.stable import sample_tilted_stable
from ..special.numbers import SpecialValue, StableParams
from ..special.series import hyp1f1_neg, ml3_function
from ..special.stable import ml_density
from .pitman_yor import py_eppf

THINNING_BUDGET = 1_000_000


@dataclass(frozen=True)
class MLTiltParams:
    alpha: StableParams
    theta: float
    j: int = 0
    lam: float = 0.0

    def __post_init__(self):
        if not isinstance(self.alpha, StableParams):
            object.__setattr__(self, 'alpha', StableParams(self.alpha))
        MittagLefflerTilt(self.lam, self.theta, self.j).validate(self.alpha)

    @property
    def shifted_theta(self):
        """theta + j alpha, the Pitman-Yor parameter the family tilts."""
        return self.theta + self.j * self.alpha.alpha

    def to_model(self):
        return GibbsModel(self.alpha, MittagLefflerTilt(self.lam, self.theta, self.j))

    def require_plain(self):
        if self.j != 0:
            raise DomainError(f"closed-form posterior densities need j = 0, got j = {self.j}")


def _e(gamma, params, beta, lam):
    return ml3_function(gamma, params.alpha.alpha, beta, lam)


def _check_nk(n, k):
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")


def ml_tilt_h(params, t):
    """exp(-lam t^-alpha) t^-(theta + j alpha) divided by its T_alpha expectation."""
    family = MittagLefflerTilt(params.lam, params.theta, params.j)
    values = np.exp(family.log_h(params.alpha, t))
    return float(values) if np.ndim(t) == 0 else values


def ml_posterior_rk_pdf(params, n, k, b):
    """Density of R_{alpha,theta+k alpha}(lam): Beta(theta + k alpha, n - k alpha) reweighted by
    E^{(theta/alpha+k)}_{alpha,theta+k alpha}(-lam b^alpha) / E^{(theta/alpha+k)}_{alpha,theta+n}(-lam)."""
    params.require_plain()
    _check_nk(n, k)
    a, theta = params.alpha.alpha, params.theta
    if not 0.0 < b < 1.0:
        return 0.0
    weight = _e(theta / a + k, params, theta + k * a, params.lam * b ** a) \
        / _e(theta / a + k, params, theta + n, params.lam)
    return weight * float(stats.beta.pdf(b, theta + k * a, n - k * a))


def ml_beta_lambda_pdf(params, n, k, b):
    """Density of beta_{theta/alpha+k, n/alpha-k}(lam)."""
    params.require_plain()
    _check_nk(n, k)
    a, theta = params.alpha.alpha, params.theta
    if not 0.0 < b < 1.0:
        return 0.0
    weight = _e((theta + n) / a, params, theta + n, params.lam * b) \
        / _e(theta / a + k, params, theta + n, params.lam)
    return weight * float(stats.beta.pdf(b, theta / a + k, n / a - k))


def ml_gnk_pdf(params, n, k, s):
    """Density of the alpha-diversity of the second representation's outer measure:
    1F1(theta/alpha+k; (theta+n)/alpha; -lam s) g_{alpha,theta+n}(s) / E^{(theta/alpha+k)}_{alpha,theta+n}(-lam)."""
    params.require_plain()
    _check_nk(n, k)
    a, theta = params.alpha.alpha, params.theta
    if not s > 0:
        return 0.0
    confluent = hyp1f1_neg(theta / a + k, (theta + n) / a, params.lam * s)
    return confluent * ml_density(params.alpha, s, theta + n) \
        / _e(theta / a + k, params, theta + n, params.lam)


def ml_diversity_pdf(params, s):
    """exp(-lam s) g_{alpha,theta'}(s) / E^{(theta'/alpha+1)}_{alpha,theta'+1}(-lam), theta' = theta + j alpha."""
    a, theta = params.alpha.alpha, params.shifted_theta
    s_arr = np.asarray(s, dtype=float)
    values = np.where(s_arr > 0, np.exp(-params.lam * np.maximum(s_arr, 0.0)), 0.0) \
        * ml_density(params.alpha, np.maximum(s_arr, 0.0), theta) \
        / _e(theta / a + 1.0, params, theta + 1.0, params.lam)
    return float(values) if np.ndim(s) == 0 else values


def ml_eppf(params, p):
    """Tilted EPPF: PY(alpha, theta') EPPF times E^{(theta'/alpha+k)}_{alpha,theta'+n} / E^{(theta'/alpha+1)}_{alpha,theta'+1}."""
    p = p if isinstance(p, Partition) else Partition(tuple(p))
    a, theta = params.alpha.alpha, params.shifted_theta
    ratio = _e(theta / a + p.k, params, theta + p.n, params.lam) \
        / _e(theta / a + 1.0, params, theta + 1.0, params.lam)
    return py_eppf(a, theta, p) * SpecialValue.from_float(ratio)


def ml_predict(params, p):
    """Prediction rule written with E-function ratios."""
    p = p if isinstance(p, Partition) else Partition(tuple(p))
    a, theta = params.alpha.alpha, params.shifted_theta
    n, k = p.n, p.k
    base = _e(theta / a + k, params, theta + n, params.lam)
    new_table = _e(theta / a + k + 1.0, params, theta + n + 1.0, params.lam) / base \
        * (theta + k * a) / (theta + n)
    stay = _e(theta / a + k, params, theta + n + 1.0, params.lam) / base / (theta + n)
    return new_table, stay * (np.array(p.block_sizes, dtype=float) - a)


def ml_normalizer_consistency(params, n, k):
    """|E^{(theta/alpha+k)}_{alpha,theta+n}(-lam) - E[E^{((theta+n)/alpha)}_{alpha,theta+n}(-lam B)]|,
    B ~ Beta(theta/alpha + k, n/alpha - k), the expectation by quadrature."""
    _check_nk(n, k)
    a, theta = params.alpha.alpha, params.shifted_theta
    series = _e(theta / a + k, params, theta + n, params.lam)
    shape_a, shape_b = theta / a + k, n / a - k
    log_beta = math.lgamma(shape_a) + math.lgamma(shape_b) - math.lgamma(shape_a + shape_b)
    mixture, _ = integrate.quad(lambda x: _e((theta + n) / a, params, theta + n, params.lam * x),
                                0.0, 1.0, weight='alg', wvar=(shape_a - 1.0, shape_b - 1.0),
                                epsabs=1e-13, epsrel=1e-12, limit=200)
    return abs(series - mixture * math.exp(-log_beta))


def sample_ml_first_stick(rng, params, size=None):
    """First size-biased pick 1 - R and the tilt lam R^alpha left for the remaining mass.

    R is the n = k = 1 posterior scale: (R, S) ~ Beta(theta+alpha, 1-alpha) x T_{alpha,theta+alpha}
    accepted with probability exp(-lam R^alpha S^-alpha).
    """
    params.require_plain()
    a, theta = params.alpha.alpha, params.theta
    count = 1 if size is None else int(size)
    gen = rng.generator
    picks = []
    while sum(x.size for x in picks) < count:
        batch = max(64, 2 * count)
        r = gen.beta(theta + a, 1.0 - a, batch)
        s = np.atleast_1d(sample_tilted_stable(rng, params.alpha, theta + a, batch))
        picks.append(r[gen.random(batch) < np.exp(-params.lam * (r / s) ** a)])
    r = np.concatenate(picks)[:count]
    first, lam_next = 1.0 - r, params.lam * r ** a
    if size is None:
        return float(first[0]), float(lam_next[0])
    return first, lam_next


def thin_pitman_yor(rng, params, n, size):
    """Partitions of [n] from PD(alpha, theta') kept with probability exp(-lam T^-alpha).

    T given the partition is T_{alpha,theta'+k alpha} / Beta(theta' + k alpha, n - k alpha),
    so each draw carries its own total without stick truncation.
    """
    a, theta = params.alpha.alpha, params.shifted_theta
    prior = GibbsModel(params.alpha, PitmanYor(theta))
    gen = rng.generator
    kept = []
    for _ in range(THINNING_BUDGET):
        if len(kept) >= size:
            return kept
        p = sample_partition_sequential(rng, prior, n)
        b = gen.beta(theta + p.k * a, n - p.k * a)
        t = sample_tilted_stable(rng, params.alpha, theta + p.k * a) / b
        if gen.random() < math.exp(-params.lam * t ** -a):
            kept.append(p)
    raise RejectionBudgetError(f"thinning kept {len(kept)} of {size} partitions within {THINNING_BUDGET} draws")
