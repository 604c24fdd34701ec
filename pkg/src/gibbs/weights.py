"""
Gibbs weights Psi_{n,k} = E[h(T_alpha) | K_n = k] and V_{n,k}
"""
import logging
import math
import warnings

import numpy as np
from scipy import integrate
from scipy.special import betaln, gammaln

from ..errors import DomainError, QuadratureError
from ..special.numbers import SpecialValue, _check_count, neg_moment_stable
from ..special.series import ml3_function
from ..special.stable import stable_log_pdf_table
from .model import Custom, GeneralizedGamma, MittagLefflerTilt, PitmanYor

logger = logging.getLogger(__name__)

# Psi tables are memoized per model up to this n
PSI_CACHE_N_MAX = 64

CUSTOM_QUAD_EPSABS = 1e-8
CUSTOM_MC_DRAWS = 1_000_000
CUSTOM_MC_SEED = 20_240_613


def _log_psi_pitman_yor(alpha, theta, n, k):
    return float(gammaln(theta / alpha + k) + gammaln(theta + 1.0) + gammaln(n)
                 - gammaln(theta / alpha + 1.0) - gammaln(theta + n) - gammaln(k))


def _log_psi_mittag_leffler(alpha, family, n, k):
    theta = family.theta + family.j * alpha
    log_psi = _log_psi_pitman_yor(alpha, theta, n, k)
    if family.lam == 0.0:
        return log_psi
    top = ml3_function(theta / alpha + k, alpha, theta + n, family.lam)
    bottom = ml3_function(theta / alpha + 1.0, alpha, theta + 1.0, family.lam)
    return log_psi + math.log(top) - math.log(bottom)


def _log_psi_generalized_gamma(alpha, lam, n, k):
    """(1/Gamma(k)) int_{lam^alpha}^inf (w^{1/alpha} - lam)^{n-1} w^{k - n/alpha + 1/alpha - 1} e^{lam^alpha - w} dw."""
    base = lam ** alpha
    power = k - n / alpha + 1.0 / alpha - 1.0

    def log_integrand(x):
        x = np.asarray(x, dtype=float)
        w = base + x
        # w^(1/alpha) - lam without cancellation near x = 0
        gap = lam * np.expm1(np.log1p(x / base) / alpha)
        if n == 1:
            return power * np.log(w) - x
        with np.errstate(divide='ignore'):
            return (n - 1) * np.log(gap) + power * np.log(w) - x

    grid = np.geomspace(1e-10, 50.0 * (n + k + base), 2000)
    values = log_integrand(grid)
    peak = int(np.argmax(values))
    shift = float(values[peak])

    def integrand(x):
        value = float(log_integrand(x)) - shift
        return math.exp(value) if value > -745.0 else 0.0

    pieces = [integrate.quad(integrand, 0.0, grid[peak], limit=200, epsrel=1e-11)[0],
              integrate.quad(integrand, grid[peak], np.inf, limit=200, epsrel=1e-11)[0]]
    return shift + math.log(math.fsum(pieces)) - float(gammaln(k))


def _custom_psi_quadrature(model, n, k):
    """E[h(T_{alpha,k alpha} / B)], B ~ Beta(k alpha, n - k alpha), by nested quadrature."""
    alpha = model.alpha
    a, b = k * alpha, n - k * alpha
    table = stable_log_pdf_table(model.params)
    log_tilt_norm = neg_moment_stable(model.params, a).log_magnitude
    log_beta = float(betaln(a, b))

    def inner(t):
        value, _ = integrate.quad(lambda x: float(model.h(t / x)), 0.0, 1.0,
                                  weight='alg', wvar=(a - 1.0, b - 1.0), epsabs=CUSTOM_QUAD_EPSABS)
        return value * math.exp(-log_beta)

    def outer(s):
        t = math.exp(s)
        log_f = table.log_pdf(np.array([t]))[0] - a * s - log_tilt_norm + s
        if log_f < -700.0:
            return 0.0
        return math.exp(log_f) * inner(t)

    with warnings.catch_warnings():
        warnings.simplefilter('error', integrate.IntegrationWarning)
        lower, _ = integrate.quad(outer, -np.inf, 0.0, epsabs=CUSTOM_QUAD_EPSABS, limit=200)
        upper, _ = integrate.quad(outer, 0.0, np.inf, epsabs=CUSTOM_QUAD_EPSABS, limit=200)
    return lower + upper


def _custom_psi_monte_carlo(model, n, k):
    from ..sampling.rng import RngState
    from ..sampling.stable import sample_tilted_stable

    rng = RngState(CUSTOM_MC_SEED, stream_id=n * 4096 + k)
    alpha = model.alpha
    t = sample_tilted_stable(rng, model.params, k * alpha, size=CUSTOM_MC_DRAWS)
    b = rng.generator.beta(k * alpha, n - k * alpha, CUSTOM_MC_DRAWS)
    values = model.h(t / b)
    mean = float(np.mean(values))
    logger.debug("custom Psi(%d, %d) by Monte Carlo: %.6g +/- %.2g", n, k, mean,
                 float(np.std(values)) / math.sqrt(CUSTOM_MC_DRAWS))
    return mean


def _compute_psi(model, n, k):
    family = model.family
    alpha = model.alpha
    if isinstance(family, PitmanYor):
        return SpecialValue(_log_psi_pitman_yor(alpha, family.theta, n, k), 1)
    if isinstance(family, MittagLefflerTilt):
        return SpecialValue(_log_psi_mittag_leffler(alpha, family, n, k), 1)
    if isinstance(family, GeneralizedGamma):
        return SpecialValue(_log_psi_generalized_gamma(alpha, family.lam, n, k), 1)
    if isinstance(family, Custom):
        try:
            value = _custom_psi_quadrature(model, n, k)
        except (integrate.IntegrationWarning, ArithmeticError) as exc:
            if not family.mc_fallback:
                raise QuadratureError(f"custom Psi({n}, {k}) quadrature failed: {exc}") from exc
            logger.debug("custom Psi(%d, %d) quadrature failed (%s), using Monte Carlo", n, k, exc)
            value = _custom_psi_monte_carlo(model, n, k)
        return SpecialValue.from_float(value)
    raise DomainError(f"unsupported family {family!r}")


def psi_weight(model, n, k):
    """Psi^{[alpha]}_{n,k}, the factor multiplying the PD(alpha, 0) EPPF; Psi_{1,1} = 1."""
    n = _check_count(n, 'n', 1)
    k = _check_count(k, 'k', 1)
    if k > n:
        raise DomainError(f"k must lie in [1, n], got k={k}, n={n}")
    if n == 1:
        return SpecialValue.one()
    if n > PSI_CACHE_N_MAX:
        return _compute_psi(model, n, k)
    return model.psi_cache.get_or_compute((n, k), lambda: _compute_psi(model, n, k))


def gibbs_weight_v(model, n, k):
    """V_{n,k} = Psi_{n,k} alpha^{k-1} Gamma(k) / Gamma(n)."""
    psi = psi_weight(model, n, k)
    alpha = model.alpha
    return psi * SpecialValue(float((k - 1) * math.log(alpha) + gammaln(k) - gammaln(n)), 1)
