"""
Three-parameter Mittag-Leffler series and the confluent hypergeometric function at negative argument
"""
import logging
import math

import mpmath
import numpy as np
from scipy.special import gammaln, gammasgn, logsumexp

from ..errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

SERIES_RTOL = 1e-15
SERIES_PATIENCE = 3
SERIES_MAX_TERMS = 100_000
SERIES_CHUNK = 256

# Float summation is trusted while the largest term exceeds the sum by at most this many digits
MAX_LOST_DIGITS = 3
# Working digits kept beyond the peak term in the arbitrary-precision sum
GUARD_DIGITS = 30
GUARD_RETRIES = 3

ASYMPTOTIC_MAX_TERMS = 400
# Largest neglected term of the truncated large-lam expansion, relative to the sum
ASYMPTOTIC_RTOL = 1e-17

_LN10 = math.log(10.0)


def _stopping_index(log_terms, log_floors):
    """First index past the peak term where SERIES_PATIENCE consecutive terms fall below their floor."""
    peak = int(np.argmax(log_terms))
    small = (log_terms - log_floors) < math.log(SERIES_RTOL)
    small[:peak + 1] = False
    run = 0
    for index in np.flatnonzero(small):
        run = run + 1 if index > 0 and small[index - 1] else 1
        if run >= SERIES_PATIENCE:
            return int(index)
    return None


def _collect_terms(log_term_fn, alternating):
    """Generate log|terms| chunk by chunk until the stopping rule fires.

    Alternating terms are measured against the peak term less MAX_LOST_DIGITS,
    since their partial sums carry cancellation error of the peak's size.
    """
    chunks = []
    start = 0
    while start < SERIES_MAX_TERMS:
        ells = np.arange(start, min(start + SERIES_CHUNK, SERIES_MAX_TERMS))
        chunks.append(log_term_fn(ells))
        log_terms = np.concatenate(chunks)
        if alternating:
            log_floors = float(np.max(log_terms)) - MAX_LOST_DIGITS * _LN10
        else:
            log_floors = np.logaddexp.accumulate(log_terms)
        stop = _stopping_index(log_terms, log_floors)
        if stop is not None:
            return log_terms[:stop + 1]
        start = ells[-1] + 1
    raise ConvergenceError(f"series did not converge within {SERIES_MAX_TERMS} terms")


def _ml3_log_terms(gamma, alpha, beta, lam):
    log_lam = math.log(lam)
    offset = gammaln(beta) - gammaln(gamma)

    def log_terms(ells):
        return ells * log_lam - gammaln(ells + 1.0) + gammaln(gamma + ells) + offset \
            - gammaln(alpha * ells + beta)
    return log_terms


def _ml3_asymptotic(gamma, alpha, beta, lam):
    """Optimally truncated large-lam expansion

        Gamma(beta) lam^-gamma / Gamma(gamma) sum_k (-1)^k Gamma(gamma+k) / (k! Gamma(beta - alpha(gamma+k))) lam^-k,

    or None when its smallest term is not negligible against the sum.
    """
    ks = np.arange(ASYMPTOTIC_MAX_TERMS, dtype=float)
    shifted = beta - alpha * (gamma + ks)
    # 1 / Gamma vanishes at the poles, where gammaln is +inf
    with np.errstate(divide='ignore', invalid='ignore'):
        log_terms = gammaln(gamma + ks) - gammaln(ks + 1.0) - gammaln(shifted) - ks * math.log(lam)
        signs = np.where(np.isfinite(log_terms), (-1.0) ** ks * gammasgn(shifted), 0.0)
    finite = np.isfinite(log_terms)
    if not finite.any():
        return None
    cutoff = int(np.argmin(np.where(finite, log_terms, np.inf)))
    if not finite[:cutoff].any():
        return None
    shift = float(np.max(log_terms[:cutoff][finite[:cutoff]]))
    with np.errstate(invalid='ignore'):
        scaled = np.where(finite[:cutoff], signs[:cutoff] * np.exp(log_terms[:cutoff] - shift), 0.0)
    scaled_sum = math.fsum(scaled)
    if not scaled_sum > 0:
        return None
    if log_terms[cutoff] - shift - math.log(scaled_sum) > math.log(ASYMPTOTIC_RTOL):
        return None
    log_prefactor = gammaln(beta) - gammaln(gamma) - gamma * math.log(lam)
    return scaled_sum * math.exp(shift + log_prefactor)


def _ml3_mpmath(gamma, alpha, beta, lam, peak, log_peak):
    """Arbitrary-precision sum at a working precision sized from the peak term.

    Past the peak the terms alternate with decreasing size, so the sum stops once
    SERIES_PATIENCE consecutive terms are below SERIES_RTOL times the running sum.
    """
    peak_digits = max(log_peak, 0.0) / _LN10
    for attempt in range(GUARD_RETRIES):
        guard = GUARD_DIGITS << attempt
        with mpmath.workdps(int(peak_digits) + guard):
            g, a, b, x = (mpmath.mpf(v) for v in (gamma, alpha, beta, lam))
            scale = mpmath.gamma(b)
            power = mpmath.mpf(1)
            total = mpmath.mpf(0)
            run = 0
            for ell in range(SERIES_MAX_TERMS):
                term = power * scale * mpmath.rgamma(a * ell + b)
                total += term if ell % 2 == 0 else -term
                if ell > peak and abs(term) < SERIES_RTOL * abs(total):
                    run += 1
                    if run >= SERIES_PATIENCE:
                        break
                else:
                    run = 0
                power *= x * (g + ell) / (ell + 1)
            else:
                raise ConvergenceError(f"series did not converge within {SERIES_MAX_TERMS} terms")
            # the guard digits must outlast the cancellation
            if total > 0 and float(mpmath.log10(total)) > peak_digits - guard + 5:
                return float(total)
        logger.debug("ml3 sum at lam=%s exhausted %d guard digits, retrying", lam, guard)
    raise ConvergenceError(f"ml3 series at lam={lam} lost all {guard} guard digits to cancellation")


def ml3_function(gamma, alpha, beta, lam):
    """Normalized three-parameter Mittag-Leffler function at -lam.

    E^{(gamma)}_{alpha,beta}(-lam) = sum_l (-lam)^l / l! * Gamma(gamma+l) Gamma(beta)
                                      / (Gamma(gamma) Gamma(alpha l + beta)),

    normalized to 1 at lam = 0. With gamma = theta/alpha + 1 and beta = theta + 1
    it is the Laplace transform E[exp(-lam T_{alpha,theta}^{-alpha})].

    Large lam goes through the algebraic expansion in lam^-1, which is accurate
    exactly where the series would need thousands of digits. Otherwise the
    series is summed in floats, or in mpmath when cancellation eats more than
    MAX_LOST_DIGITS.
    """
    gamma, alpha, beta, lam = float(gamma), float(alpha), float(beta), float(lam)
    if not gamma > 0 or not beta > 0:
        raise DomainError(f"gamma and beta must be positive, got gamma={gamma}, beta={beta}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not lam >= 0 or not math.isfinite(lam):
        raise DomainError(f"lam must be a nonnegative finite real, got {lam}")
    if lam == 0.0:
        return 1.0

    asymptotic = _ml3_asymptotic(gamma, alpha, beta, lam)
    if asymptotic is not None:
        return asymptotic

    log_terms = _collect_terms(_ml3_log_terms(gamma, alpha, beta, lam), alternating=True)
    peak = int(np.argmax(log_terms))
    shift = float(log_terms[peak])
    signs = (-1.0) ** np.arange(log_terms.size)
    scaled_sum = math.fsum(signs * np.exp(log_terms - shift))
    lost = -math.log10(scaled_sum) if scaled_sum > 0 else math.inf
    if lost <= MAX_LOST_DIGITS:
        return scaled_sum * math.exp(shift)

    logger.debug("ml3 series lost %.1f digits at lam=%s, switching to mpmath", lost, lam)
    return _ml3_mpmath(gamma, alpha, beta, lam, peak, shift)


def hyp1f1_neg(a, b, lam):
    """Kummer's 1F1(a; b; -lam) for b > a > 0, equal to E[exp(-lam B_{a,b-a})].

    Evaluated through Kummer's transformation exp(-lam) 1F1(b-a; b; lam),
    whose series has positive terms only.
    """
    a, b, lam = float(a), float(b), float(lam)
    if not b > a > 0:
        raise DomainError(f"need b > a > 0, got a={a}, b={b}")
    if not lam >= 0 or not math.isfinite(lam):
        raise DomainError(f"lam must be a nonnegative finite real, got {lam}")
    if lam == 0.0:
        return 1.0

    c = b - a
    log_lam = math.log(lam)
    offset = gammaln(b) - gammaln(c)

    def log_terms(ells):
        return gammaln(c + ells) - gammaln(b + ells) + offset + ells * log_lam - gammaln(ells + 1.0)

    terms = _collect_terms(log_terms, alternating=False)
    return math.exp(min(0.0, float(logsumexp(terms)) - lam))
