"""
Log-scale numbers, Pochhammer symbols and generalized Stirling numbers
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from ..cache.manager import MemoTable
from ..errors import DomainError

logger = logging.getLogger(__name__)

# Up to this length the Pochhammer log is an exact running sum of log-factors
DIRECT_PRODUCT_MAX = 512

# Alternating Stirling sums losing more than half the mantissa fall back to the recursion
STIRLING_MAX_LOST_BITS = 26

_stirling_tables = MemoTable('stirling', capacity=32)


@dataclass(frozen=True)
class StableParams:
    """Index of a positive stable law, strictly inside (0, 1)."""
    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not math.isfinite(alpha) or not 0.0 < alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, 'alpha', alpha)

    @property
    def kappa(self):
        """Exponent alpha / (1 - alpha) of the Kanter representation."""
        return self.alpha / (1.0 - self.alpha)


@dataclass(frozen=True)
class SpecialValue:
    """Real number carried as (log|x|, sign).

    sign is -1, 0 or +1; sign 0 is the exact zero and forces
    log_magnitude to -inf.
    """
    log_magnitude: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        object.__setattr__(self, 'sign', int(self.sign))
        if self.sign == 0:
            object.__setattr__(self, 'log_magnitude', -math.inf)
        elif not math.isfinite(self.log_magnitude):
            raise DomainError(f"nonzero SpecialValue needs a finite log, got {self.log_magnitude!r}")
        object.__setattr__(self, 'log_magnitude', float(self.log_magnitude))

    @classmethod
    def zero(cls):
        return cls(-math.inf, 0)

    @classmethod
    def one(cls):
        return cls(0.0, 1)

    @classmethod
    def from_float(cls, x):
        x = float(x)
        if x == 0.0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def value(self):
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_magnitude)
        except OverflowError:
            return self.sign * math.inf

    def log(self):
        """Natural log of a strictly positive value."""
        if self.sign != 1:
            raise DomainError("log of a nonpositive SpecialValue")
        return self.log_magnitude

    def __mul__(self, other):
        if not isinstance(other, SpecialValue):
            other = SpecialValue.from_float(other)
        if self.sign == 0 or other.sign == 0:
            return SpecialValue.zero()
        return SpecialValue(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, SpecialValue):
            other = SpecialValue.from_float(other)
        if other.sign == 0:
            raise DomainError("division by a zero SpecialValue")
        if self.sign == 0:
            return SpecialValue.zero()
        return SpecialValue(self.log_magnitude - other.log_magnitude, self.sign * other.sign)

    def __neg__(self):
        return SpecialValue(self.log_magnitude, -self.sign)

    def __add__(self, other):
        if not isinstance(other, SpecialValue):
            other = SpecialValue.from_float(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        big, small = (self, other) if self.log_magnitude >= other.log_magnitude else (other, self)
        ratio = math.exp(small.log_magnitude - big.log_magnitude)
        if big.sign == small.sign:
            return SpecialValue(big.log_magnitude + math.log1p(ratio), big.sign)
        if ratio == 1.0:
            return SpecialValue.zero()
        return SpecialValue(big.log_magnitude + math.log1p(-ratio), big.sign)

    def __sub__(self, other):
        if not isinstance(other, SpecialValue):
            other = SpecialValue.from_float(other)
        return self + (-other)

    def to_dict(self):
        return {'log_magnitude': self.log_magnitude, 'sign': self.sign}


def _check_count(n, name='n', minimum=0):
    if isinstance(n, bool) or int(n) != n or n < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {n!r}")
    return int(n)


def signed_log_pochhammer(x, n):
    """(x)_n as a SpecialValue, returning the exact zero when a factor vanishes."""
    n = _check_count(n)
    x = float(x)
    if n == 0:
        return SpecialValue.one()
    if x > 0 and n > DIRECT_PRODUCT_MAX:
        return SpecialValue(float(gammaln(x + n) - gammaln(x)), 1)
    factors = x + np.arange(n, dtype=float)
    if np.any(factors == 0.0):
        return SpecialValue.zero()
    negatives = int(np.count_nonzero(factors < 0))
    log_magnitude = math.fsum(np.log(np.abs(factors)))
    return SpecialValue(log_magnitude, -1 if negatives % 2 else 1)


def log_pochhammer(x, n):
    """Log of the rising factorial (x)_n = Gamma(x+n)/Gamma(x).

    Raises DomainError when some factor x+j, 0 <= j < n, is zero.
    """
    result = signed_log_pochhammer(x, n)
    if result.sign == 0:
        raise DomainError(f"(x)_n vanishes for x={x!r}, n={n!r}")
    return result


def neg_moment_stable(params, theta):
    """E[T_alpha^{-theta}] = Gamma(theta/alpha + 1) / Gamma(theta + 1)."""
    alpha = params.alpha
    theta = float(theta)
    if not theta > -alpha:
        raise DomainError(f"theta must exceed -alpha={-alpha}, got {theta!r}")
    return SpecialValue(float(gammaln(theta / alpha + 1.0) - gammaln(theta + 1.0)), 1)


def log_canonical_eppf(params, block_sizes):
    """log p_alpha(n_1, ..., n_k), the PD(alpha, 0) partition probability."""
    alpha = params.alpha
    sizes = [_check_count(m, 'block size', 1) for m in block_sizes]
    if not sizes:
        raise DomainError("block_sizes must be nonempty")
    n, k = sum(sizes), len(sizes)
    log_value = (k - 1) * math.log(alpha) + gammaln(k) - gammaln(n)
    log_value += math.fsum(log_pochhammer(1.0 - alpha, m - 1).log_magnitude for m in sizes)
    return SpecialValue(float(log_value), 1)


def _stirling_log_table(alpha, n_max):
    """log S_alpha(n, k) for 0 <= k <= n <= n_max by the subtraction-free recursion."""
    table = np.full((n_max + 1, n_max + 2), -np.inf)
    table[0, 0] = 0.0
    for n in range(n_max):
        ks = np.arange(1, n + 2)
        coef = n - ks * alpha
        safe = np.where(coef > 0, coef, 1.0)
        stay = np.where(coef > 0, np.log(safe) + table[n, ks], -np.inf)
        table[n + 1, ks] = np.logaddexp(table[n, ks - 1], stay)
    return table


def _stirling_by_recursion(alpha, n, k):
    table = _stirling_tables.get(alpha)
    if table is None or table.shape[0] <= n:
        size = max(n, 2 * (table.shape[0] - 1) if table is not None else 32)
        table = _stirling_log_table(alpha, size)
        _stirling_tables.put(alpha, table)
    return SpecialValue(float(table[n, k]), 1)


def gen_stirling(params, n, k):
    """Generalized Stirling number S_alpha(n, k) of the second kind.

    Evaluated as [alpha^k k!]^{-1} sum_j (-1)^j C(k,j) (-j alpha)_n with
    positive and negative terms accumulated separately in log space; when
    the difference cancels away more than half the mantissa the memoized
    recursion S(n+1,k) = S(n,k-1) + (n - k alpha) S(n,k) is used instead.
    """
    alpha = params.alpha
    n = _check_count(n, 'n', 1)
    k = _check_count(k, 'k', 1)
    if k > n:
        raise DomainError(f"k must lie in [1, n], got k={k}, n={n}")

    positive, negative = [], []
    for j in range(1, k + 1):
        term = signed_log_pochhammer(-j * alpha, n)
        if term.sign == 0:
            continue
        log_term = term.log_magnitude + gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1)
        sign = term.sign * (-1) ** j
        (positive if sign > 0 else negative).append(log_term)

    log_pos = logsumexp(positive) if positive else -np.inf
    log_neg = logsumexp(negative) if negative else -np.inf
    if log_pos > log_neg:
        gap = log_neg - log_pos
        lost_bits = -math.log2(-math.expm1(gap)) if gap > -50 else 0.0
        if lost_bits <= STIRLING_MAX_LOST_BITS:
            log_sum = log_pos + math.log1p(-math.exp(gap))
            log_norm = k * math.log(alpha) + gammaln(k + 1)
            return SpecialValue(float(log_sum - log_norm), 1)

    logger.debug("alternating Stirling sum cancelled at alpha=%s n=%d k=%d, using recursion",
                 alpha, n, k)
    return _stirling_by_recursion(alpha, n, k)
