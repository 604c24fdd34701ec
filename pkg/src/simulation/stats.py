"""
Kolmogorov-Smirnov and Pearson chi-square tests used by the verification suites
"""
import numpy as np
from scipy import stats

from ..errors import DomainError

MIN_EXPECTED = 5.0
PROB_SUM_TOL = 1e-9


def ks_two_sample(xs, ys):
    """(statistic, p_value) of the two-sample KS test, asymptotic p-value."""
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.size == 0 or ys.size == 0:
        raise DomainError(f"KS test needs nonempty samples, got sizes {xs.size} and {ys.size}")
    result = stats.ks_2samp(xs, ys, method='asymp')
    return float(result.statistic), float(result.pvalue)


def ks_one_sample(xs, cdf):
    """(statistic, p_value) of the KS test of xs against a continuous cdf."""
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise DomainError("KS test needs a nonempty sample")
    result = stats.kstest(xs, cdf)
    return float(result.statistic), float(result.pvalue)


def _pool_tails(counts, expected):
    """Merge cells from both ends inward until every cell expects at least MIN_EXPECTED."""
    counts = list(counts)
    expected = list(expected)
    while len(expected) > 1 and expected[-1] < MIN_EXPECTED:
        expected[-2] += expected.pop()
        counts[-2] += counts.pop()
    while len(expected) > 1 and expected[0] < MIN_EXPECTED:
        expected[1] += expected.pop(0)
        counts[1] += counts.pop(0)
    return np.array(counts, dtype=float), np.array(expected, dtype=float)


def chi_square_pmf(counts, probs):
    """(statistic, p_value) of Pearson's test of counts against probs, with tail pooling.

    Cells are pooled from the tails until each expects at least five counts;
    degrees of freedom are the pooled cell count minus one. Interior cells
    with small expectation are left as they are.
    """
    counts = np.asarray(counts, dtype=float).ravel()
    probs = np.asarray(probs, dtype=float).ravel()
    if counts.shape != probs.shape:
        raise DomainError(f"counts and probs differ in length: {counts.size} vs {probs.size}")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > PROB_SUM_TOL:
        raise DomainError(f"probs must be a probability vector, sum is {probs.sum()!r}")
    if np.any(counts < 0):
        raise DomainError("counts must be nonnegative")
    total = counts.sum()
    if total <= 0:
        raise DomainError("chi-square test needs at least one count")
    observed, expected = _pool_tails(counts, total * probs)
    if expected.size < 2:
        return 0.0, 1.0
    statistic = float(np.sum((observed - expected) ** 2 / expected))
    return statistic, float(stats.chi2.sf(statistic, expected.size - 1))
