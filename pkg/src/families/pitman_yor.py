"""
Pitman-Yor closed forms: EPPF, prediction rule, posterior hyperparameters and the seating chain
"""
import math
from typing import NamedTuple

import numpy as np

from ..errors import DomainError
from ..gibbs.partition import Partition
from ..special.numbers import SpecialValue, log_pochhammer


class PitmanYorPosterior(NamedTuple):
    beta_t1: tuple
    tilt_t1: float
    beta_t2: tuple
    tilt_t2: float


def _check(alpha, theta):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not theta > -alpha:
        raise DomainError(f"theta must exceed -alpha={-alpha}, got {theta!r}")


def py_posterior_params(alpha, theta, p):
    """Exact posterior hyperparameters of PY(alpha, theta) given partition p.

    First representation: R ~ Beta(theta + k alpha, n - k alpha), continuous part
    PY(alpha, theta + k alpha). Second: beta ~ Beta(theta/alpha + k, n/alpha - k),
    outer law PY(alpha, theta + n).
    """
    _check(alpha, theta)
    n, k = p.n, p.k
    return PitmanYorPosterior(beta_t1=(theta + k * alpha, n - k * alpha),
                              tilt_t1=theta + k * alpha,
                              beta_t2=(theta / alpha + k, n / alpha - k),
                              tilt_t2=theta + n)


def py_eppf(alpha, theta, p):
    """prod_{i<k} (theta + i alpha) / (theta + 1)_{n-1} prod_j (1 - alpha)_{n_j - 1}."""
    _check(alpha, theta)
    p = p if isinstance(p, Partition) else Partition(tuple(p))
    log_value = math.fsum(math.log(theta + i * alpha) for i in range(1, p.k))
    log_value -= log_pochhammer(theta + 1.0, p.n - 1).log_magnitude
    log_value += math.fsum(log_pochhammer(1.0 - alpha, m - 1).log_magnitude for m in p.block_sizes)
    return SpecialValue(log_value, 1)


def py_predict(alpha, theta, p):
    """((theta + k alpha) / (theta + n), ((n_j - alpha) / (theta + n))_j)."""
    _check(alpha, theta)
    n, k = p.n, p.k
    existing = (np.array(p.block_sizes, dtype=float) - alpha) / (theta + n)
    return (theta + k * alpha) / (theta + n), existing


def crp_new_table_counts(rng, alpha, theta, customers):
    """Number of tables opened by customers[r] arrivals at an empty PY(alpha, theta) restaurant.

    Vectorized over r; the i-th arrival opens a table with probability
    (theta + K alpha) / (theta + i).
    """
    customers = np.asarray(customers, dtype=np.int64)
    _check(alpha, theta)
    gen = rng.generator
    tables = (customers > 0).astype(np.int64)
    for i in range(1, int(customers.max(initial=0))):
        active = customers > i
        opened = gen.random(customers.shape) * (theta + i) < theta + tables * alpha
        tables += active & opened
    return tables
