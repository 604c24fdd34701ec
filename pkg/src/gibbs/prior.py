"""
Prior partition laws: EPPF, block-count law, prediction rule and sequential sampling
"""
import numpy as np

from ..special.numbers import _check_count, gen_stirling, log_canonical_eppf
from .partition import Partition, integer_partitions
from .weights import gibbs_weight_v, psi_weight


def _as_partition(p):
    return p if isinstance(p, Partition) else Partition(tuple(p))


def eppf(model, p):
    """Probability of one labeled partition of [n] with block sizes p: Psi_{n,k} p_alpha(n_1, ..., n_k)."""
    p = _as_partition(p)
    return psi_weight(model, p.n, p.k) * log_canonical_eppf(model.params, p.block_sizes)


def k_pmf(model, n):
    """P(K_n = k) for k = 1..n as a vector (entry k-1)."""
    n = _check_count(n, 'n', 1)
    return np.array([(gibbs_weight_v(model, n, k) * gen_stirling(model.params, n, k)).value
                     for k in range(1, n + 1)])


def predict(model, p):
    """Prediction rule after observing partition p.

    Returns (new_table_prob, existing) with
    new_table_prob = Psi_{n+1,k+1} / Psi_{n,k} k alpha / n and
    existing[j] = Psi_{n+1,k} / Psi_{n,k} (n_j - alpha) / n.
    """
    p = _as_partition(p)
    n, k, alpha = p.n, p.k, model.alpha
    psi = psi_weight(model, n, k)
    new_table_prob = (psi_weight(model, n + 1, k + 1) / psi).value * k * alpha / n
    stay = (psi_weight(model, n + 1, k) / psi).value / n
    existing = stay * (np.array(p.block_sizes, dtype=float) - alpha)
    return new_table_prob, existing


def _seat_customers(rng, model, n):
    """Labels 0, 1, ... of n customers seated by the prediction rule, with the final partition."""
    n = _check_count(n, 'n', 1)
    gen = rng.generator
    labels = [0]
    partition = Partition((1,))
    for _ in range(1, n):
        new_table_prob, existing = predict(model, partition)
        probs = np.append(existing, new_table_prob)
        j = int(np.searchsorted(np.cumsum(probs), gen.random() * probs.sum(), side='right'))
        j = min(j, partition.k)
        labels.append(j)
        partition = partition.seat(j)
    return labels, partition


def sample_partition_sequential(rng, model, n):
    """Partition of [n] grown one customer at a time from the single-block seed."""
    return _seat_customers(rng, model, n)[1]


def sample_marginal(rng, model, n, base_sampler):
    """X_1..X_n from the marginal law: ties follow the seating, fresh values come from base_sampler(rng)."""
    labels, partition = _seat_customers(rng, model, n)
    atoms = [base_sampler(rng) for _ in range(partition.k)]
    return [atoms[label] for label in labels]


def profile_pmf(model, n):
    """Probability of each block-size profile of [n], eppf times the number of labeled partitions."""
    n = _check_count(n, 'n', 1)
    out = {}
    for sizes in integer_partitions(n):
        p = Partition(sizes)
        out[sizes] = eppf(model, p).value * p.multiplicity()
    return out

