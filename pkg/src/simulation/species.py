"""
Species discovery: new blocks among m further draws after observing a partition
"""
import logging
from typing import NamedTuple

import numpy as np

from ..errors import DomainError
from ..families.pitman_yor import crp_new_table_counts
from ..gibbs.model import PitmanYor
from ..gibbs.partition import Partition
from ..posterior.joint import sample_joint
from ..posterior.sampler import sample_posterior_t1
from ..sampling.mixing import sample_mixing_T, sample_model_sticks
from ..sampling.sticks import DEFAULT_EPS
from .stats import ks_two_sample

logger = logging.getLogger(__name__)


class SpeciesDiscovery(NamedTuple):
    """m^(-alpha) K_m per m (one entry per rep) and the draws of the almost sure limit."""
    scaled: dict
    limit: np.ndarray

    def ks_by_m(self):
        """KS distance between each m's scaled counts and the limit draws."""
        return {m: ks_two_sample(values, self.limit)[0] for m, values in self.scaled.items()}


def _check_m_values(m_values):
    m_values = [int(m) for m in m_values]
    if any(m < 0 for m in m_values) or any(b <= a for a, b in zip(m_values, m_values[1:])):
        raise DomainError(f"m_values must be nonnegative and increasing, got {m_values!r}")
    return m_values


def _fresh_blocks(gen, weights, residual, draws):
    """Distinct atoms among draws iid picks from weights, residual hits counted as singletons."""
    if draws == 0:
        return 0
    probs = np.append(weights, residual)
    picks = gen.choice(probs.size, size=draws, p=probs / probs.sum())
    hits_residual = int(np.sum(picks == weights.size))
    return np.unique(picks[picks < weights.size]).size + hits_residual


def _pitman_yor_counts(rng, model, p, m_values, reps):
    alpha = model.alpha
    gen = rng.generator
    if p is None:
        share = np.ones(reps)
        theta = model.family.theta
    else:
        share = gen.beta(model.family.theta + p.k * alpha, p.n - p.k * alpha, reps)
        theta = model.family.theta + p.k * alpha
    counts = {}
    for m in m_values:
        fresh_customers = gen.binomial(m, share)
        counts[m] = crp_new_table_counts(rng, alpha, theta, fresh_customers).astype(float)
    return counts


def _stick_counts(rng, model, p, m_values, reps, eps):
    gen = rng.generator
    counts = {m: np.empty(reps) for m in m_values}
    for r in range(reps):
        if p is None:
            _, sticks = sample_model_sticks(rng, model, eps)
            share, weights, residual = 1.0, sticks.weights, sticks.residual
        else:
            measure = sample_posterior_t1(rng, model, p, eps=eps)
            share = measure.scale_split
            weights, residual = measure.continuous / share, measure.residual / share
        for m in m_values:
            counts[m][r] = _fresh_blocks(gen, weights, residual, int(gen.binomial(m, share)))
    return counts


def _limit_draws(rng, model, p, reps):
    alpha = model.alpha
    if p is None:
        return np.atleast_1d(sample_mixing_T(rng, model, reps)) ** -alpha
    out = np.empty(reps)
    for r in range(reps):
        draw = sample_joint(rng, model, p.n, p.k, 'T1')
        out[r] = draw.b ** alpha * draw.t ** -alpha
    return out


def species_discovery_sim(rng, model, n, p, m_values, reps, eps=DEFAULT_EPS):
    """Scaled new-species counts m^(-alpha) K_m after observing p, with limit draws R^alpha T^(-alpha).

    Each rep draws the first-representation posterior, sends Binomial(m, R)
    of the m new draws to its continuous part and counts the blocks they
    open there. Pitman-Yor posteriors seat those draws in a PD(alpha, theta + k alpha)
    restaurant; other families sample the posterior sticks, where each draw
    landing in the unbroken residual counts as a new block. n = 0 (p None)
    uses the prior, whose limit is T^(-alpha).
    """
    if reps < 1:
        raise DomainError(f"reps must be positive, got {reps!r}")
    m_values = _check_m_values(m_values)
    if n == 0:
        p = None
    else:
        p = p if isinstance(p, Partition) else Partition(tuple(p))
        if p.n != n:
            raise DomainError(f"partition {p} does not cover n={n}")
    logger.debug("species discovery for %s after %s, m in %s, %d reps", model, p, m_values, reps)
    if isinstance(model.family, PitmanYor):
        counts = _pitman_yor_counts(rng, model, p, m_values, reps)
    else:
        counts = _stick_counts(rng, model, p, m_values, reps, eps)
    scaled = {m: counts[m] * (float(m) ** -model.alpha if m > 0 else 0.0) for m in m_values}
    return SpeciesDiscovery(scaled, _limit_draws(rng, model, p, reps))
