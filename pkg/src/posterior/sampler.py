"""
Posterior samplers for both representations and reproducible batches
"""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import DomainError
from ..gibbs.partition import Partition
from ..sampling.rng import RngState
from ..sampling.sticks import DEFAULT_EPS, sample_dirichlet, sample_pd_given_total
from .joint import SIR_PROPOSALS, sample_joint
from .measure import PosteriorMeasure

logger = logging.getLogger(__name__)


def _as_partition(p):
    return p if isinstance(p, Partition) else Partition(tuple(p))


def _sticks_for(rng, model, draw, eps):
    if draw.sticks is not None:
        return draw.sticks
    return sample_pd_given_total(rng, model.params, draw.t, eps)


def sample_posterior_t1(rng, model, p, eps=DEFAULT_EPS, method='auto', proposals=SIR_PROPOSALS):
    """R P_hat + (1 - R) sum_j D_j delta_{X_j}.

    (R, T) comes from the joint law, D ~ Dirichlet(n_j - alpha) independently,
    and P_hat is PD(alpha | T), so fresh atoms carry R times its sticks.
    """
    p = _as_partition(p)
    draw = sample_joint(rng, model, p.n, p.k, 'T1', proposals, method, with_sticks=True, eps=eps)
    sticks = _sticks_for(rng, model, draw, eps)
    d = sample_dirichlet(rng, np.array(p.block_sizes, dtype=float) - model.alpha)
    return PosteriorMeasure('T1', fixed_atoms=(1.0 - draw.b) * d,
                            continuous=draw.b * sticks.weights,
                            residual=draw.b * sticks.residual,
                            scale_split=draw.b, t_draw=draw.t, ess=draw.ess, method=draw.method)


def sample_posterior_t2(rng, model, p, eps=DEFAULT_EPS, method='auto', proposals=SIR_PROPOSALS):
    """Outer PD(alpha | T) sticks composed with beta H + (1 - beta) sum_j d_j delta_{X_j}.

    Each outer stick independently lands on observed atom j with probability
    (1 - beta) d_j or on a fresh atom with probability beta; the unbroken
    outer residual is split in the same proportions.
    """
    p = _as_partition(p)
    alpha = model.alpha
    draw = sample_joint(rng, model, p.n, p.k, 'T2', proposals, method, with_sticks=True, eps=eps)
    outer = _sticks_for(rng, model, draw, eps)
    d = sample_dirichlet(rng, (np.array(p.block_sizes, dtype=float) - alpha) / alpha)
    shares = np.append((1.0 - draw.b) * d, draw.b)
    target = rng.generator.choice(p.k + 1, size=outer.size, p=shares / shares.sum())
    on_fixed = target < p.k
    fixed = np.bincount(target[on_fixed], weights=outer.weights[on_fixed], minlength=p.k)
    fixed = fixed + outer.residual * shares[:p.k]
    return PosteriorMeasure('T2', fixed_atoms=fixed,
                            continuous=outer.weights[~on_fixed],
                            residual=outer.residual * draw.b,
                            scale_split=draw.b, t_draw=draw.t, ess=draw.ess, method=draw.method)


SAMPLERS = {'T1': sample_posterior_t1, 'T2': sample_posterior_t2}


def sample_posterior_batch(seed, model, p, size, representation='T1', workers=1,
                           eps=DEFAULT_EPS, method='auto', proposals=SIR_PROPOSALS):
    """size posterior draws, draw i on stream (seed, i); order and values do not depend on workers."""
    if representation not in SAMPLERS:
        raise DomainError(f"representation must be one of {sorted(SAMPLERS)}, got {representation!r}")
    sampler = SAMPLERS[representation]
    p = _as_partition(p)

    def one(index):
        return sampler(RngState(seed, stream_id=index), model, p, eps=eps, method=method,
                       proposals=proposals)

    logger.debug("sampling %d %s posteriors for %s with %d workers", size, representation, p, workers)
    if workers <= 1:
        return [one(i) for i in range(size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(size)))
