"""
Draws of the total mass T with density h(t) f_alpha(t)
"""
import math

import numpy as np

from ..errors import DomainError, InvalidBoundError, RejectionBudgetError
from ..gibbs.model import Custom, GeneralizedGamma, MittagLefflerTilt, PitmanYor
from .stable import sample_exp_tilted_stable, sample_positive_stable, sample_tilted_stable
from .sticks import MAX_STICKS, sample_gem_with_total, sample_pd_given_total

REJECTION_BUDGET = 1_000_000


def _fill(n, propose, budget=REJECTION_BUDGET):
    """Collect n accepted values from propose(batch) -> (candidates, accepted mask)."""
    out = np.empty(n)
    filled = 0
    proposed = 0
    batch = max(64, n)
    while filled < n:
        if proposed >= budget:
            raise RejectionBudgetError(f"only {filled} of {n} draws accepted after {proposed} proposals")
        batch = min(batch, budget - proposed)
        candidates, accepted = propose(batch)
        proposed += batch
        keep = candidates[accepted]
        take = min(keep.size, n - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
        batch = min(2 * batch, 1 << 20)
    return out


def _mittag_leffler_draws(rng, model, n):
    family = model.family
    alpha = model.alpha
    theta = family.shifted_theta(model.params)
    gen = rng.generator

    def propose(batch):
        t = np.atleast_1d(sample_tilted_stable(rng, model.params, theta, batch))
        return t, gen.random(batch) < np.exp(-family.lam * t ** -alpha)

    return _fill(n, propose, budget=math.inf)


def _custom_draws(rng, model, n):
    log_sup = model.log_sup_h()
    if log_sup is None:
        raise DomainError(f"custom h {model.family.name!r} needs sup_h or monotone='decreasing' "
                          "for rejection sampling")
    gen = rng.generator

    def propose(batch):
        t = np.atleast_1d(sample_positive_stable(rng, model.params, batch))
        log_ratio = model.log_h(t) - log_sup
        if np.any(log_ratio > 1e-12):
            raise InvalidBoundError(f"custom h {model.family.name!r} exceeds its declared bound "
                                    f"at t={float(t[np.argmax(log_ratio)]):.6g}")
        return t, np.log(gen.random(batch)) < log_ratio

    return _fill(n, propose)


def sample_mixing_T(rng, model, size=None):
    """T with density h(t) f_alpha(t) for the model's tilting family."""
    family = model.family
    n = 1 if size is None else int(size)
    if isinstance(family, PitmanYor):
        draws = np.atleast_1d(sample_tilted_stable(rng, model.params, family.theta, n))
    elif isinstance(family, GeneralizedGamma):
        draws = np.atleast_1d(sample_exp_tilted_stable(rng, model.params, family.lam, n))
    elif isinstance(family, MittagLefflerTilt):
        draws = _mittag_leffler_draws(rng, model, n)
    elif isinstance(family, Custom):
        draws = _custom_draws(rng, model, n)
    else:
        raise DomainError(f"unsupported family {family!r}")
    return float(draws[0]) if size is None else draws


def sample_model_sticks(rng, model, eps, max_sticks=None):
    """(T, PD(alpha | T) sticks) with T ~ h(t) f_alpha(t).

    Pitman-Yor draws are exact GEM sticks with their total; Mittag-Leffler and
    bounded-h families thin such draws by h; other families tabulate PD(alpha | T).
    """
    max_sticks = MAX_STICKS if max_sticks is None else max_sticks
    family = model.family
    gen = rng.generator
    if isinstance(family, PitmanYor):
        return sample_gem_with_total(rng, model.params, family.theta, eps, max_sticks)
    if isinstance(family, MittagLefflerTilt):
        theta = family.shifted_theta(model.params)

        def log_accept(t):
            return -family.lam * t ** -model.alpha
    elif model.log_sup_h() is not None:
        theta = 0.0
        log_sup = model.log_sup_h()

        def log_accept(t):
            return float(model.log_h(t)) - log_sup
    else:
        t = sample_mixing_T(rng, model)
        return t, sample_pd_given_total(rng, model.params, t, eps, max_sticks)
    for _ in range(REJECTION_BUDGET):
        t, sticks = sample_gem_with_total(rng, model.params, theta, eps, max_sticks)
        if math.log(gen.random()) < log_accept(t):
            return t, sticks
    raise RejectionBudgetError(f"no stick draw accepted within {REJECTION_BUDGET} proposals")
