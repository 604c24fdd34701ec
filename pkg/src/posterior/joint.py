"""
Joint draws of the posterior scale split and total (b, t) for both representations

First representation:  f(b, t) ~ h(t / b) Beta(k alpha, n - k alpha)(b) f_{alpha,k alpha}(t)
Second representation: f(b, t) ~ h(t / b^(1/alpha)) Beta(k, n/alpha - k)(b) f_{alpha,n}(t)
"""
import logging
from typing import NamedTuple, Optional

import numpy as np

from ..errors import DegeneracyError, DomainError, InvalidBoundError, RejectionBudgetError
from ..gibbs.model import MittagLefflerTilt, PitmanYor
from ..sampling.sticks import DEFAULT_EPS, StickWeights, sample_gem_with_total
from ..sampling.stable import sample_tilted_stable

logger = logging.getLogger(__name__)

SIR_PROPOSALS = 4096
# Resampling one index from the pool biases draws by O(1 / ess)
SIR_ESS_FLOOR = 512
SIR_MAX_PROPOSALS = 1 << 20
REJECTION_BUDGET = 1_000_000

REPRESENTATIONS = ('T1', 'T2')
METHODS = ('auto', 'exact', 'rejection', 'sir')


class JointDraw(NamedTuple):
    """ess is the pool's effective sample size for SIR and 1.0 for an exact or accepted draw."""
    b: float
    t: float
    ess: float
    method: str
    sticks: Optional[StickWeights] = None


class _Layout(NamedTuple):
    """Beta law of b, tilt of t, and the power of b dividing t inside h."""
    beta: tuple
    tilt: float
    b_power: float


def _layout(alpha, n, k, representation, theta=0.0):
    if representation == 'T1':
        return _Layout((theta + k * alpha, n - k * alpha), theta + k * alpha, 1.0)
    return _Layout((theta / alpha + k, n / alpha - k), theta + n, 1.0 / alpha)


def _check(n, k, representation):
    if isinstance(n, bool) or int(n) != n or isinstance(k, bool) or int(k) != k or not 1 <= k <= n:
        raise DomainError(f"need integers 1 <= k <= n, got n={n!r}, k={k!r}")
    if representation not in REPRESENTATIONS:
        raise DomainError(f"representation must be one of {REPRESENTATIONS}, got {representation!r}")


def choose_method(model, method='auto'):
    """Resolve 'auto' and check that an explicit method fits the family."""
    family = model.family
    exact_ok = isinstance(family, PitmanYor)
    rejection_ok = isinstance(family, MittagLefflerTilt) or model.log_sup_h() is not None
    if method == 'auto':
        if exact_ok:
            return 'exact'
        return 'rejection' if rejection_ok else 'sir'
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    if method == 'exact' and not exact_ok:
        raise DomainError(f"exact joint draws need a Pitman-Yor family, got {family.kind}")
    if method == 'rejection' and not rejection_ok:
        raise DomainError(f"rejection needs a Mittag-Leffler family or a bounded h, got {family.kind}")
    return method


def _proposal(rng, model, layout, with_sticks, eps, batch):
    """Proposals (b, t[, sticks]) from the layout; sticks force batch 1."""
    gen = rng.generator
    if with_sticks:
        t, sticks = sample_gem_with_total(rng, model.params, layout.tilt, eps)
        return np.array([gen.beta(*layout.beta)]), np.array([t]), sticks
    b = gen.beta(*layout.beta, batch)
    t = np.atleast_1d(sample_tilted_stable(rng, model.params, layout.tilt, batch))
    return b, t, None


def _exact(rng, model, n, k, representation, with_sticks, eps):
    layout = _layout(model.alpha, n, k, representation, model.family.theta)
    b, t, sticks = _proposal(rng, model, layout, with_sticks, eps, 1)
    return float(b[0]), float(t[0]), sticks


def _rejection(rng, model, n, k, representation, with_sticks, eps):
    alpha = model.alpha
    family = model.family
    if isinstance(family, MittagLefflerTilt):
        layout = _layout(alpha, n, k, representation, family.shifted_theta(model.params))
        b_exponent = alpha if representation == 'T1' else 1.0

        def log_accept(b, t):
            return -family.lam * b ** b_exponent * t ** -alpha
    else:
        layout = _layout(alpha, n, k, representation)
        log_sup = model.log_sup_h()

        def log_accept(b, t):
            log_ratio = model.log_h(t / b ** layout.b_power) - log_sup
            if np.any(log_ratio > 1e-12):
                raise InvalidBoundError(f"h exceeds its declared bound for {family.kind}")
            return log_ratio

    gen = rng.generator
    proposed = 0
    batch = 1 if with_sticks else 256
    while proposed < REJECTION_BUDGET:
        b, t, sticks = _proposal(rng, model, layout, with_sticks, eps, batch)
        proposed += b.size
        hits = np.flatnonzero(np.log(gen.random(b.size)) < log_accept(b, t))
        if hits.size:
            return float(b[hits[0]]), float(t[hits[0]]), sticks
    raise RejectionBudgetError(f"no acceptance within {REJECTION_BUDGET} joint proposals")


def _sir(rng, model, n, k, representation, proposals):
    layout = _layout(model.alpha, n, k, representation)
    gen = rng.generator
    count = int(proposals)
    while True:
        b = gen.beta(*layout.beta, count)
        t = np.atleast_1d(sample_tilted_stable(rng, model.params, layout.tilt, count))
        log_w = np.asarray(model.log_h(t / b ** layout.b_power), dtype=float)
        finite = np.isfinite(log_w)
        ess = 0.0
        if np.any(finite):
            w = np.where(finite, np.exp(log_w - np.max(log_w[finite])), 0.0)
            ess = float(w.sum() ** 2 / np.sum(w * w))
        if ess >= SIR_ESS_FLOOR:
            index = int(gen.choice(count, p=w / w.sum()))
            return float(b[index]), float(t[index]), ess
        if 2 * count > SIR_MAX_PROPOSALS:
            raise DegeneracyError(f"effective sample size {ess:.1f} below {SIR_ESS_FLOOR} "
                                  f"with {count} proposals")
        logger.debug("SIR ess %.1f below floor at %d proposals, doubling", ess, count)
        count *= 2


def sample_joint(rng, model, n, k, representation='T1', proposals=SIR_PROPOSALS, method='auto',
                 with_sticks=False, eps=DEFAULT_EPS):
    """One (b, t) draw; exact and rejection draws may carry the PD(alpha | t) sticks of t."""
    _check(n, k, representation)
    if proposals < 1:
        raise DomainError(f"proposals must be positive, got {proposals!r}")
    method = choose_method(model, method)
    if method == 'exact':
        b, t, sticks = _exact(rng, model, n, k, representation, with_sticks, eps)
        return JointDraw(b, t, 1.0, method, sticks)
    if method == 'rejection':
        b, t, sticks = _rejection(rng, model, n, k, representation, with_sticks, eps)
        return JointDraw(b, t, 1.0, method, sticks)
    b, t, ess = _sir(rng, model, n, k, representation, proposals)
    return JointDraw(b, t, ess, method)


def sample_joint_rt_t1(rng, model, n, k, proposals=SIR_PROPOSALS, method='auto'):
    """(b, t, ess) with b the scale split R_k and t the total of the continuous part."""
    draw = sample_joint(rng, model, n, k, 'T1', proposals, method)
    return draw.b, draw.t, draw.ess


def sample_joint_rt_t2(rng, model, n, k, proposals=SIR_PROPOSALS, method='auto'):
    """(b, t, ess) with b the fresh-mass share beta_k and t the outer total T_{alpha,n}."""
    draw = sample_joint(rng, model, n, k, 'T2', proposals, method)
    return draw.b, draw.t, draw.ess


def representation_scale(model, b, representation):
    """b (first) or b^(1/alpha) (second): dividing t by it gives the prior total T given K_n = k."""
    return b if representation == 'T1' else b ** (1.0 / model.alpha)