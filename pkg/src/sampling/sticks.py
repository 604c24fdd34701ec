"""
Stick-breaking weights: Dirichlet vectors, GEM(alpha, theta) and PD(alpha | t) sequences
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaln, logsumexp

from ..cache.manager import MemoTable
from ..errors import DomainError, InversionError, TruncationError
from ..gibbs.partition import Partition
from ..special.stable import stable_log_pdf_table
from .stable import sample_tilted_stable

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-6
MAX_STICKS = 10_000
STICK_CHUNK = 64

# Per-pick tabulation: points per geometric half and on the uniform overlay
PICK_GRID_SIZE = 256
PICK_GRID_FLOOR = 1e-14
PICK_TOTAL_DECIMALS = 4
PICK_MASS_RTOL = 1e-3

_pick_tables = MemoTable('pick-density', capacity=4096)


@dataclass(frozen=True)
class StickWeights:
    """Truncated stick-breaking sequence with the unbroken mass kept as residual."""
    weights: np.ndarray
    residual: float
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or np.any(weights < 0) or np.any(weights > 1):
            raise DomainError("stick weights must be a vector of reals in [0, 1]")
        if not 0.0 <= self.residual < 1.0 or self.residual > self.eps * (1.0 + 1e-9) + 1e-12:
            raise DomainError(f"residual {self.residual!r} outside [0, eps={self.eps}]")
        if abs(math.fsum(weights) + self.residual - 1.0) > 1e-10:
            raise DomainError("stick weights and residual must total 1")
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'residual', float(self.residual))

    @property
    def size(self):
        return int(self.weights.size)

    def to_dict(self):
        return {'weights': self.weights.tolist(), 'residual': self.residual, 'eps': self.eps}


def _check_eps(eps):
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    return eps


def _from_breaks(fractions, log_residual, eps):
    """StickWeights from break fractions V_j and log prod (1 - V_j)."""
    log_remaining = np.concatenate([[0.0], np.cumsum(np.log1p(-fractions))[:-1]])
    weights = fractions * np.exp(log_remaining)
    residual = min(max(0.0, 1.0 - math.fsum(weights)), math.exp(log_residual))
    return StickWeights(weights, residual, eps)


def sample_dirichlet(rng, params, size=None):
    """Dirichlet draw through log-gamma variates, exact for small shape parameters.

    log G_a = log G_{a+1} + log(U) / a keeps tiny shapes from underflowing.
    """
    shapes = np.asarray(params, dtype=float)
    if shapes.ndim != 1 or shapes.size == 0 or np.any(~(shapes > 0)):
        raise DomainError(f"Dirichlet parameters must be positive, got {params!r}")
    gen = rng.generator
    shape = (1 if size is None else int(size), shapes.size)
    log_g = np.log(gen.gamma(shapes + 1.0, 1.0, shape)) + np.log(gen.random(shape)) / shapes
    draws = np.exp(log_g - logsumexp(log_g, axis=1, keepdims=True))
    return draws[0] if size is None else draws


def _gem_breaks(gen, alpha, theta, eps, max_sticks):
    """Break fractions V_j ~ Beta(1-alpha, theta+j alpha) until prod (1-V_j) <= eps."""
    log_eps = math.log(eps)
    fractions = []
    log_residual = 0.0
    start = 1
    while start <= max_sticks:
        stop = min(start + STICK_CHUNK * 2 ** len(fractions), max_sticks + 1)
        js = np.arange(start, stop)
        v = gen.beta(1.0 - alpha, theta + js * alpha)
        log_rest = log_residual + np.cumsum(np.log1p(-v))
        hit = np.flatnonzero(log_rest <= log_eps)
        if hit.size:
            fractions.append(v[:hit[0] + 1])
            return np.concatenate(fractions), float(log_rest[hit[0]])
        fractions.append(v)
        log_residual = float(log_rest[-1])
        start = stop
    raise TruncationError(f"residual {math.exp(log_residual):.3g} still above eps={eps} "
                          f"after {max_sticks} sticks")


def _gem(rng, params, theta, eps, max_sticks):
    theta = float(theta)
    if not theta > -params.alpha:
        raise DomainError(f"theta must exceed -alpha={-params.alpha}, got {theta!r}")
    eps = _check_eps(eps)
    fractions, log_residual = _gem_breaks(rng.generator, params.alpha, theta, eps, max_sticks)
    return _from_breaks(fractions, log_residual, eps), log_residual


def sample_gem_py(rng, params, theta, eps=DEFAULT_EPS, max_sticks=MAX_STICKS):
    """Size-biased GEM(alpha, theta) sticks W_j = V_j prod_{i<j} (1 - V_i), truncated at residual <= eps."""
    return _gem(rng, params, theta, eps, max_sticks)[0]


def sample_gem_with_total(rng, params, theta, eps=DEFAULT_EPS, max_sticks=MAX_STICKS):
    """Joint draw of T ~ T_{alpha,theta} and the PD(alpha | T) size-biased sticks.

    After m breaks the unbroken total S_m = T prod (1 - V_i) is T_{alpha, theta + m alpha}
    and independent of V_1..V_m, so T = S_m / prod (1 - V_i).
    """
    sticks, log_residual = _gem(rng, params, theta, eps, max_sticks)
    s_m = sample_tilted_stable(rng, params, float(theta) + sticks.size * params.alpha)
    return s_m * math.exp(-log_residual), sticks


def pick_density(params, t, v):
    """Density of the first size-biased pick V under PD(alpha | t).

    p(v | t) = alpha / Gamma(1-alpha) t^-alpha v^-alpha f_alpha(t (1-v)) / f_alpha(t) on (0, 1).
    """
    alpha = params.alpha
    t = float(t)
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    table = stable_log_pdf_table(params)
    v_arr = np.asarray(v, dtype=float)
    out = np.zeros(v_arr.shape)
    inside = (v_arr > 0) & (v_arr < 1)
    vi = v_arr[inside]
    log_p = (math.log(alpha) - gammaln(1.0 - alpha) - alpha * math.log(t) - alpha * np.log(vi)
             + table.log_pdf(t * (1.0 - vi)) - table.log_pdf(np.array([t]))[0])
    out[inside] = np.exp(log_p)
    if np.ndim(v) == 0:
        return float(out)
    return out


def _pick_grid():
    lower = np.geomspace(PICK_GRID_FLOOR, 0.5, PICK_GRID_SIZE)
    upper = 1.0 - np.geomspace(0.5, PICK_GRID_FLOOR, PICK_GRID_SIZE)
    middle = np.linspace(0.0, 1.0, PICK_GRID_SIZE + 1)
    return np.unique(np.concatenate([lower, upper, middle]))


class PickInverter:
    """Quantile function of the first pick under PD(alpha | t) for one total.

    In w = v^(1-alpha) the pick density is proportional to f_alpha(t (1 - v)),
    which is bounded; its cumulative trapezoid on a grid refined at both ends
    is inverted with a monotone cubic.
    """

    def __init__(self, params, t):
        alpha = params.alpha
        v = _pick_grid()
        w = v ** (1.0 - alpha)
        log_f = stable_log_pdf_table(params).log_pdf(t * (1.0 - v))
        shift = float(np.max(log_f))
        if not math.isfinite(shift):
            raise InversionError(f"pick density vanishes on the grid at t={t!r}")
        cdf = cumulative_trapezoid(np.exp(log_f - shift), w, initial=0.0)
        mass = cdf[-1]
        if not mass > 0 or not math.isfinite(mass):
            raise InversionError(f"pick tabulation has no mass at t={t!r}")

        # (1-alpha) int v^-alpha f(t(1-v)) dv = (1-alpha) Gamma(1-alpha) t^alpha f(t) / alpha
        log_expected = (math.log1p(-alpha) + gammaln(1.0 - alpha) + alpha * math.log(t)
                        + stable_log_pdf_table(params).log_pdf(np.array([t]))[0] - math.log(alpha))
        gap = abs(math.log(mass) + shift - log_expected)
        if gap > PICK_MASS_RTOL:
            logger.warning("pick tabulation mass off by %.2e (log scale) at alpha=%s t=%.4g",
                           gap, alpha, t)

        cdf = cdf / mass
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        self.inverse = PchipInterpolator(cdf[keep], w[keep])
        self.exponent = 1.0 / (1.0 - alpha)

    def __call__(self, u):
        w = np.clip(self.inverse(u), 0.0, 1.0)
        return np.clip(w ** self.exponent, np.finfo(float).tiny, 1.0 - np.finfo(float).eps)


def _pick_inverter(params, t):
    log_t = round(math.log(t), PICK_TOTAL_DECIMALS)
    return _pick_tables.get_or_compute((params.alpha, log_t),
                                       lambda: PickInverter(params, math.exp(log_t)))


def sample_pd_given_total(rng, params, t, eps=DEFAULT_EPS, max_sticks=MAX_STICKS):
    """Size-biased PD(alpha | t) sticks: pick V from p(. | t), recurse on the remaining total t (1 - V)."""
    t = float(t)
    if not t > 0 or not math.isfinite(t):
        raise DomainError(f"t must be a positive finite real, got {t!r}")
    eps = _check_eps(eps)
    gen = rng.generator
    log_eps = math.log(eps)
    fractions = []
    log_residual = 0.0
    total = t
    while log_residual > log_eps:
        if len(fractions) >= max_sticks:
            raise TruncationError(f"residual {math.exp(log_residual):.3g} still above eps={eps} "
                                  f"after {max_sticks} sticks")
        v = float(_pick_inverter(params, total)(gen.random()))
        fractions.append(v)
        log_residual += math.log1p(-v)
        total *= 1.0 - v
    return _from_breaks(np.array(fractions), log_residual, eps)


def sample_labels_from_sticks(rng, sticks, n):
    """n iid labels from the sticks; draws landing in the residual get fresh labels -1, -2, ..."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    probs = np.append(sticks.weights, sticks.residual)
    labels = rng.generator.choice(probs.size, size=n, p=probs / probs.sum())
    fresh = labels == sticks.size
    labels[fresh] = -np.arange(1, int(fresh.sum()) + 1)
    return labels


def sample_partition_from_sticks(rng, sticks, n):
    """Partition of n iid draws from the sticks; residual hits are singletons."""
    return Partition.from_labels(sample_labels_from_sticks(rng, sticks, n).tolist())
