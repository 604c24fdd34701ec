"""
Gibbs-type models: the stable index plus a tilting family h with E[h(T_alpha)] = 1
"""
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from ..cache.manager import MemoTable
from ..errors import ConvergenceError, DomainError
from ..special.numbers import StableParams, neg_moment_stable
from ..special.series import ml3_function
from ..special.stable import stable_log_pdf_table

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-4


def _as_array(t):
    return np.asarray(t, dtype=float)


@dataclass(frozen=True)
class PitmanYor:
    """h(t) = t^-theta / E[T_alpha^-theta]."""
    theta: float
    kind = 'pitman_yor'

    def validate(self, params):
        if not math.isfinite(self.theta) or not self.theta > -params.alpha:
            raise DomainError(f"Pitman-Yor theta must exceed -alpha={-params.alpha}, got {self.theta!r}")

    def log_h(self, params, t):
        return -self.theta * np.log(_as_array(t)) - neg_moment_stable(params, self.theta).log_magnitude

    def log_sup_h(self, params):
        if self.theta == 0.0:
            return 0.0
        return None

    def to_dict(self):
        return {'type': self.kind, 'theta': self.theta}


@dataclass(frozen=True)
class GeneralizedGamma:
    """h(t) = exp(lam^alpha - lam t), the exponentially tilted stable mixing law."""
    lam: float
    kind = 'generalized_gamma'

    def validate(self, params):
        if not math.isfinite(self.lam) or not self.lam > 0:
            raise DomainError(f"generalized gamma lambda must be positive, got {self.lam!r}")

    def log_h(self, params, t):
        return self.lam ** params.alpha - self.lam * _as_array(t)

    def log_sup_h(self, params):
        return self.lam ** params.alpha

    def to_dict(self):
        return {'type': self.kind, 'lambda': self.lam}


@dataclass(frozen=True)
class MittagLefflerTilt:
    """h(t) proportional to exp(-lam t^-alpha) t^-(theta + j alpha).

    Normalized by E[T_alpha^-theta'] E^{(theta'/alpha+1)}_{alpha,theta'+1}(-lam)
    with theta' = theta + j alpha; lam = 0 is Pitman-Yor(theta').
    """
    lam: float
    theta: float
    j: int = 0
    kind = 'mittag_leffler_tilt'

    def validate(self, params):
        if not math.isfinite(self.lam) or not self.lam >= 0:
            raise DomainError(f"Mittag-Leffler lambda must be nonnegative, got {self.lam!r}")
        if not math.isfinite(self.theta) or not self.theta > -params.alpha:
            raise DomainError(f"Mittag-Leffler theta must exceed -alpha={-params.alpha}, got {self.theta!r}")
        if isinstance(self.j, bool) or int(self.j) != self.j or self.j < 0:
            raise DomainError(f"j must be a nonnegative integer, got {self.j!r}")

    def shifted_theta(self, params):
        return self.theta + self.j * params.alpha

    def log_normalizer(self, params):
        theta = self.shifted_theta(params)
        ml = ml3_function(theta / params.alpha + 1.0, params.alpha, theta + 1.0, self.lam)
        if not ml > 0:
            raise ConvergenceError(f"Mittag-Leffler normalizer at lam={self.lam} evaluated to {ml!r}")
        return math.log(ml) + neg_moment_stable(params, theta).log_magnitude

    def log_h(self, params, t):
        t = _as_array(t)
        theta = self.shifted_theta(params)
        return -self.lam * t ** -params.alpha - theta * np.log(t) - self.log_normalizer(params)

    def log_sup_h(self, params):
        theta = self.shifted_theta(params)
        if theta < 0 or (theta > 0 and self.lam == 0):
            return None
        if theta == 0:
            return -self.log_normalizer(params)
        # maximum over u = t^-alpha of -lam u + (theta/alpha) log u
        ratio = theta / params.alpha
        return ratio * (math.log(ratio / self.lam) - 1.0) - self.log_normalizer(params)

    def to_dict(self):
        return {'type': self.kind, 'lambda': self.lam, 'theta': self.theta, 'j': int(self.j)}


# T_alpha falls below monotone_floor(alpha) with probability at most exp(-MONOTONE_TAIL_LOG)
MONOTONE_TAIL_LOG = 700.0
MONOTONE_KINDS = ('decreasing',)


def monotone_floor(params):
    """Lower truncation point of T_alpha from P(T <= t) <= exp(-(1-alpha) (alpha/t)^(alpha/(1-alpha)))."""
    alpha = params.alpha
    return alpha * ((1.0 - alpha) / MONOTONE_TAIL_LOG) ** ((1.0 - alpha) / alpha)


@dataclass(frozen=True)
class CustomH:
    """User tilting function: vectorized h, and either a bound sup h or a declared monotonicity.

    A decreasing h is bounded by its value at monotone_floor(alpha).
    """
    name: str
    h: Callable
    sup_h: Optional[float] = None
    monotone: Optional[str] = None


_CUSTOM_REGISTRY = {}


def register_custom_h(name, h, sup_h=None, monotone=None):
    """Make h available to Custom families and model files under name."""
    if sup_h is not None and not sup_h > 0:
        raise DomainError(f"sup_h must be positive, got {sup_h!r}")
    if monotone is not None and monotone not in MONOTONE_KINDS:
        raise DomainError(f"monotone must be one of {MONOTONE_KINDS} or None, got {monotone!r}")
    _CUSTOM_REGISTRY[name] = CustomH(name, h, None if sup_h is None else float(sup_h), monotone)
    return _CUSTOM_REGISTRY[name]


def get_custom_h(name):
    try:
        return _CUSTOM_REGISTRY[name]
    except KeyError:
        raise DomainError(f"no custom h registered under {name!r}; known: {sorted(_CUSTOM_REGISTRY)}") from None


register_custom_h('unit', lambda t: np.ones_like(np.asarray(t, dtype=float)), sup_h=1.0)


@dataclass(frozen=True)
class Custom:
    """Tilting function looked up by name in the custom-h registry."""
    name: str
    mc_fallback: bool = True
    kind = 'custom'

    def validate(self, params):
        get_custom_h(self.name)

    def log_h(self, params, t):
        values = _as_array(get_custom_h(self.name).h(_as_array(t)))
        if np.any(values < 0):
            raise DomainError(f"custom h {self.name!r} returned a negative value")
        with np.errstate(divide='ignore'):
            return np.log(values)

    def log_sup_h(self, params):
        custom = get_custom_h(self.name)
        if custom.sup_h is not None:
            return math.log(custom.sup_h)
        if custom.monotone == 'decreasing':
            floor = monotone_floor(params)
            with np.errstate(divide='ignore'):
                log_peak = float(np.log(np.ravel(_as_array(custom.h(np.array([floor]))))[0]))
            if math.isfinite(log_peak):
                return log_peak
            logger.debug("decreasing custom h %r has no finite bound at t=%.3g", self.name, floor)
        return None

    def to_dict(self):
        return {'type': self.kind, 'name': self.name, 'mc_fallback': self.mc_fallback}


FAMILIES = {cls.kind: cls for cls in (PitmanYor, GeneralizedGamma, MittagLefflerTilt, Custom)}


def family_from_dict(document):
    document = dict(document)
    kind = document.pop('type', None)
    if kind not in FAMILIES:
        raise DomainError(f"unknown family type {kind!r}; expected one of {sorted(FAMILIES)}")
    if 'lambda' in document:
        document['lam'] = document.pop('lambda')
    try:
        return FAMILIES[kind](**document)
    except TypeError as exc:
        raise DomainError(f"bad {kind} family fields: {exc}") from None


@dataclass(frozen=True)
class GibbsModel:
    """alpha-stable Poisson-Kingman model PK_alpha(h f_alpha).

    The model is immutable; Gibbs weights Psi_{n,k} are memoized per instance.
    """
    params: StableParams
    family: object
    psi_cache: MemoTable = field(default_factory=lambda: MemoTable('psi'),
                                 compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.params, StableParams):
            object.__setattr__(self, 'params', StableParams(self.params))
        if not hasattr(self.family, 'kind') or self.family.kind not in FAMILIES:
            raise DomainError(f"unsupported family {self.family!r}")
        self.family.validate(self.params)
        if isinstance(self.family, Custom):
            gap = self.normalization_gap()
            if gap > NORMALIZATION_TOL:
                logger.warning("custom h %r has E[h(T_alpha)] off by %.3g", self.family.name, gap)

    @property
    def alpha(self):
        return self.params.alpha

    def log_h(self, t):
        return self.family.log_h(self.params, t)

    def h(self, t):
        values = np.exp(self.log_h(t))
        if np.ndim(t) == 0:
            return float(values)
        return values

    def log_sup_h(self):
        return self.family.log_sup_h(self.params)

    def normalization_gap(self):
        """|E[h(T_alpha)] - 1| by quadrature over log t."""
        table = stable_log_pdf_table(self.params)

        def integrand(s):
            log_value = table.log_pdf(np.array([math.exp(s)]))[0] + s + float(self.log_h(math.exp(s)))
            return math.exp(log_value) if log_value > -745.0 else 0.0

        lower, _ = integrate.quad(integrand, -np.inf, 0.0, limit=200)
        upper, _ = integrate.quad(integrand, 0.0, np.inf, limit=200)
        return abs(lower + upper - 1.0)

    def to_dict(self):
        return {'alpha': self.alpha, 'family': self.family.to_dict()}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, document):
        try:
            alpha, family = document['alpha'], document['family']
        except (KeyError, TypeError):
            raise DomainError("a model document needs 'alpha' and 'family'") from None
        return cls(StableParams(alpha), family_from_dict(family))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __str__(self):
        fields = ", ".join(f"{k}={v}" for k, v in self.family.to_dict().items() if k != 'type')
        return f"{self.family.kind}(alpha={self.alpha}, {fields})"
