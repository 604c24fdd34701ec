"""
Positive stable, polynomially tilted stable and exponentially tilted stable variates
"""
import math

import numpy as np

from ..cache.manager import MemoTable
from ..errors import DomainError
from ..special.stable import _log_sin_ratio

# Below this value of lam^alpha, plain rejection from T_alpha accepts at rate exp(-lam^alpha)
EXP_TILT_REJECTION_MAX = 2.0

_angle_bounds = MemoTable('angle-bounds', capacity=256)


def _as_output(values, size):
    return float(values[0]) if size is None else values


def _count(size):
    if size is None:
        return 1
    size = int(size)
    if size < 0:
        raise DomainError(f"size must be nonnegative, got {size}")
    return size


def sample_positive_stable(rng, params, size=None):
    """Kanter's method: T = (A(U) / E)^((1-alpha)/alpha), U ~ Unif(0, pi), E ~ Exp(1)."""
    n = _count(size)
    gen = rng.generator
    u = gen.uniform(0.0, math.pi, n)
    e = np.maximum(gen.standard_exponential(n), np.finfo(float).tiny)
    log_t = (_log_sin_ratio(params.alpha, u) - np.log(e)) / params.kappa
    return _as_output(np.exp(log_t), size)


def _quadratic_floor(alpha):
    """Largest m with log A(u) - log A(0+) >= m u^2 on (0, pi), less a safety margin."""
    u = np.concatenate([np.geomspace(1e-4, 0.5, 400), np.linspace(0.5, math.pi * (1 - 1e-9), 1600)])
    rise = _log_sin_ratio(alpha, u, math.pi - u) - _log_sin_ratio(alpha, 0.0)
    return 0.95 * float(np.min(rise / u ** 2))


def _pole_ratio_bound(alpha, c_abs, q):
    """Upper bound of A(u)^|c| (pi - u)^q on (0, pi) found on a grid."""
    delta = np.concatenate([np.geomspace(1e-12, 1.0, 1200), np.linspace(1.0, math.pi * (1 - 1e-9), 800)])
    log_ratio = c_abs * _log_sin_ratio(alpha, math.pi - delta, delta) + q * np.log(delta)
    return float(np.max(log_ratio)) + math.log(1.05)


def _sample_tilt_angles(gen, alpha, c, n):
    """n draws from the density proportional to A(u)^(-c) on (0, pi)."""
    log_floor = float(_log_sin_ratio(alpha, 0.0))
    out = np.empty(n)
    filled = 0
    if c > 1.0:
        m = _angle_bounds.get_or_compute(('quad', alpha), lambda: _quadratic_floor(alpha))
        sigma = 1.0 / math.sqrt(2.0 * c * m)
    elif c < 0.0:
        q = -c / (1.0 - alpha)
        log_bound = _angle_bounds.get_or_compute(('pole', alpha, c), lambda: _pole_ratio_bound(alpha, -c, q))
    while filled < n:
        batch = max(64, 2 * (n - filled))
        if 0.0 <= c <= 1.0:
            u = gen.uniform(0.0, math.pi, batch)
            log_accept = -c * (_log_sin_ratio(alpha, u) - log_floor)
        elif c > 1.0:
            u = np.abs(gen.standard_normal(batch)) * sigma
            u = u[u < math.pi]
            log_accept = -c * (_log_sin_ratio(alpha, u, math.pi - u) - log_floor - m * u ** 2)
        else:
            delta = math.pi * gen.random(batch) ** (1.0 / (1.0 - q))
            delta = delta[delta > 0]
            u = math.pi - delta
            log_accept = -c * _log_sin_ratio(alpha, u, delta) + q * np.log(delta) - log_bound
        keep = u[np.log(gen.random(u.size)) < log_accept]
        take = min(keep.size, n - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def _check_tilt(params, theta):
    theta = float(theta)
    if not theta > -params.alpha:
        raise DomainError(f"theta must exceed -alpha={-params.alpha}, got {theta!r}")
    return theta


def sample_tilted_kanter(rng, params, theta, size=None):
    """Draw T_{alpha,theta}, the stable law tilted by t^(-theta), at any alpha.

    Tilting the Kanter pair (U, E) by (E / A(U))^c, c = theta (1-alpha)/alpha,
    makes E ~ Gamma(1 + c) and U ~ A(u)^(-c) independent; U is drawn by
    rejection against a uniform (0 <= c <= 1), a truncated half-normal
    (c > 1) or the (pi - u)^(-|theta|/alpha) pole envelope (c < 0).
    """
    alpha = params.alpha
    theta = _check_tilt(params, theta)
    n = _count(size)
    gen = rng.generator
    c = theta / params.kappa
    g = np.maximum(gen.gamma(1.0 + c, 1.0, n), np.finfo(float).tiny)
    u = _sample_tilt_angles(gen, alpha, c, n)
    log_a = _log_sin_ratio(alpha, u, math.pi - u)
    return _as_output(np.exp((log_a - np.log(g)) / params.kappa), size)


def sample_tilted_stable(rng, params, theta, size=None):
    """Draw T_{alpha,theta}, theta > -alpha.

    theta = 0 is Kanter's method; at alpha = 1/2, 1/T is exactly Gamma(theta + 1/2, scale 4);
    everything else goes through sample_tilted_kanter.
    """
    theta = _check_tilt(params, theta)
    if theta == 0.0:
        return sample_positive_stable(rng, params, size)
    if params.alpha == 0.5:
        return _as_output(1.0 / rng.generator.gamma(theta + 0.5, 4.0, _count(size)), size)
    return sample_tilted_kanter(rng, params, theta, size)


class _DoubleRejection:
    """Devroye's double rejection for the exponentially tilted stable law.

    Produces variates with Laplace transform exp(-((lam + s)^alpha - lam^alpha)).
    """

    def __init__(self, alpha, lam):
        self.alpha = alpha
        self.b = (1.0 - alpha) / alpha
        self.lam_alpha = lam ** alpha
        self.gamma = self.lam_alpha * alpha * (1.0 - alpha)
        self.sqrt_gamma = math.sqrt(self.gamma)
        self.c1 = math.sqrt(math.pi / 2.0)
        c3 = (2.0 + self.c1) * self.sqrt_gamma
        self.xi = (1.0 + math.sqrt(2.0) * c3) / math.pi
        self.psi = c3 * math.exp(-self.gamma * math.pi * math.pi / 8.0) / math.sqrt(math.pi)

    def _sinc(self, x):
        return float(np.sinc(x / math.pi))

    def _b_ratio(self, x):
        a = self.alpha
        return self._sinc(x) / (self._sinc(a * x) ** a * self._sinc((1.0 - a) * x) ** (1.0 - a))

    def _outer_angle(self, gen):
        w1 = self.c1 * self.xi / self.sqrt_gamma
        w2 = 2.0 * math.sqrt(math.pi) * self.psi
        w3 = self.xi * math.pi
        v = gen.random()
        if self.gamma >= 1.0:
            if v < w1 / (w1 + w2):
                return abs(gen.standard_normal()) / self.sqrt_gamma
            w = gen.random()
            return math.pi * (1.0 - w * w)
        w = gen.random()
        if v < w3 / (w2 + w3):
            return math.pi * w
        return math.pi * (1.0 - w * w)

    def _angle_acceptance(self, u, zeta, z):
        rho = math.pi * math.exp(-self.lam_alpha * (1.0 - 1.0 / (zeta * zeta))) \
            / ((1.0 + self.c1) * self.sqrt_gamma / zeta + z)
        d = 0.0
        if u >= 0.0 and self.gamma >= 1.0:
            d += self.xi * math.exp(-self.gamma * u * u / 2.0)
        if 0.0 < u < math.pi:
            d += self.psi / math.sqrt(math.pi - u)
        if 0.0 <= u <= math.pi and self.gamma < 1.0:
            d += self.xi
        return rho * d

    def _angle(self, gen):
        while True:
            u = self._outer_angle(gen)
            if not 0.0 < u < math.pi:
                continue
            zeta = math.sqrt(self._b_ratio(u))
            z = 1.0 / (1.0 - (1.0 + self.alpha * zeta / self.sqrt_gamma) ** (-1.0 / self.alpha))
            rho = self._angle_acceptance(u, zeta, z)
            w = gen.random() * rho
            if w <= 1.0:
                return u, w, z

    def draw(self, gen):
        alpha, b, lam_alpha = self.alpha, self.b, self.lam_alpha
        while True:
            u, w, z = self._angle(gen)
            a = math.exp(float(_log_sin_ratio(alpha, u, math.pi - u)))
            m = (b / a) ** alpha * lam_alpha
            delta = math.sqrt(m * alpha / a)
            a1 = delta * self.c1
            a3 = z / a
            s = a1 + delta + a3
            v = gen.random()
            normal, e1 = 0.0, 0.0
            if v < a1 / s:
                normal = gen.standard_normal()
                x = m - delta * abs(normal)
            elif v < (a1 + delta) / s:
                x = m + delta * gen.random()
            else:
                e1 = -math.log(gen.random())
                x = m + delta + e1 * a3
            if x <= 0.0:
                continue
            # lam * m^(-b) written through lam^alpha for small alpha
            c = a * (x - m) + math.exp(math.log(lam_alpha) / alpha - b * math.log(m)) * ((m / x) ** b - 1.0)
            if x < m:
                c -= normal * normal / 2.0
            elif x > m + delta:
                c -= e1
            if c <= -math.log(w):
                return x ** (-b)


def sample_exp_tilted_stable(rng, params, lam, size=None):
    """Draw T with density proportional to exp(-lam t) f_alpha(t), lam > 0."""
    lam = float(lam)
    if not lam > 0 or not math.isfinite(lam):
        raise DomainError(f"lam must be a positive finite real, got {lam!r}")
    n = _count(size)
    gen = rng.generator
    if lam ** params.alpha <= EXP_TILT_REJECTION_MAX:
        out = np.empty(n)
        filled = 0
        rate = math.exp(-lam ** params.alpha)
        while filled < n:
            batch = max(64, int(1.2 * (n - filled) / rate))
            t = sample_positive_stable(rng, params, batch)
            keep = t[gen.random(batch) < np.exp(-lam * t)]
            take = min(keep.size, n - filled)
            out[filled:filled + take] = keep[:take]
            filled += take
        return _as_output(out, size)
    sampler = _DoubleRejection(params.alpha, lam)
    return _as_output(np.array([sampler.draw(gen) for _ in range(n)]), size)
