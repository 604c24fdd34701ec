"""
Positive stable density, distribution function and Mittag-Leffler densities

The density is normalized so that E[exp(-s T_alpha)] = exp(-s^alpha).
Everything is built on the Kanter (Zolotarev) function

    A(u) = [sin(alpha u)^alpha sin((1-alpha) u)^(1-alpha) / sin(u)]^(1/(1-alpha)),

which increases on (0, pi) from A0 = alpha^(alpha/(1-alpha)) (1-alpha) to infinity.
"""
import math

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import erfc, gammaln

from ..cache.manager import MemoTable
from ..errors import DomainError
from .numbers import neg_moment_stable

LOG_SQRT_PI = 0.5 * math.log(math.pi)

# Density table layout: cubic spline in log s of the log Kanter integral
TABLE_SIZE = 1024
TABLE_X_MAX = 5000.0
TAIL_SERIES_TERMS = 40
GAUSS_ORDER = 16

_density_tables = MemoTable('stable-density', capacity=64)


def _log_sin_ratio(alpha, u, delta=None):
    """log A(u); delta = pi - u may be supplied to keep sin(u) accurate near pi."""
    u = np.asarray(u, dtype=float)
    sin_u = np.sin(u) if delta is None else np.sin(delta)
    with np.errstate(divide='ignore'):
        num = alpha * np.log(alpha * np.sinc(alpha * u / np.pi)) \
            + (1.0 - alpha) * np.log((1.0 - alpha) * np.sinc((1.0 - alpha) * u / np.pi))
        den = np.where(u < 1.0, np.log(np.sinc(u / np.pi)), np.log(sin_u) - np.log(np.where(u > 0, u, 1.0)))
    return (num - den) / (1.0 - alpha)


def kanter_function(params, u):
    """A(u) on (0, pi), vectorized."""
    return np.exp(_log_sin_ratio(params.alpha, u))


def kanter_floor(params):
    """A(0+) = alpha^(alpha/(1-alpha)) (1 - alpha)."""
    alpha = params.alpha
    return alpha ** (alpha / (1.0 - alpha)) * (1.0 - alpha)


def _kanter_points(x):
    width = 1.0 / math.sqrt(1.0 + x)
    inner = [math.pi * width * m for m in (0.25, 1.0, 4.0) if math.pi * width * m < math.pi / 2]
    outer = [math.pi * (1.0 - 10.0 ** -j) for j in (2, 4, 6, 8)]
    return sorted(set(inner + [math.pi / 2] + outer))


def _kanter_integral(alpha, x, with_kanter):
    """int_0^pi A(u)^w exp(-x (A(u) - A0)) du by adaptive quadrature, w in {0, 1}."""
    log_floor = (alpha / (1.0 - alpha)) * math.log(alpha) + math.log(1.0 - alpha)
    floor = math.exp(log_floor)

    def integrand(u):
        log_a = float(_log_sin_ratio(alpha, u))
        a = math.exp(min(log_a, 700.0))
        exponent = -x * (a - floor)
        if with_kanter:
            exponent += log_a
        return math.exp(exponent) if exponent > -745.0 else 0.0

    value, _ = integrate.quad(integrand, 0.0, math.pi, points=_kanter_points(x),
                              limit=400, epsabs=0.0, epsrel=1e-11)
    return value


def _check_t(t):
    t = float(t)
    if not t > 0 or not math.isfinite(t):
        raise DomainError(f"t must be a positive finite real, got {t!r}")
    return t


def stable_log_pdf(params, t):
    """log f_alpha(t) for t > 0."""
    t = _check_t(t)
    alpha = params.alpha
    if alpha == 0.5:
        return -1.5 * math.log(t) - 0.25 / t - math.log(2.0) - LOG_SQRT_PI
    x = t ** (-params.kappa)
    integral = _kanter_integral(alpha, x, with_kanter=True)
    if integral <= 0.0:
        return -math.inf
    floor = kanter_floor(params)
    return (math.log(alpha / (1.0 - alpha)) - math.log(math.pi)
            - math.log(t) / (1.0 - alpha) - x * floor + math.log(integral))


def stable_pdf(params, t):
    """Density f_alpha(t) of the positive alpha-stable law, t > 0."""
    return math.exp(stable_log_pdf(params, t))


def stable_cdf(params, t):
    """P(T_alpha <= t) = (1/pi) int_0^pi exp(-A(u) t^(-alpha/(1-alpha))) du."""
    t = _check_t(t)
    if params.alpha == 0.5:
        return float(erfc(0.5 / math.sqrt(t)))
    x = t ** (-params.kappa)
    floor = kanter_floor(params)
    if x * floor > 745.0:
        return 0.0
    return math.exp(-x * floor) * _kanter_integral(params.alpha, x, with_kanter=False) / math.pi


def _right_tail_log_pdf(alpha, s):
    """Convergent large-s series (1/pi) sum (-1)^(k+1) Gamma(alpha k + 1)/k! sin(pi alpha k) s^(-alpha k - 1)."""
    s = np.asarray(s, dtype=float)
    ks = np.arange(1, TAIL_SERIES_TERMS + 1)
    coef = (-1.0) ** (ks + 1) * np.exp(gammaln(alpha * ks + 1.0) - gammaln(ks + 1.0)) * np.sin(np.pi * alpha * ks)
    powers = np.exp(-alpha * np.outer(np.log(s), ks - 1))
    series = powers @ coef
    return np.log(np.maximum(series, np.finfo(float).tiny) / np.pi) - (1.0 + alpha) * np.log(s)


def _composite_gauss_mesh():
    """Nodes clustered geometrically at both ends of (0, pi); near pi they are stored as pi - u."""
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_ORDER)
    lower_edges = np.concatenate([[0.0], np.pi * 2.0 ** -np.arange(40, 0, -1)])
    upper_edges = np.pi * 2.0 ** -np.arange(1, 48)
    lower_u, lower_w = [], []
    for a, b in zip(lower_edges[:-1], lower_edges[1:]):
        lower_u.append(0.5 * (b - a) * nodes + 0.5 * (b + a))
        lower_w.append(0.5 * (b - a) * weights)
    upper_d, upper_w = [], []
    edges = np.concatenate([upper_edges, [0.0]])
    for a, b in zip(edges[:-1], edges[1:]):
        upper_d.append(0.5 * (a - b) * nodes + 0.5 * (a + b))
        upper_w.append(0.5 * (a - b) * weights)
    lower_u, lower_w = np.concatenate(lower_u), np.concatenate(lower_w)
    upper_d, upper_w = np.concatenate(upper_d), np.concatenate(upper_w)
    u = np.concatenate([lower_u, np.pi - upper_d])
    delta = np.concatenate([np.pi - lower_u, upper_d])
    return u, delta, np.concatenate([lower_w, upper_w])


class StableDensityTable:
    """Vectorized log f_alpha built once per alpha.

    The smooth part log int A exp(-x (A - A0)) du is tabulated on a log-s grid
    with a fixed composite Gauss-Legendre rule and interpolated by a cubic
    spline; beyond the table the large-s series takes over and below it the
    spline is held at its edge value.
    """

    def __init__(self, params, size=TABLE_SIZE):
        self.params = params
        alpha = params.alpha
        self.closed_form = alpha == 0.5
        if self.closed_form:
            return
        kappa = params.kappa
        self.floor = kanter_floor(params)
        self.log_const = math.log(alpha / (1.0 - alpha)) - math.log(math.pi)
        s_lo = (TABLE_X_MAX / self.floor) ** (-1.0 / kappa)
        s_hi = max(1e3, 20.0 ** (1.0 / alpha))
        self.log_s = np.linspace(math.log(s_lo), math.log(s_hi), size)
        x = np.exp(-kappa * self.log_s)

        u, delta, w = _composite_gauss_mesh()
        log_a = _log_sin_ratio(alpha, u, delta)
        a = np.exp(np.minimum(log_a, 700.0))
        exponent = log_a[None, :] - x[:, None] * (a[None, :] - self.floor)
        with np.errstate(under='ignore'):
            integral = np.exp(np.maximum(exponent, -745.0)) @ w
        self.spline = CubicSpline(self.log_s, np.log(integral))

    def log_pdf(self, s):
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, -np.inf)
        positive = s > 0
        if not np.any(positive):
            return out
        sp = s[positive]
        if self.closed_form:
            out[positive] = -1.5 * np.log(sp) - 0.25 / sp - math.log(2.0) - LOG_SQRT_PI
            return out
        log_sp = np.log(sp)
        inside = log_sp <= self.log_s[-1]
        values = np.empty(sp.shape)
        if np.any(inside):
            ls = log_sp[inside]
            r = self.spline(np.maximum(ls, self.log_s[0]))
            x = np.exp(-self.params.kappa * ls)
            values[inside] = self.log_const - ls / (1.0 - self.params.alpha) - x * self.floor + r
        if np.any(~inside):
            values[~inside] = _right_tail_log_pdf(self.params.alpha, sp[~inside])
        out[positive] = values
        return out

    def pdf(self, s):
        return np.exp(self.log_pdf(s))


def stable_log_pdf_table(params):
    """Shared StableDensityTable for params.alpha."""
    return _density_tables.get_or_compute(params.alpha, lambda: StableDensityTable(params))


def ml_density(params, s, theta=0.0):
    """Mittag-Leffler density of the alpha-diversity T_{alpha,theta}^{-alpha}.

    g_alpha(s) = f_alpha(s^{-1/alpha}) s^{-1/alpha - 1} / alpha and
    g_{alpha,theta}(s) = s^{theta/alpha} g_alpha(s) / E[T_alpha^{-theta}].
    Accepts scalars or arrays; s <= 0 maps to 0.
    """
    alpha = params.alpha
    s_arr = np.asarray(s, dtype=float)
    out = np.zeros(s_arr.shape)
    positive = s_arr > 0
    if np.any(positive):
        sp = s_arr[positive]
        log_t = np.minimum(-np.log(sp) / alpha, 700.0)
        log_f = stable_log_pdf_table(params).log_pdf(np.exp(log_t))
        log_g = log_f + (-1.0 / alpha - 1.0) * np.log(sp) - math.log(alpha)
        log_g += (theta / alpha) * np.log(sp) - neg_moment_stable(params, theta).log_magnitude
        out[positive] = np.exp(log_g)
    if np.ndim(s) == 0:
        return float(out)
    return out
