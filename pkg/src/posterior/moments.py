"""
Posterior means, the importance-weighting identity and marginal densities of the posterior totals
"""
import math

import numpy as np
from scipy import integrate
from scipy.special import betaln

from ..errors import DomainError
from ..gibbs.model import GibbsModel, PitmanYor
from ..gibbs.prior import predict
from ..gibbs.weights import psi_weight
from ..sampling.mixing import sample_model_sticks
from ..sampling.sticks import DEFAULT_EPS, sample_partition_from_sticks
from ..special.numbers import neg_moment_stable
from ..special.stable import stable_log_pdf_table


def posterior_mean_atom_masses(model, p):
    """E[P({X_j}) | data] and the expected fresh mass; the prediction rule read off the posterior."""
    new_mass, atom_masses = predict(model, p)
    return new_mass, atom_masses


def importance_identity_check(rng, model, n, functional, draws, eps=DEFAULT_EPS):
    """Monte Carlo sides of E[Omega(P)] = E[Omega(P_{alpha,0}) h(T_alpha)].

    functional(sticks, partition) must be bounded; partition is None when n = 0.
    Returns (lhs, rhs, se) with se the pooled standard error of lhs - rhs.
    """
    if draws < 1:
        raise DomainError(f"draws must be positive, got {draws!r}")
    canonical = GibbsModel(model.params, PitmanYor(0.0))

    def evaluate(sticks):
        partition = sample_partition_from_sticks(rng, sticks, n) if n > 0 else None
        return float(functional(sticks, partition))

    lhs = np.empty(draws)
    rhs = np.empty(draws)
    for i in range(draws):
        _, sticks = sample_model_sticks(rng, model, eps)
        lhs[i] = evaluate(sticks)
        t, sticks = sample_model_sticks(rng, canonical, eps)
        rhs[i] = evaluate(sticks) * float(model.h(t))
    se = math.sqrt((np.var(lhs) + np.var(rhs)) / draws)
    return float(np.mean(lhs)), float(np.mean(rhs)), se


def _log_tilted_stable_pdf(model, theta, t):
    table = stable_log_pdf_table(model.params)
    return table.log_pdf(np.array([t]))[0] - theta * math.log(t) \
        - neg_moment_stable(model.params, theta).log_magnitude


def _posterior_t_density(model, n, k, t, beta, tilt, b_power):
    t = float(t)
    if not t > 0:
        return 0.0
    a, c = beta
    mixing, _ = integrate.quad(lambda x: float(model.h(t / x ** b_power)), 0.0, 1.0,
                               weight='alg', wvar=(a - 1.0, c - 1.0), limit=200)
    log_density = _log_tilted_stable_pdf(model, tilt, t) - float(betaln(a, c)) \
        - psi_weight(model, n, k).log()
    return mixing * math.exp(log_density)


def posterior_t_density_t1(model, n, k, t):
    """Density of the continuous-part total T_hat_{alpha,k alpha}: f_{alpha,k alpha}(t) E[h(t / R_k)] / Psi_{n,k}."""
    alpha = model.alpha
    return _posterior_t_density(model, n, k, t, (k * alpha, n - k * alpha), k * alpha, 1.0)


def posterior_t_density_t2(model, n, k, t):
    """Density of the outer total T_hat_{alpha,n}: f_{alpha,n}(t) E[h(t / beta_k^(1/alpha))] / Psi_{n,k}."""
    alpha = model.alpha
    return _posterior_t_density(model, n, k, t, (k, n / alpha - k), float(n), 1.0 / alpha)
