"""
Entropic optimal transport against a reference measure ``m``:

    T^{eps,m}_c(mu, nu) = min_{gamma in Pi(mu, nu)} <c, gamma> + eps * KL(gamma | mu x m)

solved by log-domain Sinkhorn iterations on the potentials ``(f, g)``; the optimal
plan is ``gamma(x, z) = mu(x) m(z) exp((g(z) - c(x, z) - f(x)) / eps)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr

from .exceptions import ConvergenceFailure, InfeasibleTransport, InvalidArgument
from .losses import psi as psi_risk
from .problem import LABELS, check_probability
from .space import validate_cost
from .transform import hard_ctransform, log_kernel_sums

logger = logging.getLogger(__name__)

SINKHORN_TOL = 1e-10
SINKHORN_MAX_ITER = 100_000


@dataclass
class EotResult:
    value: float
    potential_f: np.ndarray
    potential_g: np.ndarray
    plan: np.ndarray
    iterations: int
    marginal_err: float
    dual_value: float
    transport_cost: float
    entropy: float


def transport_cost(cost, plan):
    """``<c, plan>`` with the convention ``inf * 0 = 0``; mass on an infinite entry gives ``inf``."""
    cost = np.asarray(cost, dtype=float)
    plan = np.asarray(plan, dtype=float)
    charged = plan > 0
    return float(np.sum(cost[charged] * plan[charged]))


def _plan(mu, m, cost, f, g, eps):
    with np.errstate(divide='ignore', invalid='ignore'):
        log_plan = (
            np.log(mu)[:, None] + np.log(m)[None, :]
            + (g[None, :] - cost - f[:, None]) / eps
        )
    log_plan[np.isnan(log_plan)] = -np.inf
    return np.exp(log_plan)


def sinkhorn(mu, nu, cost, eps, m, tol=SINKHORN_TOL, max_iter=SINKHORN_MAX_ITER, g0=None):
    """
    Alternate the mu-projection (``f`` = soft c-transform of ``g``) and the
    nu-projection on ``g`` until the nu-marginal is within ``tol`` in sup norm.
    """
    if not eps > 0:
        raise InvalidArgument(f'eps must be positive, got {eps!r}.')
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if np.any(m <= 0):
        raise InvalidArgument('The reference measure must have full support.')
    mu = check_probability(mu, n, 'mu')
    nu = check_probability(nu, n, 'nu')
    cost = validate_cost(cost, n=n)

    supported = nu > 0
    with np.errstate(divide='ignore'):
        log_ratio = np.log(nu) - np.log(m)
    g = np.zeros(n) if g0 is None else np.array(g0, dtype=float)
    g[~supported] = -np.inf

    marginal_err = np.inf
    for iteration in range(1, max_iter + 1):
        f = eps * log_kernel_sums(g, cost, eps, m, allow_neg_inf=True)
        stranded = (mu > 0) & np.isneginf(f)
        if np.any(stranded):
            raise InfeasibleTransport(
                f'Source point {int(np.flatnonzero(stranded)[0])} cannot reach the support of nu at finite cost.'
            )
        neg_f = np.where(mu > 0, -f, -np.inf)
        log_col = log_kernel_sums(neg_f, cost.T, eps, mu, allow_neg_inf=True)
        unreachable = supported & np.isneginf(log_col)
        if np.any(unreachable):
            raise InfeasibleTransport(
                f'Target point {int(np.flatnonzero(unreachable)[0])} cannot be reached from mu at finite cost.'
            )
        with np.errstate(invalid='ignore'):
            column = m * np.exp(g / eps + log_col)
        column[~supported] = 0.0
        marginal_err = float(np.max(np.abs(column - nu)))
        if marginal_err <= tol:
            break
        g = np.where(supported, eps * (log_ratio - log_col), -np.inf)
    else:
        raise ConvergenceFailure(
            f'Sinkhorn did not reach tol={tol:g} in {max_iter} iterations '
            f'(marginal error {marginal_err:.3e}).',
            iterate=g, iterations=max_iter, marginal_err=marginal_err,
        )

    f = np.where(mu > 0, f, 0.0)
    plan = _plan(mu, m, cost, f, g, eps)
    cost_term = transport_cost(cost, plan)
    entropy = float(np.sum(rel_entr(plan, mu[:, None] * m[None, :])))
    dual = float(np.dot(g[supported], nu[supported]) - np.dot(f, mu))
    logger.debug('Sinkhorn converged in %d iterations (eps=%g, marginal error %.3e).',
                 iteration, eps, marginal_err)
    return EotResult(
        value=cost_term + eps * entropy,
        potential_f=f,
        potential_g=g,
        plan=plan,
        iterations=iteration,
        marginal_err=marginal_err,
        dual_value=dual,
        transport_cost=cost_term,
        entropy=entropy,
    )


def regularized_lower_value(profile, problem, tol=SINKHORN_TOL, max_iter=SINKHORN_MAX_ITER):
    """
    Value of the adversary's regularized problem at ``profile``:
    ``-sum_i T^{eps,m}_{c_i}(mu_i, nu_i) + sum_z Psi(nu1(z), num1(z)) m(z)`` with the
    densities taken with respect to ``m``.
    """
    m = problem.space.m
    value = float(np.dot(psi_risk(profile.nu1, profile.num1, problem.losses), m))
    for label in LABELS:
        result = sinkhorn(
            problem.mu(label), profile.mass(label), problem.cost(label), problem.eps, m,
            tol=tol, max_iter=max_iter, g0=profile.potentials.get(label),
        )
        value -= result.value
    return value


def kantorovich_dual_bound(psi, mu, nu, cost):
    """
    ``sum mu * psi^c + sum nu * psi`` with ``psi^c(x) = min_z c(x, z) - psi(z)``:
    a lower bound on the unregularized transport cost for any potential ``psi``.
    """
    psi = np.asarray(psi, dtype=float)
    psi_c = -hard_ctransform(psi, cost)
    return float(np.dot(np.asarray(mu, dtype=float), psi_c) + np.dot(np.asarray(nu, dtype=float), psi))
