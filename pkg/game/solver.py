"""
The regularized classifier problem and its certificates.

``T_eps(h) = sum_i sum_x mu_i(x) * (l_i o h)^{eps}(x)`` is smooth and convex in ``h``; its
minimizer is found by a deterministic first-order method, the adversary's optimal
densities are read off the softmax weights at the minimizer, and the unregularized game
value is bracketed between ``T_0(h)`` and the value of a feasible attack.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .entropic_ot import (
    SINKHORN_MAX_ITER, SINKHORN_TOL, kantorovich_dual_bound, regularized_lower_value,
    transport_cost,
)
from .exceptions import ConvergenceFailure, InvalidArgument, UnattainedMinimum
from .losses import phi, pointwise_argmin
from .problem import LABELS, AttackProfile
from .transform import (
    hard_argmax, hard_ctransform, soft_ctransform, soft_ctransform_and_weights, softmax_weights,
)

logger = logging.getLogger(__name__)

TOL_GRAD = 1e-9
MAX_ITER = 50_000
METHODS = ('lbfgs', 'gd')

ARMIJO = 1e-4
BACKTRACK = 0.5
INITIAL_STEP = 1.0
MAX_BACKTRACKS = 60
LBFGS_RESTARTS = 20


@dataclass
class SolveReport:
    value_eps: float
    upper_T0: float = float('nan')
    lower_unreg: float = float('nan')
    dual_eps: float = float('nan')
    gap_eps: float = float('nan')
    gap_unreg: float = float('nan')
    transport_gap: float = float('nan')
    iterations: int = 0
    grad_norm: float = float('nan')
    max_abs_h: float = float('nan')
    lipschitz: float = float('nan')
    kink_hit: bool = False
    method: str = 'lbfgs'
    wall_time: float = 0.0

    def as_dict(self):
        return asdict(self)


def _check_classifier(h, problem):
    h = np.asarray(h, dtype=float)
    if h.shape != (problem.n,):
        raise InvalidArgument(f'Classifier must have {problem.n} values, got shape {h.shape}.')
    if not np.all(np.isfinite(h)):
        raise InvalidArgument('Classifier values must be finite.')
    return h


def objective(h, problem):
    """Regularized classifier objective ``T_eps(h)``."""
    h = _check_classifier(h, problem)
    value = 0.0
    for label in LABELS:
        soft = soft_ctransform(problem.losses.loss(label, h), problem.cost(label), problem.eps, problem.space)
        value += float(np.dot(problem.mu(label), soft))
    return value


def _attack_masses(h, problem):
    """Per label: softmax kernel rows and the mass the attacked measure puts on each z."""
    rows = {}
    masses = {}
    for label in LABELS:
        weights = softmax_weights(problem.losses.loss(label, h), problem.cost(label), problem.eps, problem.space)
        rows[label] = weights
        masses[label] = problem.mu(label) @ weights
    return rows, masses


def gradient(h, problem, kinks=None):
    """
    ``dT_eps/dh(z) = sum_i l_i'(h(z)) * nu_i({z})`` where ``nu_i`` is the attack induced
    by ``h``. Hinge kinks use the midpoint of the one-sided derivatives; when a list is
    passed as ``kinks``, every evaluation that lands on a kink appends the number of
    grid points sitting on one.
    """
    return _value_and_gradient(h, problem, kinks)[1]


def _value_and_gradient(h, problem, kinks=None):
    h = _check_classifier(h, problem)
    if kinks is not None and problem.losses.at_kink(h):
        kinks.append(int(np.isin(h, problem.losses.kinks).sum()))
    value = 0.0
    grad = np.zeros_like(h)
    for label in LABELS:
        soft, weights = soft_ctransform_and_weights(
            problem.losses.loss(label, h), problem.cost(label), problem.eps, problem.space)
        value += float(np.dot(problem.mu(label), soft))
        grad += problem.losses.derivative(label, h) * (problem.mu(label) @ weights)
    return value, grad


def adversary_densities(h, problem):
    """
    The attack induced by ``h``: ``nu_i`` has density
    ``sum_x mu_i(x) P_i(x, z) / m(z)`` with ``P_i`` the softmax kernel of ``l_i o h``,
    and the plan ``gamma_i(x, z) = mu_i(x) P_i(x, z)``.
    """
    h = _check_classifier(h, problem)
    rows, masses = _attack_masses(h, problem)
    m = problem.space.m
    return AttackProfile(
        nu1=masses[1] / m,
        num1=masses[-1] / m,
        m=m,
        gamma1=problem.mu1[:, None] * rows[1],
        gammam1=problem.mum1[:, None] * rows[-1],
        potentials={label: problem.losses.loss(label, h) for label in LABELS},
    )


def best_response_profile(h, problem):
    """
    Hard best response to ``h``: every clean point ``x`` is sent to the first maximizer
    of ``l_i(h(z)) - c_i(x, z)``.
    """
    h = _check_classifier(h, problem)
    n = problem.n
    plans = {}
    for label in LABELS:
        targets = hard_argmax(problem.losses.loss(label, h), problem.cost(label), problem.space)
        plan = np.zeros((n, n))
        plan[np.arange(n), targets] = problem.mu(label)
        plans[label] = plan
    return AttackProfile.from_plans(plans[1], plans[-1], problem.space.m)


def primal_dual_refine(h, profile, losses):
    """
    ``h~(z) = argmin_t alpha_1(z) l_1(t) + alpha_-1(z) l_-1(t)`` with ``alpha_i`` the
    densities of the attack. At an exact minimizer of ``T_eps`` this reproduces ``h``.
    """
    h = np.asarray(h, dtype=float)
    if profile.nu1.shape != h.shape or profile.num1.shape != h.shape:
        raise InvalidArgument('Attack densities and classifier have different lengths.')
    if np.any(profile.nu1 <= 0) or np.any(profile.num1 <= 0):
        raise UnattainedMinimum('Refinement needs strictly positive attack densities.')
    return np.asarray(pointwise_argmin(profile.nu1, profile.num1, losses), dtype=float)


def upper_value_T0(h, problem):
    """``T_0(h)``: the hard-max objective, an upper bound on the game value for any ``h``."""
    h = _check_classifier(h, problem)
    value = 0.0
    for label in LABELS:
        hard = hard_ctransform(problem.losses.loss(label, h), problem.cost(label), problem.space)
        value += float(np.dot(problem.mu(label), hard))
    return value


def lower_bound_unreg(profile, problem):
    """
    ``-sum_i <c_i, gamma_i> + sum_z Phi(alpha(z)) nubar({z})`` for a feasible attack. The
    plan cost dominates the optimal transport cost, so this is a lower bound on the
    game value; mass on an infinite cost gives ``-inf``.
    """
    profile.check_feasible(problem)
    penalty = sum(transport_cost(problem.cost(label), profile.plan(label)) for label in LABELS)
    if np.isinf(penalty):
        return -np.inf
    nubar_mass = profile.mass(1) + profile.mass(-1)
    charged = nubar_mass > 0
    alpha = np.clip(profile.alphabar[charged], 0.0, 1.0)
    risk = float(np.dot(phi(alpha, problem.losses), nubar_mass[charged]))
    return risk - penalty


def payoff_J(h, profile, problem):
    """``J(h, gamma_1, gamma_-1) = sum_i sum_{x,z} gamma_i(x, z) (l_i(h(z)) - c_i(x, z))``."""
    h = _check_classifier(h, problem)
    profile.check_feasible(problem)
    value = 0.0
    for label in LABELS:
        plan = np.asarray(profile.plan(label), dtype=float)
        value += float(np.dot(plan.sum(axis=0), problem.losses.loss(label, h)))
        value -= transport_cost(problem.cost(label), plan)
    return value


def discrete_lipschitz(h, space):
    """``max_k |h(z_{k+1}) - h(z_k)| / (1/N)`` around the torus."""
    h = np.asarray(h, dtype=float)
    return float(np.max(np.abs(np.roll(h, -1) - h)) * space.n)


def certify(h, problem, report, sinkhorn_tol=SINKHORN_TOL, sinkhorn_max_iter=SINKHORN_MAX_ITER,
            profile=None):
    """Fill the certificate fields of ``report`` for the classifier ``h``."""
    profile = profile if profile is not None else adversary_densities(h, problem)
    report.upper_T0 = upper_value_T0(h, problem)
    report.lower_unreg = lower_bound_unreg(profile, problem)
    report.gap_unreg = report.upper_T0 - report.lower_unreg
    report.dual_eps = regularized_lower_value(profile, problem, tol=sinkhorn_tol, max_iter=sinkhorn_max_iter)
    report.gap_eps = report.value_eps - report.dual_eps
    report.transport_gap = sum(
        transport_cost(problem.cost(label), profile.plan(label))
        - kantorovich_dual_bound(problem.losses.loss(label, h), problem.mu(label),
                                 profile.mass(label), problem.cost(label))
        for label in LABELS
    )
    return report


def _grad_norm(grad):
    return float(np.max(np.abs(grad)))


def _gradient_descent(h, problem, tol_grad, max_iter, kinks=None):
    """
    Steepest descent in L2(m) (direction ``-grad / m``) with Armijo backtracking.
    Returns ``(h, value, grad, iterations)``.
    """
    m = problem.space.m
    value, grad = _value_and_gradient(h, problem, kinks)
    for iteration in range(max_iter):
        if _grad_norm(grad) <= tol_grad:
            return h, value, grad, iteration
        direction = -grad / m
        slope = float(np.dot(grad, direction))
        step = INITIAL_STEP
        for _ in range(MAX_BACKTRACKS):
            candidate = h + step * direction
            candidate_value, candidate_grad = _value_and_gradient(candidate, problem, kinks)
            if candidate_value <= value + ARMIJO * step * slope:
                break
            step *= BACKTRACK
        else:
            # No decrease representable in double precision any more.
            return h, value, grad, iteration
        h, value, grad = candidate, candidate_value, candidate_grad
        if iteration % 1000 == 0:
            logger.debug('gd iteration %d: T=%.16g |grad|=%.3e step=%.3g',
                         iteration, value, _grad_norm(grad), step)
    return h, value, grad, max_iter


def _lbfgs(h, problem, tol_grad, max_iter, kinks=None):
    """
    scipy's L-BFGS-B with ``gtol = tol_grad`` (the same sup-norm stopping rule),
    restarted from the last iterate while the line search stalls before the gradient
    is small enough.
    """
    used = 0
    value, grad = _value_and_gradient(h, problem, kinks)
    best_norm = _grad_norm(grad)
    for restart in range(LBFGS_RESTARTS):
        if best_norm <= tol_grad or used >= max_iter:
            break
        result = scipy_minimize(
            _value_and_gradient, h, args=(problem, kinks), jac=True, method='L-BFGS-B',
            options={'gtol': tol_grad, 'ftol': 0.0, 'maxiter': max_iter - used,
                     'maxcor': 20, 'maxls': 50},
        )
        used += int(result.nit)
        norm = _grad_norm(result.jac)
        logger.debug('L-BFGS pass %d: %d iterations, T=%.16g |grad|=%.3e (%s)',
                     restart, result.nit, result.fun, norm, result.message)
        if result.fun <= value:
            h, value, grad = np.asarray(result.x, dtype=float), float(result.fun), np.asarray(result.jac)
        if norm >= best_norm or result.nit == 0:
            break
        best_norm = norm
    return h, value, grad, used


def minimize(problem, tol_grad=TOL_GRAD, max_iter=MAX_ITER, h0=None, method='lbfgs',
             certificates=True, sinkhorn_tol=SINKHORN_TOL, sinkhorn_max_iter=SINKHORN_MAX_ITER):
    """
    Minimize ``T_eps`` from ``h0`` (default ``0``) until the sup norm of the gradient is
    at most ``tol_grad``. Returns ``(h, SolveReport)``; with ``certificates`` the report
    also carries the upper/lower bounds and duality gaps (see ``certify``).

    ``report.kink_hit`` is set when any objective evaluation along the way had a grid
    point exactly on a loss kink. If the certificate Sinkhorn runs out of iterations the
    ``ConvergenceFailure`` carries the converged ``h`` and the partly filled report.
    """
    if method not in METHODS:
        raise InvalidArgument(f'Unknown method {method!r}; expected one of {METHODS}.')
    started = time.perf_counter()
    h = np.zeros(problem.n) if h0 is None else _check_classifier(h0, problem).copy()
    logger.info('Solving eps=%g on %s (%s, tol_grad=%g).', problem.eps, problem.space.label, method, tol_grad)

    kinks = []
    if method == 'lbfgs':
        h, value, grad, iterations = _lbfgs(h, problem, tol_grad, max_iter, kinks)
        remaining = max_iter - iterations
        if _grad_norm(grad) > tol_grad and remaining > 0:
            h, value, grad, extra = _gradient_descent(h, problem, tol_grad, remaining, kinks)
            iterations += extra
    else:
        h, value, grad, iterations = _gradient_descent(h, problem, tol_grad, max_iter, kinks)
    if kinks:
        logger.warning('%d objective evaluations at eps=%g put grid points on a loss kink.',
                       len(kinks), problem.eps)

    grad_norm = _grad_norm(grad)
    if grad_norm > tol_grad:
        raise ConvergenceFailure(
            f'No convergence at eps={problem.eps:g}: |grad|={grad_norm:.3e} > {tol_grad:g} '
            f'after {iterations} iterations.',
            iterate=h, iterations=iterations, grad_norm=grad_norm,
        )

    report = SolveReport(
        value_eps=value,
        iterations=iterations,
        grad_norm=grad_norm,
        max_abs_h=float(np.max(np.abs(h))),
        lipschitz=discrete_lipschitz(h, problem.space),
        kink_hit=bool(kinks) or problem.losses.at_kink(h),
        method=method,
        wall_time=time.perf_counter() - started,
    )
    if certificates:
        try:
            certify(h, problem, report, sinkhorn_tol=sinkhorn_tol, sinkhorn_max_iter=sinkhorn_max_iter)
        except ConvergenceFailure as exc:
            report.wall_time = time.perf_counter() - started
            raise ConvergenceFailure(
                f'Certificate at eps={problem.eps:g} failed after the classifier converged: {exc}',
                iterate=h, iterations=iterations, grad_norm=grad_norm,
                marginal_err=exc.marginal_err, report=report,
            ) from exc
        report.wall_time = time.perf_counter() - started
    logger.info('Solved eps=%g: T=%.12g in %d iterations, |grad|=%.3e.',
                problem.eps, value, iterations, grad_norm)
    return h, report
