"""
Loss pairs and the conditional risk functions built on them.

``phi(alpha)`` is the smallest expected loss when a fraction ``alpha`` of the local
mass carries label +1; ``psi(a1, am1)`` is its positively homogeneous extension and
``pointwise_argmin`` returns the value of the classifier achieving it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import entr, expit, xlogy

from .exceptions import InvalidArgument, UnattainedMinimum

ARGMIN_XTOL = 1e-12


@dataclass(frozen=True)
class LossPair:
    """
    ``l1`` is the loss paid on label +1 (convex, nonincreasing) and ``lm1`` the loss
    paid on label -1 (convex, nondecreasing). Derivatives are one-sided at kinks.
    """
    kind: str
    l1: Callable
    lm1: Callable
    d_l1: Callable
    d_lm1: Callable
    kinks: tuple = ()

    def loss(self, label, t):
        return self.l1(t) if label == 1 else self.lm1(t)

    def derivative(self, label, t):
        return self.d_l1(t) if label == 1 else self.d_lm1(t)

    @property
    def smooth(self):
        return not self.kinks

    def at_kink(self, t):
        t = np.asarray(t, dtype=float)
        return bool(any(np.any(t == k) for k in self.kinks))


def _logistic_pair():
    return LossPair(
        kind='logistic',
        l1=lambda t: np.logaddexp(0.0, -np.asarray(t, dtype=float)),
        lm1=lambda t: np.logaddexp(0.0, np.asarray(t, dtype=float)),
        d_l1=lambda t: -expit(-np.asarray(t, dtype=float)),
        d_lm1=lambda t: expit(np.asarray(t, dtype=float)),
    )


def _d_hinge_l1(t):
    t = np.asarray(t, dtype=float)
    # Midpoint of the one-sided derivatives exactly at the kink.
    return np.where(t < 1.0, -1.0, np.where(t > 1.0, 0.0, -0.5))


def _d_hinge_lm1(t):
    t = np.asarray(t, dtype=float)
    return np.where(t > -1.0, 1.0, np.where(t < -1.0, 0.0, 0.5))


def _hinge_pair():
    return LossPair(
        kind='hinge',
        l1=lambda t: np.maximum(1.0 - np.asarray(t, dtype=float), 0.0),
        lm1=lambda t: np.maximum(1.0 + np.asarray(t, dtype=float), 0.0),
        d_l1=_d_hinge_l1,
        d_lm1=_d_hinge_lm1,
        kinks=(1.0, -1.0),
    )


LOGISTIC = _logistic_pair()
HINGE = _hinge_pair()

LOSS_KINDS = {
    'logistic': LOGISTIC,
    'hinge': HINGE,
}


def get_loss_pair(kind):
    try:
        return LOSS_KINDS[kind]
    except KeyError:
        raise InvalidArgument(
            f"Unknown loss kind {kind!r}; expected one of {sorted(LOSS_KINDS)}."
        ) from None


def user_loss_pair(l1, lm1, d_l1, d_lm1, check=True):
    losses = LossPair(kind='user', l1=l1, lm1=lm1, d_l1=d_l1, d_lm1=d_lm1)
    if check:
        check_loss_pair(losses)
    return losses


def check_loss_pair(losses, lo=-20.0, hi=20.0, samples=401, atol=1e-9):
    """
    Sampled checks: nonnegativity, monotonicity (l1 nonincreasing, lm1 nondecreasing)
    and convexity through second finite differences.
    """
    t = np.linspace(lo, hi, samples)
    for name, values, sign in (('l1', losses.l1(t), -1.0), ('lm1', losses.lm1(t), 1.0)):
        values = np.asarray(values, dtype=float)
        if np.any(values < -atol):
            raise InvalidArgument(f'{name} takes negative values.')
        if np.any(sign * np.diff(values) < -atol):
            direction = 'nonincreasing' if sign < 0 else 'nondecreasing'
            raise InvalidArgument(f'{name} must be {direction}.')
        if np.any(values[:-2] - 2 * values[1:-1] + values[2:] < -atol):
            raise InvalidArgument(f'{name} must be convex.')
    return losses


def _scalar_or_array(value):
    value = np.asarray(value, dtype=float)
    return value if value.ndim else float(value)


def _check_weights(*weights):
    arrays = [np.asarray(w, dtype=float) for w in weights]
    for w in arrays:
        if np.any(np.isnan(w)) or np.any(w < 0):
            raise InvalidArgument('Class weights must be nonnegative.')
    return arrays


def _golden_argmin(fun):
    """
    Golden-section search for a convex scalar function; scipy expands the starting
    bracket downhill until it encloses the minimum.
    """
    result = minimize_scalar(fun, bracket=(-1.0, 1.0), method='golden',
                             options={'xtol': ARGMIN_XTOL, 'maxiter': 10_000})
    return float(result.x)


def _limit_infimum(fun, direction):
    """inf of a monotone convex function, reached as t -> direction * infinity."""
    previous = float(fun(0.0))
    for k in range(1, 64):
        current = float(fun(direction * 2.0 ** k))
        if abs(previous - current) <= ARGMIN_XTOL:
            return current
        previous = current
    return previous


def _generic_argmin(a1, am1, losses):
    return _golden_argmin(lambda t: a1 * float(losses.l1(t)) + am1 * float(losses.lm1(t)))


def _generic_psi(a1, am1, losses):
    if a1 == 0 and am1 == 0:
        return 0.0
    if am1 == 0:
        return a1 * _limit_infimum(losses.l1, 1.0)
    if a1 == 0:
        return am1 * _limit_infimum(losses.lm1, -1.0)
    t = _generic_argmin(a1, am1, losses)
    return a1 * float(losses.l1(t)) + am1 * float(losses.lm1(t))


def psi(a1, am1, losses):
    """
    ``min_t a1 * l1(t) + am1 * lm1(t)``; positively homogeneous, ``psi(0, 0) = 0``.
    Works elementwise on arrays.
    """
    a1, am1 = _check_weights(a1, am1)
    if losses.kind == 'logistic':
        total = a1 + am1
        # a1 log((a1+am1)/a1) + am1 log((a1+am1)/am1)
        value = xlogy(total, total) - xlogy(a1, a1) - xlogy(am1, am1)
        return _scalar_or_array(np.maximum(value, 0.0))
    if losses.kind == 'hinge':
        return _scalar_or_array(2.0 * np.minimum(a1, am1))
    value = np.vectorize(lambda a, b: _generic_psi(a, b, losses), otypes=[float])(a1, am1)
    return _scalar_or_array(value)


def phi(alpha, losses):
    """Conditional risk ``inf_t alpha * l1(t) + (1 - alpha) * lm1(t)``."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(np.isnan(alpha)) or np.any(alpha < 0) or np.any(alpha > 1):
        raise InvalidArgument('phi is only defined for alpha in [0, 1].')
    if losses.kind == 'logistic':
        # Binary entropy.
        return _scalar_or_array(entr(alpha) + entr(1.0 - alpha))
    return psi(alpha, 1.0 - alpha, losses)


def pointwise_argmin(a1, am1, losses):
    """
    The minimizing ``t`` of ``a1 * l1(t) + am1 * lm1(t)``. Both weights must be
    positive, otherwise the infimum is not attained. For hinge losses the flat face
    is resolved to the minimizer of smallest absolute value.
    """
    a1, am1 = _check_weights(a1, am1)
    if np.any(a1 == 0) or np.any(am1 == 0):
        raise UnattainedMinimum('Both class weights must be positive for a finite minimizer.')
    if losses.kind == 'logistic':
        value = np.log(a1) - np.log(am1)
    elif losses.kind == 'hinge':
        value = np.sign(a1 - am1).astype(float)
    else:
        value = np.vectorize(lambda a, b: _generic_argmin(a, b, losses), otypes=[float])(a1, am1)
    return _scalar_or_array(value)
