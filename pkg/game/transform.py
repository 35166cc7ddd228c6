"""
Hard and soft c-transforms on a finite space.

    hard:  psi^c(x)     = max_z  psi(z) - c(x, z)
    soft:  psi^{eps}(x) = eps * log sum_z m(z) exp((psi(z) - c(x, z)) / eps)

The soft transform is evaluated in the log domain (scipy's ``logsumexp`` shifts every
row by its maximum), so ``+inf`` costs become exact zeros of the kernel.
"""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .exceptions import DegenerateKernel, InvalidArgument


def _check_inputs(psi, cost, space=None, allow_neg_inf=False):
    psi = np.asarray(psi, dtype=float)
    cost = np.asarray(cost, dtype=float)
    if psi.ndim != 1:
        raise InvalidArgument('Potentials must be 1-D grid functions.')
    if cost.ndim != 2 or cost.shape[1] != psi.shape[0]:
        raise InvalidArgument(f'Cost shape {cost.shape} does not match a grid of {psi.shape[0]} points.')
    if space is not None and psi.shape[0] != space.n:
        raise InvalidArgument(f'Grid function has {psi.shape[0]} values, space has {space.n} points.')
    bad = np.isnan(psi) | (psi == np.inf)
    if not allow_neg_inf:
        bad |= np.isneginf(psi)
    if np.any(bad):
        raise InvalidArgument('Potentials must be finite.')
    return psi, cost


def _exponents(psi, cost, eps):
    # -inf wherever the cost is +inf (or psi is -inf); never NaN.
    with np.errstate(invalid='ignore'):
        arg = psi[None, :] - cost
    arg[np.isnan(arg)] = -np.inf
    return arg / eps


def log_kernel_sums(psi, cost, eps, weights, allow_neg_inf=False):
    """
    Row-wise ``log sum_z weights(z) exp((psi(z) - c(x, z)) / eps)``. Rows without a
    single finite term come back as ``-inf``.
    """
    if not eps > 0:
        raise InvalidArgument(f'eps must be positive, got {eps!r}.')
    psi, cost = _check_inputs(psi, cost, allow_neg_inf=allow_neg_inf)
    arg = _exponents(psi, cost, eps)
    with np.errstate(divide='ignore'):
        return logsumexp(arg, axis=1, b=np.broadcast_to(weights, arg.shape))


def soft_ctransform(psi, cost, eps, space):
    """``eps``-softmax c-transform of ``psi`` against the reference measure of ``space``."""
    if not eps > 0:
        raise InvalidArgument(f'eps must be positive, got {eps!r}.')
    psi, cost = _check_inputs(psi, cost, space)
    lse = log_kernel_sums(psi, cost, eps, space.m)
    if np.any(np.isneginf(lse)):
        row = int(np.flatnonzero(np.isneginf(lse))[0])
        raise DegenerateKernel(f'Every kernel term of row {row} vanishes.')
    return eps * lse


def hard_ctransform(psi, cost, space=None):
    """Exact ``max_z psi(z) - c(x, z)``."""
    psi, cost = _check_inputs(psi, cost, space)
    return np.max(psi[None, :] - cost, axis=1)


def hard_argmax(psi, cost, space=None):
    """First maximizing column of every row of ``psi(z) - c(x, z)``."""
    psi, cost = _check_inputs(psi, cost, space)
    return np.argmax(psi[None, :] - cost, axis=1)


def soft_ctransform_and_weights(psi, cost, eps, space):
    """
    The soft c-transform together with the row-stochastic matrix
    ``P(x, z) = m(z) exp((psi(z) - c(x, z)) / eps) / Z(x)``, the conditional law of the
    adversary's destination ``z`` given the source ``x``. One pass over the kernel.
    """
    if not eps > 0:
        raise InvalidArgument(f'eps must be positive, got {eps!r}.')
    psi, cost = _check_inputs(psi, cost, space)
    arg = _exponents(psi, cost, eps) + np.log(space.m)[None, :]
    lse = logsumexp(arg, axis=1, keepdims=True)
    if np.any(np.isneginf(lse)):
        row = int(np.flatnonzero(np.isneginf(lse[:, 0]))[0])
        raise DegenerateKernel(f'Every kernel term of row {row} vanishes.')
    return eps * lse[:, 0], np.exp(arg - lse)


def softmax_weights(psi, cost, eps, space):
    return soft_ctransform_and_weights(psi, cost, eps, space)[1]
