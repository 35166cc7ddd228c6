"""
Generators for the clean class distributions ``(mu1, mum1)`` on a grid space.

"Uniform with respect to m on a set" means equal weights on the grid points of the
set and zero elsewhere; only ``m`` itself needs full support.
"""
import numpy as np

from .exceptions import InvalidArgument
from .problem import check_probability


def _normalized(indicator, space):
    weights = np.where(indicator, space.m, 0.0)
    total = weights.sum()
    if total <= 0:
        raise InvalidArgument('A class measure has empty support on this grid.')
    return weights / total


def interleaved(space, p):
    """
    ``mum1`` uniform on the bands ``[2k/p, (2k+1)/p)`` and ``mu1`` uniform on the
    complementary bands ``[(2k+1)/p, (2k+2)/p)``.
    """
    if isinstance(p, bool) or int(p) != p or p < 2 or p % 2:
        raise InvalidArgument(f'The number of intervals must be an even integer >= 2, got {p!r}.')
    n = space.n
    # Band of grid point k/n is floor(k * p / n), computed on integers.
    band = (np.arange(n) * int(p)) // n
    odd = band % 2 == 1
    return _normalized(odd, space), _normalized(~odd, space)


def halves(space):
    """``mu1`` uniform on ``[0.5, 1)``, ``mum1`` uniform on ``[0, 0.5)``."""
    return interleaved(space, 2)


def uniform(space):
    return space.m.copy(), space.m.copy()


def custom(space, mu1, mum1):
    mu1 = np.asarray(mu1, dtype=float)
    mum1 = np.asarray(mum1, dtype=float)
    for name, weights in (('mu1', mu1), ('mum1', mum1)):
        if weights.shape != (space.n,):
            raise InvalidArgument(f'{name} must list {space.n} weights, got {weights.shape[0] if weights.ndim else 0}.')
        if np.any(weights < 0) or weights.sum() <= 0:
            raise InvalidArgument(f'{name} weights must be nonnegative with a positive total.')
    return (check_probability(mu1 / mu1.sum(), space.n, 'mu1'),
            check_probability(mum1 / mum1.sum(), space.n, 'mum1'))


def random(space, seed=0):
    """Dirichlet(1, ..., 1) weights for each class, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    return rng.dirichlet(np.ones(space.n)), rng.dirichlet(np.ones(space.n))


GENERATORS = {
    'halves': halves,
    'interleaved': interleaved,
    'uniform': uniform,
    'custom': custom,
    'random': random,
}
