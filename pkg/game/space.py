"""
Finite metric spaces, reference measures and attack cost matrices.

Costs are plain ``(N, N)`` float arrays; ``+inf`` entries are allowed and mean
"the adversary may not move mass from x to z".
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgument

# Number of random triples checked for the triangle inequality on user metrics.
TRIANGLE_SAMPLES = 2000
METRIC_ATOL = 1e-12


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DiscreteSpace:
    """
    A finite metric space with a full-support probability reference measure ``m``.
    """
    points: np.ndarray
    metric: np.ndarray
    m: np.ndarray
    label: str = 'custom'

    def __post_init__(self):
        points = _frozen(self.points)
        metric = _frozen(self.metric)
        m = _frozen(self.m)
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'metric', metric)
        object.__setattr__(self, 'm', m)

        n = points.shape[0]
        if points.ndim != 1 or n == 0:
            raise InvalidArgument('A space needs a non-empty 1-D array of points.')
        if metric.shape != (n, n):
            raise InvalidArgument(f'Metric must be {n}x{n}, got {metric.shape}.')
        if m.shape != (n,):
            raise InvalidArgument(f'Reference measure must have length {n}, got {m.shape}.')
        if not np.all(np.isfinite(metric)) or np.any(metric < 0):
            raise InvalidArgument('Metric entries must be finite and nonnegative.')
        if np.any(np.diag(metric) != 0):
            raise InvalidArgument('Metric must vanish on the diagonal.')
        if not np.array_equal(metric, metric.T):
            raise InvalidArgument('Metric must be symmetric.')
        if np.any(m <= 0):
            raise InvalidArgument('Reference measure must have full support (every weight > 0).')
        if abs(m.sum() - 1.0) > 1e-12:
            raise InvalidArgument(f'Reference measure must sum to 1, got {m.sum()!r}.')
        _check_triangle(metric)

    @property
    def n(self):
        return self.points.shape[0]

    def __len__(self):
        return self.n


def _check_triangle(metric, samples=TRIANGLE_SAMPLES):
    n = metric.shape[0]
    if n < 3:
        return
    # Fixed seed so validation is reproducible.
    rng = np.random.default_rng(0)
    j, k, l = rng.integers(0, n, size=(3, samples))
    excess = metric[j, l] - metric[j, k] - metric[k, l]
    if np.any(excess > METRIC_ATOL):
        worst = int(np.argmax(excess))
        raise InvalidArgument(
            f'Metric violates the triangle inequality at ({j[worst]}, {k[worst]}, {l[worst]}).'
        )


def build_torus(n):
    """
    The uniform grid ``k/n`` on the circle of circumference 1 with the arc-length metric.
    """
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InvalidArgument(f'A torus grid needs at least 2 points, got {n!r}.')
    n = int(n)
    index = np.arange(n)
    steps = np.abs(index[:, None] - index[None, :])
    # Distances in index space first, then one division: no wraparound drift.
    metric = np.minimum(steps, n - steps) / n
    return DiscreteSpace(
        points=index / n,
        metric=metric,
        m=np.full(n, 1.0 / n),
        label=f'torus(n={n})',
    )


@dataclass(frozen=True)
class CostPair:
    """Attack costs for label +1 (``c1``) and label -1 (``cm1``)."""
    c1: np.ndarray
    cm1: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c1 = _frozen(self.c1)
        cm1 = _frozen(self.cm1)
        object.__setattr__(self, 'c1', c1)
        object.__setattr__(self, 'cm1', cm1)
        for name, cost in (('c1', c1), ('cm1', cm1)):
            validate_cost(cost, name=name)
        if c1.shape != cm1.shape:
            raise InvalidArgument('c1 and cm1 must have the same shape.')

    @classmethod
    def symmetric(cls, cost, **meta):
        return cls(c1=cost, cm1=cost, meta=meta)

    def for_label(self, label):
        return self.c1 if label == 1 else self.cm1


def validate_cost(cost, name='cost', n=None):
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise InvalidArgument(f'{name} must be a square matrix, got shape {cost.shape}.')
    if n is not None and cost.shape[0] != n:
        raise InvalidArgument(f'{name} must be {n}x{n}, got {cost.shape}.')
    if np.any(np.isnan(cost)) or np.any(cost < 0):
        raise InvalidArgument(f'{name} entries must lie in [0, +inf].')
    if np.any(np.diag(cost) != 0):
        raise InvalidArgument(f'{name} must be zero on the diagonal.')
    return cost


def power_cost(space, r):
    """``c(x, z) = d(x, z) ** r``."""
    if not r > 0:
        raise InvalidArgument(f'Cost exponent must be positive, got {r!r}.')
    cost = np.power(space.metric, float(r))
    np.fill_diagonal(cost, 0.0)
    return cost


def indicator_cost(space, threshold, level=1.0):
    """
    ``0`` where ``d(x, z) <= threshold`` and ``level`` elsewhere. ``level = inf`` turns
    the cost into a hard ball constraint of radius ``threshold``.
    """
    if not threshold >= 0:
        raise InvalidArgument(f'Indicator threshold must be nonnegative, got {threshold!r}.')
    if np.isnan(level) or level < 0:
        raise InvalidArgument(f'Indicator level must lie in [0, +inf], got {level!r}.')
    cost = np.where(space.metric <= threshold, 0.0, float(level))
    np.fill_diagonal(cost, 0.0)
    return cost
