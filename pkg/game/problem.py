from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import InvalidArgument
from .losses import LossPair
from .space import CostPair, DiscreteSpace

LABELS = (1, -1)
PROBABILITY_ATOL = 1e-10


def check_probability(weights, n, name='mu', atol=PROBABILITY_ATOL):
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise InvalidArgument(f'{name} must have length {n}, got shape {weights.shape}.')
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise InvalidArgument(f'{name} must have finite nonnegative weights.')
    if abs(weights.sum() - 1.0) > atol:
        raise InvalidArgument(f'{name} must sum to 1, got {weights.sum()!r}.')
    return weights


@dataclass(frozen=True)
class Problem:
    """
    One instance of the regularized classification game: a space, the attack costs,
    the loss pair, the clean class distributions ``mu1``/``mum1`` (weights on the grid)
    and the regularization ``eps``.
    """
    space: DiscreteSpace
    costs: CostPair
    losses: LossPair
    mu1: np.ndarray
    mum1: np.ndarray
    eps: float

    def __post_init__(self):
        n = self.space.n
        object.__setattr__(self, 'mu1', check_probability(self.mu1, n, 'mu1'))
        object.__setattr__(self, 'mum1', check_probability(self.mum1, n, 'mum1'))
        if self.costs.c1.shape != (n, n):
            raise InvalidArgument(f'Costs must be {n}x{n}, got {self.costs.c1.shape}.')
        if not (np.isfinite(self.eps) and self.eps > 0):
            raise InvalidArgument(f'eps must be positive, got {self.eps!r}.')

    @property
    def n(self):
        return self.space.n

    def mu(self, label):
        return self.mu1 if label == 1 else self.mum1

    def cost(self, label):
        return self.costs.for_label(label)

    def with_eps(self, eps):
        return Problem(self.space, self.costs, self.losses, self.mu1, self.mum1, eps)


@dataclass
class AttackProfile:
    """
    The adversary's strategy: densities of ``nu1``/``num1`` with respect to ``m`` and,
    optionally, the transport plans realising them (rows indexed by the clean point
    ``x``, columns by the attacked point ``z``).
    """
    nu1: np.ndarray
    num1: np.ndarray
    m: np.ndarray
    gamma1: Optional[np.ndarray] = None
    gammam1: Optional[np.ndarray] = None
    # Warm starts for Sinkhorn (l_i o h when the profile comes from a classifier).
    potentials: dict = field(default_factory=dict)

    def density(self, label):
        return self.nu1 if label == 1 else self.num1

    def mass(self, label):
        return self.density(label) * self.m

    def plan(self, label):
        return self.gamma1 if label == 1 else self.gammam1

    @property
    def nubar(self):
        return self.nu1 + self.num1

    @property
    def alphabar(self):
        """Density of nu1 with respect to nu1 + num1; NaN where both vanish."""
        total = self.nubar
        out = np.full(total.shape, np.nan)
        np.divide(self.nu1, total, out=out, where=total > 0)
        return out

    @property
    def has_plans(self):
        return self.gamma1 is not None and self.gammam1 is not None

    def check_feasible(self, problem, atol=1e-8):
        """Plans must be nonnegative with row marginals mu_i and column marginals nu_i."""
        if not self.has_plans:
            raise InvalidArgument('The attack profile carries no transport plans.')
        for label in LABELS:
            plan = np.asarray(self.plan(label), dtype=float)
            if plan.shape != (problem.n, problem.n):
                raise InvalidArgument(f'Plan for label {label} has shape {plan.shape}.')
            if np.any(plan < 0) or not np.all(np.isfinite(plan)):
                raise InvalidArgument(f'Plan for label {label} must be finite and nonnegative.')
            row_err = np.max(np.abs(plan.sum(axis=1) - problem.mu(label)))
            col_err = np.max(np.abs(plan.sum(axis=0) - self.mass(label)))
            if row_err > atol or col_err > atol:
                raise InvalidArgument(
                    f'Plan for label {label} is infeasible '
                    f'(row marginal error {row_err:.3e}, column marginal error {col_err:.3e}).'
                )
        return self

    @classmethod
    def from_plans(cls, gamma1, gammam1, m, potentials=None):
        m = np.asarray(m, dtype=float)
        return cls(
            nu1=np.asarray(gamma1).sum(axis=0) / m,
            num1=np.asarray(gammam1).sum(axis=0) / m,
            m=m,
            gamma1=gamma1,
            gammam1=gammam1,
            potentials=dict(potentials or {}),
        )
