import textwrap
from pathlib import Path

from game import measures
from game.losses import get_loss_pair
from game.problem import Problem
from game.space import CostPair, build_torus, indicator_cost, power_cost


def make_problem(n=20, eps=0.1, kind='halves', r=1.0, losses='logistic', p=None, threshold=None, level=1.0):
    """Torus problem with power cost ``d**r`` (or an indicator cost when ``threshold`` is set)."""
    space = build_torus(n)
    if kind == 'interleaved':
        mu1, mum1 = measures.interleaved(space, p)
    else:
        mu1, mum1 = measures.GENERATORS[kind](space)
    if threshold is None:
        costs = CostPair.symmetric(power_cost(space, r))
    else:
        costs = CostPair.symmetric(indicator_cost(space, threshold, level))
    return Problem(space=space, costs=costs, losses=get_loss_pair(losses), mu1=mu1, mum1=mum1, eps=eps)


def write_config(directory, text, name='scenario.toml'):
    path = Path(directory) / name
    path.write_text(textwrap.dedent(text))
    return path
