"""
Scenario files, experiment runs and their CSV outputs.

A scenario file is TOML with an optional ``[defaults]`` table, deep-merged into every
``[[scenario]]`` entry, each of which is validated by ``ScenarioSerializer``.
"""
import copy
import csv
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np
from django.conf import settings
from django.db import transaction

from . import measures as measure_generators
from .exceptions import ConfigError, ConvergenceFailure, GameError
from .losses import get_loss_pair
from .models import RunRecord
from .problem import Problem
from .serializers import ScenarioSerializer
from .solver import adversary_densities, minimize
from .space import CostPair, build_torus, indicator_cost, power_cost

logger = logging.getLogger(__name__)

CLASSIFIER_HEADER = ['z', 'h', 'nu1', 'nu_m1']
SUMMARY_HEADER = ['scenario', 'eps', 'value_eps', 'dual_eps', 'gap_eps', 'upper_T0',
                  'lower_unreg', 'iters', 'grad_norm']
STUDY_HEADER = ['eps', 'value_eps', 'upper_T0', 'lower_unreg', 'bracket_width', 'ratio']
TOP_LEVEL_KEYS = {'defaults', 'scenario'}


def fmt(value):
    """Full double precision, 17 significant digits."""
    return '%.17g' % value


def _deep_merge(base, override):
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _flatten_errors(errors, prefix=''):
    """Turn DRF's nested error dicts into ``dotted.path: message`` lines."""
    if isinstance(errors, dict):
        lines = []
        for key, value in errors.items():
            path = prefix if key == 'non_field_errors' else (f'{prefix}.{key}' if prefix else str(key))
            lines.extend(_flatten_errors(value, path))
        return lines
    if isinstance(errors, list):
        if errors and all(not isinstance(item, (dict, list)) for item in errors):
            return [f'{prefix}: {item}' for item in errors]
        lines = []
        for index, item in enumerate(errors):
            lines.extend(_flatten_errors(item, f'{prefix}[{index}]'))
        return lines
    return [f'{prefix}: {errors}']


def read_config(path):
    """Parse a scenario file into raw (merged, unvalidated) scenario dicts."""
    path = Path(path)
    try:
        with path.open('rb') as handle:
            document = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f'Cannot read scenario file {path}: {exc.strerror or exc}') from exc
    except tomllib.TOMLDecodeError as exc:
        # The decoder message carries the line and column.
        raise ConfigError(f'Syntax error in {path}', [str(exc)]) from exc

    unknown = sorted(set(document) - TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f'Invalid scenario file {path}', [f'{key}: Unknown field.' for key in unknown])
    defaults = document.get('defaults', {})
    entries = document.get('scenario')
    if not isinstance(defaults, dict):
        raise ConfigError(f'Invalid scenario file {path}', ['defaults: Expected a table.'])
    if not isinstance(entries, list) or not entries or not all(isinstance(entry, dict) for entry in entries):
        raise ConfigError(f'Invalid scenario file {path}', ['scenario: Expected at least one [[scenario]] table.'])
    return [_deep_merge(defaults, entry) for entry in entries]


@dataclass
class Scenario:
    """A validated scenario; ``build_problem`` turns it into one solver instance per eps."""
    id: str
    space: dict
    measures: dict
    losses: dict
    cost: dict
    solver: dict
    output: dict

    @property
    def eps_list(self):
        return list(self.solver['eps'])

    def build_space(self):
        return build_torus(self.space['n'])

    def build_measures(self, space):
        # The serializer only lets through the options of the chosen kind.
        options = {key: value for key, value in self.measures.items() if key != 'kind'}
        return measure_generators.GENERATORS[self.measures['kind']](space, **options)

    def build_costs(self, space):
        cost = self.cost
        if cost['kind'] == 'power':
            return CostPair.symmetric(power_cost(space, cost['r']), kind='power', r=cost['r'])
        if cost['kind'] == 'indicator':
            matrix = indicator_cost(space, cost['threshold'], cost.get('level', 1.0))
            return CostPair.symmetric(matrix, kind='indicator', threshold=cost['threshold'],
                                      level=cost.get('level', 1.0))
        return CostPair(c1=np.array(cost['c1'], dtype=float), cm1=np.array(cost['cm1'], dtype=float),
                        meta={'kind': 'custom'})

    def build_problem(self, eps):
        space = self.build_space()
        mu1, mum1 = self.build_measures(space)
        return Problem(
            space=space,
            costs=self.build_costs(space),
            losses=get_loss_pair(self.losses['kind']),
            mu1=mu1,
            mum1=mum1,
            eps=float(eps),
        )

    def output_dir(self, override=None):
        return Path(override or self.output.get('dir') or settings.GAME_SOLVER['OUTPUT_DIR'])


def load_scenarios(path, eps_override=None, tol=None, max_iter=None, seed=None):
    """
    Read and validate a scenario file; command-line overrides replace the matching
    solver options of every scenario. Raises ``ConfigError`` with every diagnostic.
    """
    raw = read_config(path)
    diagnostics = []
    scenarios = []
    for index, entry in enumerate(raw):
        entry = copy.deepcopy(entry)
        solver = entry.setdefault('solver', {})
        if isinstance(solver, dict):
            if eps_override is not None:
                solver['eps'] = list(eps_override)
            if tol is not None:
                solver['tol_grad'] = tol
            if max_iter is not None:
                solver['max_iter'] = max_iter
        measures = entry.get('measures')
        if seed is not None and isinstance(measures, dict) and measures.get('kind') == 'random':
            measures['seed'] = seed

        serializer = ScenarioSerializer(data=entry)
        if not serializer.is_valid():
            diagnostics.extend(_flatten_errors(serializer.errors, f'scenario[{index}]'))
            continue
        scenarios.append((index, Scenario(**serializer.validated_data)))

    seen = set()
    for index, scenario in scenarios:
        if scenario.id in seen:
            diagnostics.append(f'scenario[{index}].id: Duplicate scenario id {scenario.id!r}.')
        seen.add(scenario.id)
    if not diagnostics:
        # Building every problem once surfaces domain errors (e.g. a bad custom cost) now.
        for _, scenario in scenarios:
            try:
                scenario.build_problem(scenario.eps_list[0])
            except GameError as exc:
                diagnostics.append(f'scenario {scenario.id}: {exc}')
    if diagnostics:
        raise ConfigError(f'Invalid scenario file {path}', diagnostics)
    return [scenario for _, scenario in scenarios]


def classifier_csv_name(scenario_id, eps, partial=False):
    """Shortest round-tripping form of eps, so distinct eps never share a file."""
    suffix = '.partial.csv' if partial else '.csv'
    return f'{scenario_id}_eps{float(eps)!r}{suffix}'


def write_classifier_csv(path, space, h, profile):
    """One row per grid point: ``z,h,nu1,nu_m1`` with densities with respect to m."""
    table = np.column_stack([space.points, h, profile.nu1, profile.num1])
    np.savetxt(path, table, fmt='%.17g', delimiter=',', header=','.join(CLASSIFIER_HEADER), comments='')
    logger.info('Wrote %s.', path)


def _finite_or_none(value):
    return float(value) if value is not None and math.isfinite(value) else None


def solve_one(scenario, eps):
    """Solve one (scenario, eps) pair; returns ``(problem, h, report)``."""
    problem = scenario.build_problem(eps)
    options = scenario.solver
    h, report = minimize(
        problem,
        tol_grad=options['tol_grad'],
        max_iter=options['max_iter'],
        method=options['method'],
        certificates=options.get('certify', True),
        sinkhorn_tol=options['sinkhorn_tol'],
        sinkhorn_max_iter=options['sinkhorn_max_iter'],
    )
    return problem, h, report


@dataclass
class RunOutcome:
    """Result of one (scenario, eps) run; ``failure`` is set when ``h`` is only the last iterate."""
    scenario: Scenario
    problem: Problem
    h: np.ndarray
    scalars: dict
    csv_path: Path
    wall_time: float
    failure: ConvergenceFailure = None

    @property
    def status(self):
        return RunRecord.STATUS_FAILED if self.failure is not None else RunRecord.STATUS_OK

    def summary_row(self):
        values = [self.scalars.get(key, math.nan)
                  for key in ('value_eps', 'dual_eps', 'gap_eps', 'upper_T0', 'lower_unreg')]
        return [self.scenario.id, fmt(self.problem.eps), *map(fmt, values),
                str(self.scalars['iterations']), fmt(self.scalars['grad_norm'])]

    def to_record(self, profile):
        get = self.scalars.get
        return RunRecord(
            scenario_id=self.scenario.id,
            eps=self.problem.eps,
            status=self.status,
            z=self.problem.space.points.tolist(),
            h=self.h.tolist(),
            nu1=profile.nu1.tolist(),
            nu_m1=profile.num1.tolist(),
            value_eps=_finite_or_none(get('value_eps')),
            dual_eps=_finite_or_none(get('dual_eps')),
            gap_eps=_finite_or_none(get('gap_eps')),
            upper_t0=_finite_or_none(get('upper_T0')),
            lower_unreg=_finite_or_none(get('lower_unreg')),
            gap_unreg=_finite_or_none(get('gap_unreg')),
            iterations=int(get('iterations', 0)),
            grad_norm=_finite_or_none(get('grad_norm')),
            max_abs_h=float(np.max(np.abs(self.h))),
            lipschitz=_finite_or_none(get('lipschitz')),
            wall_time=self.wall_time,
            classifier_csv=str(self.csv_path),
        )


def _run(scenario, eps, directory):
    logger.info('Running scenario %s at eps=%g.', scenario.id, eps)
    started = time.perf_counter()
    failure = None
    try:
        problem, h, report = solve_one(scenario, eps)
        scalars = report.as_dict()
    except ConvergenceFailure as exc:
        logger.error('Scenario %s at eps=%g did not converge: %s', scenario.id, eps, exc)
        failure = exc
        problem = scenario.build_problem(eps)
        h = np.asarray(exc.iterate, dtype=float)
        if exc.report is not None:
            scalars = exc.report.as_dict()
        else:
            scalars = {'iterations': exc.iterations,
                       'grad_norm': exc.grad_norm if exc.grad_norm is not None else math.nan}
    wall_time = time.perf_counter() - started

    profile = adversary_densities(h, problem)
    csv_path = directory / classifier_csv_name(scenario.id, eps, partial=failure is not None)
    write_classifier_csv(csv_path, problem.space, h, profile)
    outcome = RunOutcome(scenario, problem, h, scalars, csv_path, wall_time, failure)
    return outcome, outcome.to_record(profile)


def run_scenario(path, out_dir=None, eps_override=None, tol=None, max_iter=None, seed=None,
                 archive=True, scenarios=None):
    """
    Solve every (scenario, eps) pair of a scenario file. Writes one classifier CSV per
    pair and one ``summary.csv`` per output directory, then archives the runs as
    ``RunRecord`` rows in one transaction.

    A run that does not converge still gets its outputs, written from the last iterate
    to ``<id>_eps<eps>.partial.csv``; the remaining runs go on. Returns
    ``(records, failures)``.
    """
    if scenarios is None:
        scenarios = load_scenarios(path, eps_override, tol, max_iter, seed)
    records = []
    failures = []
    summaries = {}

    for scenario in scenarios:
        directory = scenario.output_dir(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        rows = summaries.setdefault(directory, [])
        for eps in scenario.eps_list:
            outcome, record = _run(scenario, eps, directory)
            rows.append(outcome.summary_row())
            records.append(record)
            if outcome.failure is not None:
                failures.append(outcome.failure)

    for directory, rows in summaries.items():
        summary_path = directory / 'summary.csv'
        with summary_path.open('w', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(SUMMARY_HEADER)
            writer.writerows(rows)
        logger.info('Wrote %s.', summary_path)

    if archive:
        with transaction.atomic():
            RunRecord.objects.bulk_create(records)
    return records, failures


def check_study_eps(scenario, eps_list=None):
    """A study needs a strictly decreasing eps list below 1 (``log(1/eps)`` > 0)."""
    eps_list = list(eps_list if eps_list is not None else scenario.eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError(f'Scenario {scenario.id}', ['solver.eps: A convergence study needs a strictly decreasing eps list.'])
    if any(eps >= 1 for eps in eps_list):
        raise ConfigError(f'Scenario {scenario.id}', ['solver.eps: A convergence study needs every eps < 1.'])
    return eps_list


def convergence_study(scenario, eps_list=None):
    """
    Solve ``scenario`` along a decreasing eps list and tabulate the softmax-to-max gap
    against ``eps * log(1/eps)``. Returns the rows as dicts keyed by ``STUDY_HEADER``.
    """
    eps_list = check_study_eps(scenario, eps_list)
    study_scenario = copy.copy(scenario)
    study_scenario.solver = {**scenario.solver, 'certify': True}

    rows = []
    for eps in eps_list:
        _, _, report = solve_one(study_scenario, eps)
        rows.append({
            'eps': eps,
            'value_eps': report.value_eps,
            'upper_T0': report.upper_T0,
            'lower_unreg': report.lower_unreg,
            'bracket_width': report.upper_T0 - report.lower_unreg,
            'ratio': (report.upper_T0 - report.value_eps) / (eps * math.log(1.0 / eps)),
        })
        logger.info('Study %s eps=%g: value=%.12g bracket=%.3e.', scenario.id, eps,
                    report.value_eps, rows[-1]['bracket_width'])
    return rows


def write_study_csv(path, rows):
    with Path(path).open('w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(STUDY_HEADER)
        for row in rows:
            writer.writerow([fmt(row[key]) for key in STUDY_HEADER])
    logger.info('Wrote %s.', path)
