import math
import tempfile

from django.conf import settings
from django.test import SimpleTestCase

from game.exceptions import ConfigError
from game.experiments import load_scenarios

from .utils import write_config

VALID = """
    [defaults]
    space = { kind = "torus", n = 12 }
    losses = { kind = "logistic" }
    solver = { eps = [0.1] }

    [[scenario]]
    id = "halves"
    measures = { kind = "halves" }
    cost = { kind = "power", r = 1.0 }

    [[scenario]]
    id = "ball"
    measures = { kind = "interleaved", p = 4 }
    cost = { kind = "indicator", threshold = 0.1, level = inf }
    solver = { eps = [0.2, 0.05], method = "gd", tol_grad = 1e-7 }
"""


class LoadScenariosTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def load(self, text, **overrides):
        return load_scenarios(write_config(self.tmp.name, text), **overrides)

    def diagnostics(self, text, **overrides):
        with self.assertRaises(ConfigError) as ctx:
            self.load(text, **overrides)
        return ctx.exception.diagnostics

    def test_defaults_are_merged(self):
        first, second = self.load(VALID)
        self.assertEqual(first.space['n'], 12)
        self.assertEqual(second.space['n'], 12)
        self.assertEqual(first.eps_list, [0.1])
        self.assertEqual(second.eps_list, [0.2, 0.05])
        self.assertEqual(second.solver['method'], 'gd')
        self.assertEqual(second.cost['level'], math.inf)

    def test_missing_solver_options_come_from_settings(self):
        first, _ = self.load(VALID)
        self.assertEqual(first.solver['tol_grad'], settings.GAME_SOLVER['TOL_GRAD'])
        self.assertEqual(first.solver['method'], settings.GAME_SOLVER['METHOD'])
        self.assertTrue(first.solver['certify'])

    def test_builds_problems(self):
        _, ball = self.load(VALID)
        problem = ball.build_problem(0.05)
        self.assertEqual(problem.n, 12)
        self.assertEqual(problem.eps, 0.05)
        self.assertEqual(problem.costs.c1[0, 6], math.inf)

    def test_command_line_overrides(self):
        first, second = self.load(VALID, eps_override=[0.3], tol=1e-6, max_iter=10)
        self.assertEqual(second.eps_list, [0.3])
        self.assertEqual(first.solver['tol_grad'], 1e-6)
        self.assertEqual(second.solver['max_iter'], 10)

    def test_seed_only_reaches_random_measures(self):
        text = VALID + """
    [[scenario]]
    id = "random"
    measures = { kind = "random", seed = 1 }
    cost = { kind = "power", r = 2.0 }
"""
        scenarios = self.load(text, seed=9)
        self.assertEqual(scenarios[2].measures['seed'], 9)
        self.assertNotIn('seed', scenarios[0].measures)

    def test_syntax_error_reports_the_line(self):
        diagnostics = self.diagnostics("[[scenario]]\nid = \n")
        self.assertIn('line', diagnostics[0])

    def test_unknown_keys_are_errors(self):
        self.assertIn('scenario[0].cost.rr: Unknown field.', self.diagnostics(VALID.replace('r = 1.0', 'rr = 1.0')))
        self.assertIn('scenarios: Unknown field.', self.diagnostics('[[scenarios]]\nid = "x"\n'))

    def test_schema_errors_name_the_field(self):
        diagnostics = self.diagnostics(VALID.replace('p = 4', 'p = 3'))
        self.assertTrue(any(line.startswith('scenario[1].measures.p:') for line in diagnostics))
        diagnostics = self.diagnostics(VALID.replace('eps = [0.1]', 'eps = [-0.1]'))
        self.assertTrue(any(line.startswith('scenario[0].solver.eps:') for line in diagnostics))
        diagnostics = self.diagnostics(VALID.replace('r = 1.0', 'r = 0.0'))
        self.assertTrue(any(line.startswith('scenario[0].cost.r:') for line in diagnostics))

    def test_options_of_another_kind_are_errors(self):
        diagnostics = self.diagnostics(VALID.replace('r = 1.0', 'r = 1.0, threshold = 0.2'))
        self.assertTrue(any(line.startswith('scenario[0].cost.threshold:') for line in diagnostics))

    def test_duplicate_ids(self):
        diagnostics = self.diagnostics(VALID.replace('id = "ball"', 'id = "halves"'))
        self.assertTrue(any('Duplicate scenario id' in line for line in diagnostics))

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_scenarios(f'{self.tmp.name}/missing.toml')

    def test_custom_tables_must_match_the_grid(self):
        text = """
            [[scenario]]
            id = "custom"
            space = { n = 3 }
            measures = { kind = "custom", mu1 = [1, 1], mum1 = [1, 1, 1] }
            losses = { kind = "hinge" }
            cost = { kind = "power", r = 1.0 }
            solver = { eps = [0.1] }
        """
        diagnostics = self.diagnostics(text)
        self.assertTrue(any(line.startswith('scenario[0].measures.mu1:') for line in diagnostics))

    def test_example_scenarios_are_valid(self):
        base = settings.BASE_DIR / 'scenarios'
        self.assertEqual(len(load_scenarios(base / 'fig1_eps.toml')[0].eps_list), 3)
        self.assertEqual([s.cost['r'] for s in load_scenarios(base / 'fig2_cost.toml')], [0.5, 1.0, 1.5, 2.0, 2.5])
        self.assertEqual([s.measures['p'] for s in load_scenarios(base / 'fig3_measures.toml')], [2, 4, 6, 8, 10])
        self.assertEqual(load_scenarios(base / 'symmetric_study.toml')[0].space['n'], 100)
