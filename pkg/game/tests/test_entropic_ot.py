import math

import numpy as np
from django.test import SimpleTestCase
from scipy.special import rel_entr

from game.entropic_ot import kantorovich_dual_bound, regularized_lower_value, sinkhorn, transport_cost
from game.exceptions import ConvergenceFailure, InfeasibleTransport, InvalidArgument
from game.problem import AttackProfile
from game.solver import adversary_densities, minimize
from game.space import build_torus, power_cost

from .utils import make_problem


class SinkhornTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)
        self.space = build_torus(30)
        self.cost = power_cost(self.space, 1.0)

    def test_zero_cost_gives_relative_entropy(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            m = rng.dirichlet(np.ones(50))
            mu = rng.dirichlet(np.ones(50))
            nu = rng.dirichlet(np.ones(50))
            eps = 0.1
            result = sinkhorn(mu, nu, np.zeros((50, 50)), eps, m)
            expected = eps * np.sum(rel_entr(nu, m))
            self.assertLessEqual(abs(result.value - expected), 1e-8 * abs(expected))

    def test_plan_marginals(self):
        mu = self.rng.dirichlet(np.ones(30))
        nu = self.rng.dirichlet(np.ones(30))
        result = sinkhorn(mu, nu, self.cost, 0.05, self.space.m, tol=1e-11)
        np.testing.assert_allclose(result.plan.sum(axis=1), mu, atol=1e-12)
        np.testing.assert_allclose(result.plan.sum(axis=0), nu, atol=1e-10)
        self.assertLessEqual(result.marginal_err, 1e-11)

    def test_primal_and_dual_values_agree(self):
        mu = self.rng.dirichlet(np.ones(30))
        nu = self.rng.dirichlet(np.ones(30))
        result = sinkhorn(mu, nu, self.cost, 0.02, self.space.m)
        self.assertAlmostEqual(result.value, result.dual_value, places=7)
        self.assertAlmostEqual(result.value, result.transport_cost + 0.02 * result.entropy, places=12)

    def test_warm_start_reaches_the_same_value(self):
        mu = self.rng.dirichlet(np.ones(30))
        nu = self.rng.dirichlet(np.ones(30))
        cold = sinkhorn(mu, nu, self.cost, 0.05, self.space.m)
        warm = sinkhorn(mu, nu, self.cost, 0.05, self.space.m, g0=cold.potential_g)
        self.assertAlmostEqual(cold.value, warm.value, places=9)
        self.assertLessEqual(warm.iterations, 2)

    def test_relative_entropy_of_the_plan_is_nonnegative(self):
        for eps in (1.0, 0.1, 0.02):
            mu = self.rng.dirichlet(np.ones(30))
            nu = self.rng.dirichlet(np.ones(30))
            result = sinkhorn(mu, nu, self.cost, eps, self.space.m)
            self.assertGreaterEqual(result.entropy, -1e-14)
            self.assertGreaterEqual(result.value, result.transport_cost - 1e-14)

    def test_value_is_nondecreasing_in_eps(self):
        # Every plan pays a nonnegative KL term, so a larger eps can only cost more.
        mu = self.rng.dirichlet(np.ones(30))
        nu = self.rng.dirichlet(np.ones(30))
        values = [sinkhorn(mu, nu, self.cost, eps, self.space.m, tol=1e-11).value
                  for eps in (0.02, 0.05, 0.1, 0.3, 1.0, 3.0)]
        for smaller, larger in zip(values, values[1:]):
            self.assertGreaterEqual(larger, smaller - 1e-9)

    def test_partial_support_of_nu(self):
        nu = np.zeros(30)
        nu[:10] = 0.1
        result = sinkhorn(self.space.m, nu, self.cost, 0.05, self.space.m)
        np.testing.assert_array_equal(result.plan[:, 10:], 0.0)
        self.assertTrue(np.isfinite(result.value))

    def test_unreachable_target(self):
        cost = np.full((3, 3), np.inf)
        np.fill_diagonal(cost, 0.0)
        with self.assertRaises(InfeasibleTransport):
            sinkhorn(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), cost, 0.1, np.full(3, 1 / 3))

    def test_iteration_budget(self):
        mu = self.rng.dirichlet(np.ones(30))
        nu = self.rng.dirichlet(np.ones(30))
        with self.assertRaises(ConvergenceFailure) as ctx:
            sinkhorn(mu, nu, self.cost, 0.01, self.space.m, tol=1e-14, max_iter=1)
        self.assertEqual(ctx.exception.iterations, 1)
        self.assertGreater(ctx.exception.marginal_err, 1e-14)

    def test_invalid_arguments(self):
        with self.assertRaises(InvalidArgument):
            sinkhorn(self.space.m, self.space.m, self.cost, 0.0, self.space.m)
        with self.assertRaises(InvalidArgument):
            sinkhorn(self.space.m * 2, self.space.m, self.cost, 0.1, self.space.m)


class KantorovichBoundTests(SimpleTestCase):
    def test_bound_below_any_feasible_plan(self):
        rng = np.random.default_rng(3)
        space = build_torus(25)
        cost = power_cost(space, 1.5)
        mu = rng.dirichlet(np.ones(25))
        nu = rng.dirichlet(np.ones(25))
        plan = np.outer(mu, nu)
        for _ in range(5):
            psi = rng.normal(size=25)
            self.assertLessEqual(kantorovich_dual_bound(psi, mu, nu, cost), transport_cost(cost, plan) + 1e-12)

    def test_identity_transport_is_tight(self):
        space = build_torus(10)
        cost = power_cost(space, 1.0)
        self.assertAlmostEqual(kantorovich_dual_bound(np.zeros(10), space.m, space.m, cost), 0.0)

    def test_transport_cost_conventions(self):
        cost = np.array([[0.0, np.inf], [1.0, 0.0]])
        self.assertEqual(transport_cost(cost, np.array([[0.5, 0.0], [0.25, 0.25]])), 0.25)
        self.assertEqual(transport_cost(cost, np.array([[0.25, 0.25], [0.0, 0.5]])), np.inf)


class RegularizedLowerValueTests(SimpleTestCase):
    def test_any_attack_stays_below_the_regularized_value(self):
        problem = make_problem(n=20, eps=0.1)
        _, report = minimize(problem, certificates=False)
        rng = np.random.default_rng(5)
        profiles = [adversary_densities(rng.normal(scale=2.0, size=20), problem) for _ in range(4)]
        profiles.append(AttackProfile(nu1=problem.mu1 / problem.space.m, num1=problem.mum1 / problem.space.m,
                                      m=problem.space.m))
        for profile in profiles:
            self.assertLessEqual(regularized_lower_value(profile, problem), report.value_eps + 1e-8)

    def test_unmoved_symmetric_attack(self):
        problem = make_problem(n=20, eps=0.1, kind='uniform')
        profile = AttackProfile(nu1=np.ones(20), num1=np.ones(20), m=problem.space.m)
        value = regularized_lower_value(profile, problem)
        self.assertTrue(math.isfinite(value))
        self.assertLessEqual(value, 2 * math.log(2) + 1e-12)
