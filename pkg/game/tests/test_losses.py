import math

import numpy as np
from django.test import SimpleTestCase

from game.exceptions import InvalidArgument, UnattainedMinimum
from game.losses import (
    HINGE, LOGISTIC, get_loss_pair, phi, pointwise_argmin, psi, user_loss_pair,
)


def logistic_as_user_pair():
    return user_loss_pair(
        l1=lambda t: np.logaddexp(0.0, -np.asarray(t, dtype=float)),
        lm1=lambda t: np.logaddexp(0.0, np.asarray(t, dtype=float)),
        d_l1=lambda t: -1.0 / (1.0 + np.exp(np.asarray(t, dtype=float))),
        d_lm1=lambda t: 1.0 / (1.0 + np.exp(-np.asarray(t, dtype=float))),
    )


class LossPairTests(SimpleTestCase):
    def test_logistic_values_and_slopes(self):
        self.assertAlmostEqual(float(LOGISTIC.loss(1, 0.0)), math.log(2))
        self.assertAlmostEqual(float(LOGISTIC.loss(-1, 0.0)), math.log(2))
        self.assertAlmostEqual(float(LOGISTIC.derivative(1, 0.0)), -0.5)
        self.assertAlmostEqual(float(LOGISTIC.derivative(-1, 0.0)), 0.5)
        # No overflow far in the tails.
        self.assertAlmostEqual(float(LOGISTIC.loss(1, -800.0)), 800.0)
        self.assertTrue(LOGISTIC.smooth)

    def test_hinge_kinks(self):
        t = np.array([0.0, 1.0, 2.0])
        np.testing.assert_array_equal(HINGE.loss(1, t), [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(HINGE.derivative(1, t), [-1.0, -0.5, 0.0])
        np.testing.assert_array_equal(HINGE.derivative(-1, np.array([-2.0, -1.0, 0.0])), [0.0, 0.5, 1.0])
        self.assertTrue(HINGE.at_kink(np.array([0.3, -1.0])))
        self.assertFalse(HINGE.at_kink(np.array([0.3, 0.9])))
        self.assertFalse(HINGE.smooth)

    def test_unknown_kind(self):
        self.assertIs(get_loss_pair('hinge'), HINGE)
        with self.assertRaises(InvalidArgument):
            get_loss_pair('squared')

    def test_user_pair_is_checked(self):
        logistic_as_user_pair()
        with self.assertRaises(InvalidArgument):
            user_loss_pair(
                l1=lambda t: np.logaddexp(0.0, np.asarray(t, dtype=float)),
                lm1=lambda t: np.logaddexp(0.0, np.asarray(t, dtype=float)),
                d_l1=lambda t: t, d_lm1=lambda t: t,
            )
        with self.assertRaises(InvalidArgument):
            # Monotone but concave.
            user_loss_pair(
                l1=lambda t: np.exp(-np.logaddexp(0.0, np.asarray(t, dtype=float))),
                lm1=lambda t: np.logaddexp(0.0, np.asarray(t, dtype=float)),
                d_l1=lambda t: t, d_lm1=lambda t: t,
            )


class ConditionalRiskTests(SimpleTestCase):
    def test_logistic_phi_is_binary_entropy(self):
        self.assertAlmostEqual(phi(0.5, LOGISTIC), math.log(2))
        self.assertEqual(phi(0.0, LOGISTIC), 0.0)
        self.assertEqual(phi(1.0, LOGISTIC), 0.0)
        alpha = np.array([0.1, 0.3])
        np.testing.assert_allclose(phi(alpha, LOGISTIC), -alpha * np.log(alpha) - (1 - alpha) * np.log(1 - alpha))

    def test_phi_domain(self):
        for alpha in (-0.1, 1.2, float('nan')):
            with self.assertRaises(InvalidArgument):
                phi(alpha, LOGISTIC)

    def test_hinge_phi(self):
        self.assertAlmostEqual(phi(0.3, HINGE), 0.6)
        self.assertAlmostEqual(phi(0.5, HINGE), 1.0)

    def test_psi_is_positively_homogeneous(self):
        for losses in (LOGISTIC, HINGE):
            self.assertAlmostEqual(psi(0.6, 0.2, losses), 2 * psi(0.3, 0.1, losses))
            self.assertEqual(psi(0.0, 0.0, losses), 0.0)

    def test_psi_extends_phi(self):
        a1, am1 = 0.25, 0.5
        total = a1 + am1
        self.assertAlmostEqual(psi(a1, am1, LOGISTIC), total * phi(a1 / total, LOGISTIC))

    def test_generic_path_matches_closed_form(self):
        user = logistic_as_user_pair()
        for a1, am1 in ((0.3, 0.7), (0.05, 0.9), (2.0, 1.0)):
            self.assertAlmostEqual(psi(a1, am1, user), psi(a1, am1, LOGISTIC), places=9)
            self.assertAlmostEqual(pointwise_argmin(a1, am1, user), pointwise_argmin(a1, am1, LOGISTIC), places=5)
        # Unattained infimum on one side: psi(a, 0) is the limit value, 0 for logistic.
        self.assertAlmostEqual(psi(1.0, 0.0, user), 0.0, places=9)

    def test_psi_rejects_negative_weights(self):
        with self.assertRaises(InvalidArgument):
            psi(-0.1, 0.5, LOGISTIC)


class PointwiseArgminTests(SimpleTestCase):
    def test_logistic_log_ratio(self):
        self.assertAlmostEqual(pointwise_argmin(0.75, 0.25, LOGISTIC), math.log(3))
        np.testing.assert_allclose(pointwise_argmin(np.array([1.0, 2.0]), np.array([1.0, 1.0]), LOGISTIC),
                                   [0.0, math.log(2)])

    def test_hinge_sign(self):
        self.assertEqual(pointwise_argmin(0.3, 0.7, HINGE), -1.0)
        self.assertEqual(pointwise_argmin(0.7, 0.3, HINGE), 1.0)
        self.assertEqual(pointwise_argmin(0.5, 0.5, HINGE), 0.0)

    def test_zero_weight_has_no_minimizer(self):
        for losses in (LOGISTIC, HINGE):
            with self.assertRaises(UnattainedMinimum):
                pointwise_argmin(0.0, 1.0, losses)
        with self.assertRaises(InvalidArgument):
            pointwise_argmin(np.array([1.0, 0.0]), np.array([1.0, 1.0]), LOGISTIC)

    def test_minimizer_attains_psi(self):
        rng = np.random.default_rng(3)
        weights = rng.uniform(0.05, 2.0, size=(20, 2))
        for losses in (LOGISTIC, HINGE, logistic_as_user_pair()):
            for a1, am1 in weights:
                t = pointwise_argmin(a1, am1, losses)
                attained = a1 * float(losses.l1(t)) + am1 * float(losses.lm1(t))
                self.assertAlmostEqual(attained, psi(a1, am1, losses), places=8)


class ConditionalRiskShapeTests(SimpleTestCase):
    def test_phi_is_concave_on_sampled_chords(self):
        rng = np.random.default_rng(11)
        alpha, beta, lam = rng.uniform(0.0, 1.0, size=(3, 200))
        for losses in (LOGISTIC, HINGE):
            chord = lam * phi(alpha, losses) + (1 - lam) * phi(beta, losses)
            middle = phi(lam * alpha + (1 - lam) * beta, losses)
            self.assertTrue(np.all(middle >= chord - 1e-9))

    def test_generic_phi_is_concave(self):
        user = logistic_as_user_pair()
        rng = np.random.default_rng(12)
        for alpha, beta, lam in rng.uniform(0.02, 0.98, size=(15, 3)):
            chord = lam * phi(alpha, user) + (1 - lam) * phi(beta, user)
            self.assertGreaterEqual(phi(lam * alpha + (1 - lam) * beta, user), chord - 1e-7)

    def test_phi_is_nonnegative(self):
        grid = np.linspace(0.0, 1.0, 101)
        for losses in (LOGISTIC, HINGE):
            self.assertTrue(np.all(phi(grid, losses) >= 0))
