import numpy as np
from django.test import SimpleTestCase

from game import measures
from game.exceptions import InvalidArgument
from game.space import build_torus


class MeasureGeneratorTests(SimpleTestCase):
    def test_halves(self):
        space = build_torus(10)
        mu1, mum1 = measures.halves(space)
        np.testing.assert_allclose(mu1, [0] * 5 + [0.2] * 5)
        np.testing.assert_allclose(mum1, [0.2] * 5 + [0] * 5)

    def test_interleaved_bands(self):
        space = build_torus(20)
        mu1, mum1 = measures.interleaved(space, 4)
        expected_mu1 = np.array([0] * 5 + [1] * 5 + [0] * 5 + [1] * 5) / 10
        np.testing.assert_allclose(mu1, expected_mu1)
        np.testing.assert_allclose(mum1, 0.1 - expected_mu1)

    def test_interleaved_ten_bands_on_a_thousand_points(self):
        space = build_torus(1000)
        mu1, mum1 = measures.interleaved(space, 10)
        self.assertEqual(np.count_nonzero(mu1), 500)
        self.assertEqual(np.count_nonzero(mum1), 500)
        self.assertAlmostEqual(mum1[99], 0.002)
        self.assertAlmostEqual(mu1[100], 0.002)

    def test_interleaved_needs_an_even_count(self):
        space = build_torus(20)
        for p in (3, 0, 2.5):
            with self.assertRaises(InvalidArgument):
                measures.interleaved(space, p)

    def test_empty_band_is_rejected(self):
        with self.assertRaises(InvalidArgument):
            measures.interleaved(build_torus(2), 4)

    def test_uniform(self):
        space = build_torus(7)
        mu1, mum1 = measures.uniform(space)
        np.testing.assert_array_equal(mu1, space.m)
        np.testing.assert_array_equal(mum1, space.m)

    def test_random_is_reproducible(self):
        space = build_torus(15)
        first = measures.random(space, seed=5)
        again = measures.random(space, seed=5)
        other = measures.random(space, seed=6)
        np.testing.assert_array_equal(first[0], again[0])
        self.assertFalse(np.array_equal(first[0], other[0]))
        self.assertAlmostEqual(first[1].sum(), 1.0)

    def test_custom_tables_are_normalized(self):
        space = build_torus(3)
        mu1, mum1 = measures.custom(space, [1, 1, 2], [0, 0, 5])
        np.testing.assert_allclose(mu1, [0.25, 0.25, 0.5])
        np.testing.assert_allclose(mum1, [0, 0, 1])
        with self.assertRaises(InvalidArgument):
            measures.custom(space, [1, 1], [1, 1, 1])
        with self.assertRaises(InvalidArgument):
            measures.custom(space, [0, 0, 0], [1, 1, 1])
