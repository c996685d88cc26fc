import numpy as np
from django.test import SimpleTestCase

from core.parameters import ParameterDef, ParameterSpace

from .services import lhs, lhs_bounds, uniform_sample


def strata_census(column, lower, upper, n):
    """Indice de strate de chaque point d'une colonne"""
    index = np.floor((column - lower) / (upper - lower) * n).astype(int)
    return np.minimum(index, n - 1)


def random_space(rng, d):
    space = ParameterSpace()
    for i in range(d):
        low = rng.uniform(-1000, 1000)
        space.add_parameter(ParameterDef(f"p{i}", low, low + rng.uniform(1, 500)))
    return space


class LatinHypercubeTests(SimpleTestCase):
    def test_one_sample_per_stratum_1d(self):
        space = ParameterSpace([ParameterDef("x", 0, 10)])
        sample = lhs(space, 5, np.random.default_rng(1))
        self.assertEqual(len(sample), 5)
        strata = sorted(strata_census(sample.rows[:, 0], 0, 10, 5))
        self.assertEqual(strata, [0, 1, 2, 3, 4])

    def test_marginals_2d(self):
        space = ParameterSpace([ParameterDef("a", -1, 1), ParameterDef("b", 0, 50)])
        sample = lhs(space, 100, np.random.default_rng(2))
        for j, param in enumerate(space):
            strata = strata_census(sample.rows[:, j], param.min, param.max, 100)
            self.assertEqual(sorted(strata), list(range(100)))

    def test_stratification_property(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            d = int(rng.integers(1, 7))
            n = int(rng.integers(1, 60))
            space = random_space(rng, d)
            sample = lhs(space, n, rng)
            self.assertEqual(sample.rows.shape, (n, d))
            for j, param in enumerate(space):
                strata = strata_census(sample.rows[:, j], param.min, param.max, n)
                self.assertEqual(sorted(strata), list(range(n)))

    def test_single_point_inside_box(self):
        space = ParameterSpace([ParameterDef("a", 2, 3), ParameterDef("b", -5, -4)])
        sample = lhs(space, 1, np.random.default_rng(0))
        self.assertTrue(space.contains(sample[0]))

    def test_same_seed_same_matrix(self):
        space = random_space(np.random.default_rng(5), 3)
        first = lhs(space, 20, np.random.default_rng(9))
        second = lhs(space, 20, np.random.default_rng(9))
        np.testing.assert_array_equal(first.rows, second.rows)

    def test_degenerate_dimension(self):
        rows = lhs_bounds([0.0, 1.0], [2.0, 1.0], 4, np.random.default_rng(0))
        np.testing.assert_array_equal(rows[:, 1], [1.0] * 4)

    def test_invalid_size(self):
        space = ParameterSpace([ParameterDef("a", 0, 1)])
        with self.assertRaises(ValueError):
            lhs(space, 0, np.random.default_rng(0))


class UniformSampleTests(SimpleTestCase):
    def test_concentrated_box(self):
        space = ParameterSpace([ParameterDef("a", 0, 1e-12)])
        sample = uniform_sample(space, 10, np.random.default_rng(0))
        np.testing.assert_allclose(sample.rows, 0, atol=1e-12)

    def test_mean(self):
        space = ParameterSpace([ParameterDef("a", 0, 1)])
        sample = uniform_sample(space, 1000, np.random.default_rng(0))
        self.assertLess(abs(sample.rows.mean() - 0.5), 0.05)

    def test_inside_box(self):
        space = random_space(np.random.default_rng(7), 3)
        sample = uniform_sample(space, 200, np.random.default_rng(0))
        self.assertTrue(all(space.contains(row) for row in sample))
