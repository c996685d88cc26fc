import io
import itertools
import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DimensionMismatchError, InvalidMetricError
from core.services import PENALTY_VALUE

from .services import (
    PPParams,
    TimeSeries,
    categorical_cost,
    doubling_time_cost,
    dtw_distance,
    integrate_predator_prey,
    make_period_tuning_objective,
    naiveperiod,
    nrmsd,
    period_tuning_cost,
    predator_prey_period,
    rmsd,
    scalarize_criteria,
)


def warping_paths(r, c):
    """Tous les chemins monotones de (0, 0) à (r-1, c-1)"""

    def extend(path):
        i, j = path[-1]
        if (i, j) == (r - 1, c - 1):
            yield path
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            if i + di < r and j + dj < c:
                yield from extend(path + [(i + di, j + dj)])

    return extend([(0, 0)])


def brute_force_dtw(a, b):
    return min(
        sum(abs(a[i] - b[j]) for i, j in path)
        for path in warping_paths(len(a), len(b))
    )


class TimeSeriesTests(SimpleTestCase):
    def test_csv_contract(self):
        series = TimeSeries.read_csv(io.StringIO("t,y\n0,1\n1,2\n"))
        self.assertEqual(len(series), 2)
        self.assertEqual(series.names, ["y"])
        np.testing.assert_array_equal(series["y"], [1, 2])

    def test_row_index_when_no_time_column(self):
        series = TimeSeries.read_csv(io.StringIO("value\n0.5\n"))
        np.testing.assert_array_equal(series.t, [0.0])
        self.assertEqual(series["value"][0], 0.5)

    def test_invalid_series(self):
        with self.assertRaises(ValueError):
            TimeSeries([0, 0], {"y": [1, 2]})
        with self.assertRaises(DimensionMismatchError):
            TimeSeries([0, 1], {"y": [1]})

    def test_frame_round_trip(self):
        series = TimeSeries([0.0, 0.5], {"x": [1.0, 2.0], "y": [3.0, 4.0]})
        again = TimeSeries.from_frame(series.to_frame())
        np.testing.assert_array_equal(again.t, series.t)
        np.testing.assert_array_equal(again["y"], series["y"])


class IntegratorTests(SimpleTestCase):
    def test_equilibrium(self):
        series = integrate_predator_prey(PPParams(1, 1, 1, 1), 1, 1, 50, 0.1)
        np.testing.assert_array_equal(series["x"], 1.0)
        np.testing.assert_array_equal(series["y"], 1.0)
        self.assertFalse(series.truncated)
        self.assertAlmostEqual(series.t[-1], 50.0)

    def test_prey_alone_grows_exponentially(self):
        series = integrate_predator_prey(PPParams(0.5, 0.3, 1, 1), 2.0, 0.0, 3, 0.01)
        np.testing.assert_array_equal(series["y"], 0.0)
        np.testing.assert_allclose(
            series["x"], 2.0 * np.exp(0.5 * series.t), rtol=0, atol=1e-6
        )

    def test_fourth_order_convergence(self):
        errors = []
        for dt in (0.1, 0.05, 0.025, 0.0125):
            series = integrate_predator_prey(PPParams(1.0, 1, 1, 1), 1.0, 0.0, 1.0, dt)
            errors.append(abs(series["x"][-1] - math.e))
        for coarse, fine in zip(errors, errors[1:]):
            self.assertAlmostEqual(coarse / fine, 16, delta=4)

    def test_blow_up_truncates(self):
        series = integrate_predator_prey(PPParams(400, 1, 0, 0), 1e300, 0.0, 10, 0.1)
        self.assertTrue(series.truncated)
        self.assertLess(len(series), 101)

    def test_invalid_step(self):
        with self.assertRaises(ValueError):
            integrate_predator_prey(PPParams(1, 1, 1, 1), 1, 1, 10, 0)


class NaivePeriodTests(SimpleTestCase):
    def test_sinusoid(self):
        t = np.arange(2401) * 0.1
        period = naiveperiod(np.sin(2 * np.pi * t / 24), t)
        self.assertAlmostEqual(period, 24, delta=0.2)

    def test_pure_sinusoids(self):
        for p in (6, 24, 100):
            dt = p / 64
            t = np.arange(640) * dt
            period = naiveperiod(np.sin(2 * np.pi * t / p), t)
            self.assertAlmostEqual(period, p, delta=0.02 * p)

    def test_no_period(self):
        t = np.arange(10.0)
        self.assertIsNone(naiveperiod(np.ones(10), t))
        self.assertIsNone(naiveperiod(t, t))
        series = integrate_predator_prey(PPParams(1, 1, 1, 1), 1, 1, 50, 0.1)
        self.assertIsNone(naiveperiod(series["y"], series.t))

    def test_too_short(self):
        with self.assertRaises(ValueError):
            naiveperiod([1, 2], [0, 1])


class MetricTests(SimpleTestCase):
    def test_rmsd(self):
        self.assertEqual(rmsd([1, 2, 3], [1, 2, 3]), 0)
        self.assertAlmostEqual(rmsd([0, 0], [3, 4]), math.sqrt(12.5))
        self.assertEqual(rmsd(60, 72), 12)
        self.assertEqual(rmsd([1, 5], [2, 3]), rmsd([2, 3], [1, 5]))

    def test_rmsd_length_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            rmsd([1, 2], [1])

    def test_nrmsd(self):
        self.assertAlmostEqual(nrmsd(73, 72), 1 / 72)
        self.assertAlmostEqual(nrmsd(23, 24), 1 / 24)
        self.assertEqual(nrmsd([1, 2, 4], [1, 2, 4]), 0)

    def test_nrmsd_scale_invariance(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=20), rng.normal(size=20)
        for c in (0.5, 3.0, 1000.0):
            self.assertAlmostEqual(nrmsd(c * a, c * b), nrmsd(a, b))

    def test_nrmsd_zero_normalizer(self):
        with self.assertRaises(InvalidMetricError):
            nrmsd([1, 2], [3, 3])
        with self.assertRaises(InvalidMetricError):
            nrmsd(1, 0)

    def test_dtw_examples(self):
        self.assertEqual(dtw_distance([1, 2, 3], [1, 2, 3]), 0)
        self.assertEqual(dtw_distance([0, 1, 2], [0, 2]), 1)
        self.assertEqual(dtw_distance([5], [7]), 2)

    def test_dtw_exhaustive_short_series(self):
        series = [
            list(values)
            for length in range(1, 4)
            for values in itertools.product((0, 1, 2), repeat=length)
        ]
        for a in series:
            for b in series:
                self.assertEqual(dtw_distance(a, b), brute_force_dtw(a, b))

    def test_dtw_random_series(self):
        rng = np.random.default_rng(6)
        for _ in range(150):
            a = list(rng.integers(0, 3, size=rng.integers(1, 7)))
            b = list(rng.integers(0, 3, size=rng.integers(1, 7)))
            self.assertEqual(dtw_distance(a, b), brute_force_dtw(a, b))
            self.assertEqual(dtw_distance(a, b), dtw_distance(b, a))

    def test_dtw_empty(self):
        with self.assertRaises(InvalidMetricError):
            dtw_distance([], [1])


class CostTests(SimpleTestCase):
    def test_period_tuning_equilibrium_is_penalized(self):
        self.assertEqual(period_tuning_cost(PPParams(1, 1, 1, 1), 24), PENALTY_VALUE)

    def test_period_tuning_oscillation(self):
        p = PPParams(0.5, 0.5, 1.0, 1.0)
        period = predator_prey_period(p, 40)
        self.assertIsNotNone(period)
        self.assertAlmostEqual(period_tuning_cost(p, period), 0.0)
        self.assertAlmostEqual(period_tuning_cost(p, 2 * period), 0.5)

    def test_period_counted_in_samples(self):
        p = PPParams(0.5, 0.5, 1.0, 1.0)
        series = integrate_predator_prey(p, 1, 1, 400, 0.1)
        in_time = naiveperiod(series["y"], series.t)
        self.assertAlmostEqual(
            predator_prey_period(p, 40), in_time / 0.3, delta=0.02 * in_time / 0.3
        )
        self.assertAlmostEqual(
            predator_prey_period(p, 40, sample_step=0.1), in_time / 0.1
        )
        with self.assertRaises(ValueError):
            predator_prey_period(p, 40, sample_step=0.05)

    def test_known_parameter_rows(self):
        rows = {
            12: PPParams(1.798102, 1.618035, 1.192361, 1.453045),
            24: PPParams(0.675586, 1.375913, 1.169076, 0.8311187),
            48: PPParams(0.4558475, 0.4602389, 1.192546, 0.5483637),
            72: PPParams(0.3297914, 0.4675479, 1.650108, 0.778639),
        }
        for target in (12, 72):
            self.assertLessEqual(period_tuning_cost(rows[target], target), 0.05)
        for target, p in rows.items():
            period = predator_prey_period(p, target)
            self.assertAlmostEqual(period, target, delta=0.07 * target)

    def test_period_tuning_objective(self):
        objective = make_period_tuning_objective(72)
        self.assertEqual(objective.get_parameter_names(), ["x1", "x2", "x3", "x4"])
        self.assertEqual(objective.get_parameter("x1").min, 0.2)
        cost = objective.evaluate([[1.0, 1.0, 1.0, 1.0]])[0]
        self.assertEqual(cost, PENALTY_VALUE)

    def test_doubling_time(self):
        self.assertEqual(doubling_time_cost(52, 42, 62, 52), 0)
        self.assertEqual(doubling_time_cost(70, 42, 62, 52), 18)
        self.assertEqual(doubling_time_cost(42, 42, 62, 52), 0)
        self.assertEqual(doubling_time_cost(30, 33, 53, 43), 13)

    def test_categorical(self):
        self.assertEqual(categorical_cost(50, 42, 62), 0)
        self.assertEqual(categorical_cost(40, 42, 62), 2)
        self.assertEqual(categorical_cost(65, 42, 62), 3)

    def test_scalarize(self):
        self.assertEqual(scalarize_criteria([0.5, 0, 18]), 18.5)
