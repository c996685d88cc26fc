import math

import numpy as np
from django.test import SimpleTestCase

from .exceptions import BudgetExhausted, DimensionMismatchError, InvalidParameterError
from .models import OptimizationRun
from .parameters import ParameterDef, ParameterSpace, add_parameter, clamp
from .services import (
    PENALTY_VALUE,
    PlainFunction,
    RunTracker,
    evaluate,
    is_converged,
)


def rosenbrock2(x1, x2):
    return (1 - x1) ** 2 + 100 * (x2 - x1**2) ** 2


def make_rosenbrock2(**kwargs):
    objective = PlainFunction(rosenbrock2, keyword=True, **kwargs)
    objective.parameter("x1", -100, 100).parameter("x2", -100, 100)
    return objective


class ParameterSpaceTests(SimpleTestCase):
    def test_add_parameter_grows_space(self):
        space = add_parameter(ParameterSpace(), ParameterDef("x1", -100, 100))
        self.assertEqual(space.dimension, 1)
        space.add_parameter(ParameterDef("x2", 0, 1))
        self.assertEqual(space.names, ["x1", "x2"])

    def test_duplicate_name_rejected(self):
        space = ParameterSpace([ParameterDef("x1", -1, 1)])
        with self.assertRaises(InvalidParameterError):
            space.add_parameter(ParameterDef("x1", 0, 1))

    def test_degenerate_bounds_rejected(self):
        with self.assertRaises(InvalidParameterError):
            ParameterDef("x2", 5, 5)
        with self.assertRaises(InvalidParameterError):
            ParameterDef("x3", 1, 0)
        with self.assertRaises(InvalidParameterError):
            ParameterDef("", 0, 1)

    def test_clamp(self):
        space = ParameterSpace([ParameterDef("a", 0, 10)])
        np.testing.assert_array_equal(clamp(space, [12]), [10])
        np.testing.assert_array_equal(clamp(space, [5]), [5])

        box = ParameterSpace([ParameterDef("a", -1, 1), ParameterDef("b", 0, 2)])
        np.testing.assert_array_equal(box.clamp([-3, 1]), [-1, 1])

    def test_clamp_idempotent(self):
        box = ParameterSpace([ParameterDef("a", -1, 1), ParameterDef("b", 0, 2)])
        rng = np.random.default_rng(3)
        for _ in range(50):
            v = rng.normal(0, 5, size=2)
            np.testing.assert_array_equal(box.clamp(box.clamp(v)), box.clamp(v))

    def test_clamp_length_mismatch(self):
        space = ParameterSpace([ParameterDef("a", 0, 10)])
        with self.assertRaises(DimensionMismatchError):
            space.clamp([1, 2])


class EvaluateTests(SimpleTestCase):
    def test_rosenbrock_values(self):
        objective = make_rosenbrock2()
        costs = evaluate(objective, [[1, 1]])
        self.assertEqual(costs[0], 0.0)
        self.assertEqual(objective.total_evals, 1)
        self.assertEqual(evaluate(objective, [[0, 0]])[0], 1.0)

    def test_batch_bookkeeping(self):
        objective = make_rosenbrock2()
        evaluate(objective, [[1, 1]])
        evaluate(objective, [[0, 0], [1, 2], [2, 1]], iteration=4)
        self.assertEqual(objective.total_evals, 4)
        self.assertEqual([c.pset for c in objective.visited], [1, 2, 3, 4])
        self.assertEqual(objective.visited[-1].iteration, 4)
        self.assertEqual(objective.best.fitness, 0.0)

    def test_vector_mode(self):
        objective = PlainFunction(lambda v: float(np.sum(v**2)))
        objective.parameter("a", -1, 1).parameter("b", -1, 1)
        self.assertEqual(list(objective.evaluate([[0.5, 0.5]])), [0.5])

    def test_failure_records_penalty(self):
        def fragile(v):
            if v[0] > 0:
                raise RuntimeError("crash")
            return float("nan") if v[0] < -0.5 else 1.0

        objective = PlainFunction(fragile)
        objective.parameter("a", -1, 1)
        with self.assertLogs("core.services", level="WARNING"):
            costs = objective.evaluate([[0.5], [0.0], [-0.9]])
        self.assertEqual(list(costs), [PENALTY_VALUE, 1.0, PENALTY_VALUE])
        self.assertIn("crash", objective.visited[0].note)
        self.assertIsNone(objective.visited[1].note)
        self.assertEqual(objective.stats()["failures"], 2)
        self.assertTrue(all(math.isfinite(c) for c in costs))

    def test_parallel_batch_keeps_order(self):
        objective = make_rosenbrock2(jobs=4)
        batch = [[i / 10, 0.0] for i in range(12)]
        costs = objective.evaluate(batch)
        expected = [rosenbrock2(*row) for row in batch]
        self.assertEqual(list(costs), expected)
        self.assertEqual([c.pset for c in objective.visited], list(range(1, 13)))

    def test_budget_truncates_batch(self):
        objective = make_rosenbrock2(max_evals=3)
        objective.evaluate([[0, 0], [1, 1]])
        with self.assertRaises(BudgetExhausted):
            objective.evaluate([[2, 2], [3, 3], [4, 4]])
        self.assertEqual(objective.total_evals, 3)
        np.testing.assert_array_equal(objective.visited[-1].values, [2, 2])

    def test_dimension_mismatch(self):
        objective = make_rosenbrock2()
        with self.assertRaises(DimensionMismatchError):
            objective.evaluate([[1, 2, 3]])


class ConvergenceTests(SimpleTestCase):
    def test_is_converged(self):
        objective = make_rosenbrock2()
        self.assertTrue(is_converged(objective, 0.047))
        self.assertFalse(is_converged(objective, 0.57))
        objective.set_tolerance(0)
        self.assertTrue(is_converged(objective, 0))

    def test_negative_tolerance_rejected(self):
        with self.assertRaises(ValueError):
            make_rosenbrock2().set_tolerance(-1)
        with self.assertRaises(ValueError):
            make_rosenbrock2(tolerance=-0.5)


class RunTrackerTests(SimpleTestCase):
    def test_estimates_bookkeeping(self):
        objective = make_rosenbrock2()
        tracker = RunTracker(objective, np.random.default_rng(0), method="demo")
        tracker.evaluate([[0, 0], [3, 3]])
        tracker.end_iteration()
        tracker.evaluate([[1, 1]])
        estimates = tracker.estimates()

        self.assertEqual(estimates.stats.total_evals, 3)
        self.assertEqual(len(estimates.get_visited_space()), 3)
        self.assertEqual(len(estimates.get_iteration_best()), 2)
        self.assertEqual(estimates.get_best().fitness, 0.0)
        self.assertTrue(estimates.stats.converged)
        self.assertEqual(estimates.stats.achieved_tolerance, 0.0)
        self.assertEqual(estimates.parameter_names, ["x1", "x2"])
        self.assertEqual(estimates.visited_space[2].iteration, 1)

    def test_sorted_visited_space(self):
        objective = make_rosenbrock2()
        tracker = RunTracker(objective, np.random.default_rng(0))
        tracker.evaluate([[3, 3], [0, 0], [1, 1]])
        sorted_space = tracker.estimates().get_visited_space(sort=True)
        self.assertEqual([c.pset for c in sorted_space], [3, 2, 1])

    def test_should_stop_on_convergence(self):
        objective = make_rosenbrock2()
        tracker = RunTracker(objective, np.random.default_rng(0))
        tracker.evaluate([[0, 0]])
        self.assertFalse(tracker.should_stop())
        tracker.evaluate([[1, 1]])
        self.assertTrue(tracker.should_stop())

    def test_empty_space_rejected(self):
        with self.assertRaises(DimensionMismatchError):
            RunTracker(PlainFunction(sum), np.random.default_rng(0))


class OptimizationRunTests(SimpleTestCase):
    def test_from_estimates(self):
        objective = make_rosenbrock2()
        tracker = RunTracker(objective, np.random.default_rng(0), method="pso")
        tracker.evaluate([[0, 0], [1, 1]])
        run = OptimizationRun.from_estimates(
            tracker.estimates(), problem="demo", seed=7
        )
        self.assertEqual(run.method, "pso")
        self.assertEqual(run.total_evals, 2)
        self.assertEqual(run.best_values, [1.0, 1.0])
        self.assertEqual(len(run.visited_space), 2)
        self.assertEqual(run.visited_space[0].pset, 1)
