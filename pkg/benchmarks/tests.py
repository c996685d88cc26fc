import json
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase, tag

from core.exceptions import DimensionMismatchError

from .functions import (
    BenchmarkFunction,
    eval_benchmark,
    make_benchmark_objective,
    registry,
)
from .services import DEFAULT_FUNCTIONS, REPORT_COLUMNS, compare_algorithms


class BenchmarkFunctionTests(SimpleTestCase):
    def test_optima(self):
        for name in registry:
            for dimension in (2, 4, 7):
                f = BenchmarkFunction(name, dimension)
                self.assertAlmostEqual(
                    eval_benchmark(f, f.optimum_location), f.known_optimum, delta=1e-12
                )

    def test_known_values(self):
        self.assertEqual(eval_benchmark(BenchmarkFunction("griewank", 3), [0, 0, 0]), 0)
        self.assertEqual(eval_benchmark(BenchmarkFunction("rosenbrock", 5), [1] * 5), 0)
        bohachevsky = BenchmarkFunction("bohachevsky", 2)
        self.assertAlmostEqual(eval_benchmark(bohachevsky, [1, 0]), 1.6)
        self.assertEqual(eval_benchmark(BenchmarkFunction("cigar", 2), [1, 1]), 1 + 1e6)

    def test_nonnegative_at_random_points(self):
        rng = np.random.default_rng(0)
        for name in registry:
            f = BenchmarkFunction(name, 4)
            for x in rng.uniform(-100, 100, size=(200, 4)):
                self.assertGreaterEqual(eval_benchmark(f, x), 0.0)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            eval_benchmark(BenchmarkFunction("cigar", 4), [1, 2, 3])

    def test_unknown_function(self):
        with self.assertRaises(KeyError):
            BenchmarkFunction("sphere", 2)

    def test_make_benchmark_objective(self):
        objective = make_benchmark_objective("griewank", 4, tolerance=0.1)
        self.assertEqual(objective.get_parameter_names(), ["x1", "x2", "x3", "x4"])
        self.assertEqual(objective.get_parameter("x3").min, -100)
        self.assertEqual(objective.evaluate([[0, 0, 0, 0]])[0], 0.0)


class CompareAlgorithmsTests(SimpleTestCase):
    def test_single_replicate_rates(self):
        report = compare_algorithms(["griewank"], ["ees2"], replicates=1, seed_base=4)
        self.assertEqual(len(report.rows), 1)
        self.assertIn(report.rows[0].convergence, (0.0, 1.0))
        self.assertEqual(report.seeds, [4])

    def test_grid_order_and_csv(self):
        report = compare_algorithms(
            ["cigar", "griewank"], ["ees2", "ees1"], replicates=2, seed_base=1
        )
        self.assertEqual(
            [(r.function, r.algorithm) for r in report.rows],
            [
                ("cigar", "ees2"),
                ("cigar", "ees1"),
                ("griewank", "ees2"),
                ("griewank", "ees1"),
            ],
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "report.csv"
            meta_path = report.to_csv(path)
            frame = pd.read_csv(path)
            self.assertEqual(list(frame.columns), REPORT_COLUMNS)
            self.assertEqual(len(frame), 4)
            meta = json.loads(meta_path.read_text())
            self.assertEqual(meta["replicates"], 2)
            self.assertEqual(meta["schaffer_variant"], "F7")
            self.assertEqual(meta["options"], {"ees1": {"iterations": 200}})

    def test_same_seed_same_report(self):
        first = compare_algorithms(["bohachevsky"], ["saa", "ees1"], replicates=2)
        second = compare_algorithms(["bohachevsky"], ["saa", "ees1"], replicates=2)
        self.assertEqual(first.rows, second.rows)

    def test_process_pool_matches_serial(self):
        serial = compare_algorithms(["griewank"], ["ees1", "ees2"], replicates=2)
        pooled = compare_algorithms(
            ["griewank"], ["ees1", "ees2"], replicates=2, jobs=2
        )
        self.assertEqual(serial.rows, pooled.rows)

    def test_option_overrides(self):
        report = compare_algorithms(
            ["cigar"],
            ["ees2"],
            replicates=1,
            tolerance=0,
            options={"ees2": {"iterations": 2}},
        )
        self.assertEqual(report.rows[0].mean_evals, 60)

    def test_invalid_replicates(self):
        with self.assertRaises(ValueError):
            compare_algorithms(replicates=0)

    @tag("slow")
    def test_benchmark_table_shape(self):
        report = compare_algorithms(replicates=7, tolerance=0.1, seed_base=1)
        self.assertEqual(len(report.rows), 16)
        for function in DEFAULT_FUNCTIONS:
            for method in ("saa", "acor", "ees1"):
                row = report.get_row(function, method)
                self.assertGreaterEqual(row.convergence, 6 / 7, (function, method))
        for function in ("cigar", "schaffer", "griewank"):
            ees1 = report.get_row(function, "ees1").mean_evals
            self.assertLess(ees1, report.get_row(function, "acor").mean_evals)
            self.assertLess(ees1, report.get_row(function, "pso").mean_evals)
        for row in report.rows:
            if row.convergence == 1.0:
                self.assertLessEqual(row.mean_fitness, 0.1, row)

    def test_protocol_options_can_be_overridden(self):
        report = compare_algorithms(
            ["cigar"],
            ["ees1"],
            replicates=1,
            tolerance=0,
            options={"ees1": {"iterations": 3}},
        )
        self.assertEqual(report.rows[0].mean_evals, 40)
        self.assertEqual(report.metadata()["options"], {"ees1": {"iterations": 3}})

    def test_ees1_protocol_iterations(self):
        report = compare_algorithms(["cigar"], ["ees1"], replicates=1, tolerance=0)
        self.assertEqual(report.rows[0].mean_evals, 10 + 200 * 10)
