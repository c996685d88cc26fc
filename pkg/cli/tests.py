import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag
from mongoengine.connection import ConnectionFailure

from core.exceptions import ProblemFileError
from core.models import OptimizationRun
from core.parameters import ParameterDef, ParameterSpace
from core.services import Candidate, Estimates, RunStats
from dynamics.services import PPParams, predator_prey_period

from .problem import load_problem, parse_columns
from .services import archive_run, bin_surface, surface_pairs

PROBLEMS = Path(__file__).resolve().parent.parent / "fixtures" / "problems"
RUN_FILES = ("best.csv", "iteration_bests.csv", "visited_space.csv", "stats.json")

ROSENBROCK2 = """\
objective = benchmark
benchmark = rosenbrock
param = x1,-100,100
param = x2,-100,100
method = pso
seed = 4
tolerance = 0
option.iterations = 20
option.swarm_size = 8
"""


def make_estimates(points, names=("a", "b")):
    visited = [
        Candidate(np.array(values, dtype=float), fitness, pset=i + 1)
        for i, (values, fitness) in enumerate(points)
    ]
    best = min(visited, key=lambda c: c.fitness)
    return Estimates(
        best=best,
        iteration_bests=[best],
        visited_space=visited,
        stats=RunStats(len(visited), False, best.fitness, 0.1),
        parameter_names=list(names),
        method="pso",
    )


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write_problem(self, text, name="problem.txt"):
        path = self.tmp / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    def call(self, *args, **options):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO(), **options)
        return out.getvalue()


class ProblemFileTests(CommandTestCase):
    def test_key_value_and_json_agree(self):
        text_problem = load_problem(self.write_problem(ROSENBROCK2))
        json_problem = load_problem(
            self.write_problem(
                json.dumps(
                    {
                        "objective": "benchmark",
                        "benchmark": "rosenbrock",
                        "parameters": [["x1", -100, 100], ["x2", -100, 100]],
                        "method": "pso",
                        "seed": 4,
                        "options": {"iterations": 20, "swarm_size": 8},
                    }
                ),
                "problem.json",
            )
        )
        self.assertEqual(text_problem.parameters, json_problem.parameters)
        self.assertEqual(text_problem.seed, json_problem.seed)
        self.assertEqual(
            text_problem.build_options(), json_problem.build_options()
        )

    def test_benchmark_default_parameters(self):
        problem = load_problem(PROBLEMS / "rosenbrock4_explore.json")
        self.assertEqual(problem.dimension, 4)
        self.assertEqual([p.name for p in problem.parameters], ["x1", "x2", "x3", "x4"])
        objective = problem.build_objective()
        self.assertEqual(objective.evaluate([[1, 1, 1, 1]])[0], 0.0)

    def test_example_files_parse(self):
        for path in PROBLEMS.iterdir():
            problem = load_problem(path)
            self.assertGreaterEqual(problem.dimension, 1, path.name)
            problem.build_options()

    def test_period_tuning(self):
        problem = load_problem(PROBLEMS / "period72.txt")
        self.assertEqual(problem.target, 72)
        self.assertEqual(problem.parameters[0], ParameterDef("x1", 0.2, 2.0))
        self.assertEqual(problem.build_objective().max_evals, 2000)

    def test_external_paths_resolved(self):
        problem = load_problem(PROBLEMS / "mock_sine.json")
        self.assertTrue(Path(problem.external.reference).exists())
        self.assertEqual(problem.external.cost.columns, [("y", "y")])
        objective = problem.build_objective()
        self.assertAlmostEqual(objective.evaluate([[1.0]])[0], 0.0)

    def test_parse_columns(self):
        self.assertEqual(parse_columns("y:y_obs, x"), [("y", "y_obs"), ("x", "x")])

    def test_invalid_files(self):
        invalid = [
            "benchmark = rosenbrock\nmethod = newton\n",
            "benchmark = rosenbrock\ncolor = blue\n",
            "benchmark = rosenbrock\nparam = x1,0\n",
            "benchmark = rosenbrock\nseed = 1\nseed = 2\n",
            "benchmark = sphere\n",
            "benchmark = rosenbrock\ndimension = 1\n",
            "objective = simulation\n",
            "objective = period-tuning\ntarget = 72\nparam = a,0,1\n",
            "objective = period-tuning\n",
            "objective = external\nparam = a,0,1\n",
            "benchmark = rosenbrock\nparam = x1,1,1\nparam = x2,0,1\n",
            "benchmark = rosenbrock\ntolerance = -1\n",
            "just some words\n",
            "[1, 2]",
        ]
        for text in invalid:
            with self.assertRaises(ProblemFileError, msg=text):
                load_problem(self.write_problem(text))

    def test_missing_file(self):
        with self.assertRaises(ProblemFileError):
            load_problem(self.tmp / "absent.txt")


class ExtremizeCommandTests(CommandTestCase):
    def test_writes_run_files(self):
        out_dir = self.tmp / "run"
        problem = self.write_problem(ROSENBROCK2)
        output = self.call("extremize", problem, out=str(out_dir))
        self.assertIn("✓", output)
        for name in RUN_FILES:
            self.assertTrue((out_dir / name).exists(), name)

        stats = json.loads((out_dir / "stats.json").read_text())
        visited = pd.read_csv(out_dir / "visited_space.csv")
        best = pd.read_csv(out_dir / "best.csv")
        self.assertEqual(
            list(visited.columns), ["x1", "x2", "pset", "iteration", "fitness"]
        )
        self.assertEqual(list(best.columns), ["x1", "x2", "pset", "fitness"])
        self.assertEqual(len(visited), stats["total_evals"])
        self.assertEqual(stats["total_evals"], 168)
        self.assertEqual(best["fitness"][0], visited["fitness"].min())
        self.assertEqual(stats["seed"], 4)
        self.assertEqual(stats["options"]["swarm_size"], 8)
        self.assertEqual(len(pd.read_csv(out_dir / "iteration_bests.csv")), 21)

    def test_rerun_is_byte_identical(self):
        problem = self.write_problem(ROSENBROCK2)
        first, second = self.tmp / "first", self.tmp / "second"
        self.call("extremize", problem, out=str(first), seed=9, reproducible=True)
        self.call("extremize", problem, out=str(second), seed=9, reproducible=True)
        for name in RUN_FILES:
            self.assertEqual(
                (first / name).read_bytes(), (second / name).read_bytes(), name
            )

    def test_unknown_method_exits_2(self):
        text = ROSENBROCK2.replace("method = pso", "method = bfgs")
        problem = self.write_problem(text)
        with self.assertRaises(CommandError) as context:
            self.call("extremize", problem, out=str(self.tmp / "run"))
        self.assertEqual(context.exception.returncode, 2)
        self.assertIn("pso, saa, acor, ees1, ees2", str(context.exception))

    def test_invalid_option_exits_2(self):
        problem = self.write_problem(ROSENBROCK2 + "option.swarm_size = 0\n")
        with self.assertRaises(CommandError) as context:
            self.call("extremize", problem, out=str(self.tmp / "run"))
        self.assertEqual(context.exception.returncode, 2)

    def test_evaluator_setup_failure_exits_3(self):
        problem = self.write_problem(
            "objective = external\n"
            "param = x1,0,1\n"
            "external.command = model {x1} {x3}\n"
        )
        with self.assertRaises(CommandError) as context:
            self.call("extremize", problem, out=str(self.tmp / "run"))
        self.assertEqual(context.exception.returncode, 3)

    def test_unknown_reference_column_exits_3(self):
        raw = json.loads((PROBLEMS / "mock_sine.json").read_text(encoding="utf-8"))
        raw["external"]["command"] = raw["external"]["command"].replace(
            "../mock_models", str(PROBLEMS.parent / "mock_models")
        )
        raw["external"]["reference"] = str(PROBLEMS.parent / "reference_sine.csv")
        raw["cost"]["columns"] = [["y", "nope"]]
        problem = self.write_problem(json.dumps(raw), name="bad_column.json")
        out_dir = self.tmp / "run"
        with self.assertRaises(CommandError) as context:
            self.call("extremize", problem, out=str(out_dir))
        self.assertEqual(context.exception.returncode, 3)
        self.assertIn("nope", str(context.exception))
        self.assertFalse(out_dir.exists())

    def test_external_model_problem(self):
        out_dir = self.tmp / "run"
        self.call(
            "extremize",
            str(PROBLEMS / "mock_rosenbrock2.txt"),
            out=str(out_dir),
            jobs=4,
        )
        stats = json.loads((out_dir / "stats.json").read_text())
        visited = pd.read_csv(out_dir / "visited_space.csv")
        self.assertEqual(len(visited), stats["total_evals"])
        self.assertEqual(stats["failures"], 0)

    def test_archive_unavailable(self):
        estimates = make_estimates([([0, 0], 1.0)])
        with mock.patch.object(
            OptimizationRun, "save", side_effect=ConnectionFailure("hors ligne")
        ):
            with self.assertLogs("cli.services", "WARNING"):
                self.assertIsNone(archive_run(estimates, "test", 1))


class ExploreCommandTests(CommandTestCase):
    def test_rosenbrock4_ees2(self):
        out_dir = self.tmp / "explore"
        self.call(
            "explore",
            str(PROBLEMS / "rosenbrock4_explore.json"),
            budget=1000,
            grid=5,
            out=str(out_dir),
        )
        stats = json.loads((out_dir / "stats.json").read_text())
        self.assertEqual(stats["total_evals"], 620)
        self.assertEqual(len(pd.read_csv(out_dir / "visited_space.csv")), 620)
        surfaces = sorted(p.name for p in out_dir.glob("surface_*.csv"))
        self.assertEqual(
            surfaces,
            [
                "surface_x1_x2.csv",
                "surface_x2_x3.csv",
                "surface_x3_x4.csv",
                "surface_x4_x1.csv",
            ],
        )
        surface = pd.read_csv(out_dir / "surface_x4_x1.csv")
        self.assertEqual(list(surface.columns), ["x4", "x1", "fitness"])
        self.assertEqual(len(surface), 25)

    def test_budget_caps_run_and_empty_cells_blank(self):
        out_dir = self.tmp / "explore"
        problem = self.write_problem(ROSENBROCK2)
        self.call("explore", problem, budget=40, grid=30, out=str(out_dir))
        stats = json.loads((out_dir / "stats.json").read_text())
        self.assertEqual(stats["total_evals"], 40)
        self.assertFalse(stats["converged"])
        self.assertEqual(len(list(out_dir.glob("surface_*.csv"))), 1)
        text = (out_dir / "surface_x1_x2.csv").read_text()
        self.assertIn(",\n", text)
        surface = pd.read_csv(out_dir / "surface_x1_x2.csv")
        self.assertEqual(len(surface), 900)
        self.assertTrue(surface["fitness"].isna().any())
        self.assertLessEqual(surface["fitness"].notna().sum(), 40)

    def test_budget_too_small(self):
        with self.assertRaises(CommandError) as context:
            self.call(
                "explore",
                self.write_problem(ROSENBROCK2),
                budget=19,
                out=str(self.tmp / "explore"),
            )
        self.assertEqual(context.exception.returncode, 2)


class SurfaceTests(SimpleTestCase):
    def test_surface_pairs(self):
        self.assertEqual(
            surface_pairs(["x1", "x2", "x3", "x4"]),
            [("x1", "x2"), ("x2", "x3"), ("x3", "x4"), ("x4", "x1")],
        )
        self.assertEqual(surface_pairs(["a", "b"]), [("a", "b")])
        self.assertEqual(surface_pairs(["a"]), [])

    def test_min_fitness_binning(self):
        space = ParameterSpace([ParameterDef("a", 0, 2), ParameterDef("b", 0, 2)])
        estimates = make_estimates(
            [([0.1, 0.1], 5.0), ([0.4, 0.2], 3.0), ([1.5, 1.9], 7.0), ([2.0, 2.0], 1.0)]
        )
        surface = bin_surface(estimates, space, "a", "b", 2)
        self.assertEqual(list(surface["a"]), [0.5, 0.5, 1.5, 1.5])
        self.assertEqual(list(surface["b"]), [0.5, 1.5, 0.5, 1.5])
        self.assertEqual(surface["fitness"][0], 3.0)
        self.assertTrue(np.isnan(surface["fitness"][1]))
        self.assertTrue(np.isnan(surface["fitness"][2]))
        self.assertEqual(surface["fitness"][3], 1.0)


class BenchmarkCommandTests(CommandTestCase):
    def test_small_grid(self):
        out = self.tmp / "report.csv"
        output = self.call(
            "benchmark",
            replicates=1,
            functions=["griewank", "cigar"],
            methods=["ees2"],
            out=str(out),
        )
        self.assertIn("✓", output)
        report = pd.read_csv(out)
        self.assertEqual(len(report), 2)
        self.assertTrue(set(report["convergence"]) <= {0.0, 1.0})
        self.assertTrue((self.tmp / "report.csv.meta.json").exists())

    def test_rerun_is_byte_identical(self):
        first, second = self.tmp / "first.csv", self.tmp / "second.csv"
        for path in (first, second):
            self.call(
                "benchmark",
                replicates=2,
                seed=3,
                functions=["bohachevsky"],
                methods=["ees1"],
                out=str(path),
            )
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_unknown_function_exits_2(self):
        with self.assertRaises(CommandError) as context:
            self.call("benchmark", functions=["sphere"], out=str(self.tmp / "r.csv"))
        self.assertEqual(context.exception.returncode, 2)

    def test_unknown_method_exits_2(self):
        with self.assertRaises(CommandError) as context:
            self.call("benchmark", methods=["bfgs"], out=str(self.tmp / "r.csv"))
        self.assertEqual(context.exception.returncode, 2)

    @tag("slow")
    def test_full_grid(self):
        out = self.tmp / "report.csv"
        self.call("benchmark", replicates=7, tolerance=0.1, seed=1, out=str(out))
        self.assertEqual(len(pd.read_csv(out)), 16)


class TunePeriodCommandTests(CommandTestCase):
    def test_small_budget(self):
        out_dir = self.tmp / "period"
        output = self.call(
            "tune_period", target=24, method="ees2", budget=60, out=str(out_dir)
        )
        stats = json.loads((out_dir / "stats.json").read_text())
        self.assertEqual(stats["parameter_names"], ["x1", "x2", "x3", "x4"])
        self.assertLessEqual(stats["total_evals"], 60)

        # la période affichée est celle que le coût a notée
        best = pd.read_csv(out_dir / "best.csv")
        values = best[["x1", "x2", "x3", "x4"]].iloc[0].to_numpy(dtype=float)
        period = predator_prey_period(PPParams(*values), 24)
        if period is None:
            self.assertIn("Aucune période détectée", output)
        else:
            self.assertIn(f"Période obtenue: {period:.3f} relevés", output)
            self.assertAlmostEqual(abs(period - 24) / 24, best["fitness"][0])

    def test_invalid_target(self):
        with self.assertRaises(CommandError) as context:
            self.call("tune_period", target=-1, out=str(self.tmp / "period"))
        self.assertEqual(context.exception.returncode, 2)

    @tag("slow")
    def test_period_72(self):
        out_dir = self.tmp / "period"
        self.call("tune_period", target=72, method="pso", seed=1, out=str(out_dir))
        best = pd.read_csv(out_dir / "best.csv")
        stats = json.loads((out_dir / "stats.json").read_text())
        self.assertLessEqual(best["fitness"][0], 0.05)
        self.assertLessEqual(stats["total_evals"], 2000)
