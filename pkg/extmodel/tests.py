import math
import shlex
import tempfile
import time
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import (
    ExternalModelError,
    ModelExecutionError,
    ModelOutputError,
    ModelTimeoutError,
)
from core.parameters import ParameterDef, ParameterSpace
from core.services import PENALTY_VALUE, PlainFunction
from metaheuristics.options import OptionsPSO
from metaheuristics.services import extremize

from .services import (
    CostSpec,
    ExternalModelSpec,
    make_objective,
    run_model,
    template_fields,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
MOCK_MODELS = FIXTURES / "mock_models"
REFERENCE = str(FIXTURES / "reference_sine.csv")


def mock(script: str) -> str:
    return "{python} " + shlex.quote(str(MOCK_MODELS / script))


def rosenbrock2(x1, x2):
    return (1 - x1) ** 2 + 100 * (x2 - x1**2) ** 2


def space(*names, lower=-5.0, upper=5.0):
    return ParameterSpace([ParameterDef(name, lower, upper) for name in names])


def value_cost():
    return CostSpec("value", value_column="value")


def sine_spec(kind="rmsd-columns", n=6, **cost):
    return ExternalModelSpec(
        command_template=mock("timeseries.py") + f" {{a}} {n}",
        cost=CostSpec(kind, columns=[("y", "y")], **cost),
        reference=REFERENCE,
    )


class SpecValidationTests(SimpleTestCase):
    def test_template_fields(self):
        self.assertEqual(
            template_fields("{python} model.py {x1} --b {x2}"), ["python", "x1", "x2"]
        )

    def test_invalid_cost(self):
        with self.assertRaises(ExternalModelError):
            CostSpec("likelihood")
        with self.assertRaises(ExternalModelError):
            CostSpec("command")
        with self.assertRaises(ExternalModelError):
            CostSpec("rmsd-columns")
        with self.assertRaises(ExternalModelError):
            CostSpec("value")

    def test_invalid_model(self):
        with self.assertRaises(ExternalModelError):
            ExternalModelSpec("model {x1}", value_cost(), timeout=0)
        with self.assertRaises(ExternalModelError):
            ExternalModelSpec("model {x1}", value_cost(), output_mode="file-csv")
        with self.assertRaises(ExternalModelError):
            ExternalModelSpec(
                "model {x1}", CostSpec("dtw-columns", columns=[("y", "y")])
            )

    def test_default_timeout(self):
        self.assertEqual(ExternalModelSpec("model {x1}", value_cost()).timeout, 300.0)

    def test_placeholders_against_space(self):
        spec = ExternalModelSpec("model {x1} {x3}", value_cost())
        with self.assertRaises(ExternalModelError):
            spec.validate(space("x1", "x2"))
        spec = ExternalModelSpec("model {x1}", value_cost())
        with self.assertRaises(ExternalModelError):
            spec.validate(space("x1", "x2"))
        spec = ExternalModelSpec("model {x1} {x1}", value_cost())
        with self.assertRaises(ExternalModelError):
            spec.validate(space("x1"))
        ExternalModelSpec("model {x1}", value_cost(), params_file=True).validate(
            space("x1", "x2")
        )

    def test_missing_parameter_rejected_before_launch(self):
        spec = ExternalModelSpec(mock("rosenbrock2.py") + " {x1} {x2}", value_cost())
        with self.assertRaises(ExternalModelError):
            run_model(spec, {"x1": 1.0})


class RunModelTests(SimpleTestCase):
    def test_stdout_csv(self):
        spec = ExternalModelSpec(mock("rosenbrock2.py") + " {x1} {x2}", value_cost())
        output = run_model(spec, {"x1": 1.0, "x2": 1.0})
        self.assertEqual(output["value"][-1], 0.0)
        output = run_model(spec, {"x1": 0.1, "x2": -0.3})
        self.assertEqual(output["value"][-1], rosenbrock2(0.1, -0.3))

    def test_file_csv(self):
        spec = ExternalModelSpec(
            mock("timeseries.py") + " {a} 4 {workdir}/out.csv",
            value_cost(),
            output_mode="file-csv",
            output_path="{workdir}/out.csv",
        )
        with tempfile.TemporaryDirectory() as workdir:
            output = run_model(spec, {"a": 2.0}, workdir=workdir)
        np.testing.assert_array_equal(output.t, [0, 1, 2, 3])
        self.assertEqual(output["y"][1], 2.0 * math.sin(1))

    def test_timeout_kills_model(self):
        spec = ExternalModelSpec(mock("sleeper.py"), value_cost(), timeout=0.5)
        start = time.perf_counter()
        with self.assertLogs("extmodel.services", "WARNING"):
            with self.assertRaises(ModelTimeoutError):
                run_model(spec, {})
        self.assertLess(time.perf_counter() - start, 10)

    def test_nonzero_exit(self):
        spec = ExternalModelSpec(mock("failing.py"), value_cost())
        with self.assertLogs("extmodel.services", "WARNING") as logs:
            with self.assertRaises(ModelExecutionError):
                run_model(spec, {})
        self.assertIn("solveur divergent", "\n".join(logs.output))

    def test_unknown_program(self):
        spec = ExternalModelSpec("/nonexistent/metaestim-model {x1}", value_cost())
        with self.assertRaises(ModelExecutionError):
            run_model(spec, {"x1": 0.0})

    def test_malformed_output(self):
        spec = ExternalModelSpec(mock("garbage.py"), value_cost())
        with self.assertRaises(ModelOutputError):
            run_model(spec, {})


class ExternalObjectiveTests(SimpleTestCase):
    def test_value_cost(self):
        spec = ExternalModelSpec(mock("rosenbrock2.py") + " {x1} {x2}", value_cost())
        objective = make_objective(spec, space("x1", "x2"))
        costs = objective.evaluate([[1.0, 1.0], [0.5, 2.0]])
        self.assertEqual(costs[0], 0.0)
        self.assertEqual(costs[1], rosenbrock2(0.5, 2.0))
        self.assertEqual(objective.raw_data()["value"][-1], costs[1])

    def test_params_file_and_eval_id(self):
        spec = ExternalModelSpec(
            mock("params_file_model.py"), value_cost(), params_file=True
        )
        objective = make_objective(spec, space("x1", "x2"))
        costs = objective.evaluate([[1.0, 2.0], [0.5, 0.5]])
        np.testing.assert_array_equal(costs, [5.0, 0.5])
        self.assertEqual(objective.raw_data()["eval_id"][-1], 2)

    def test_failures_become_penalties(self):
        for script, timeout in (("failing.py", None), ("sleeper.py", 0.3)):
            spec = ExternalModelSpec(
                mock(script) + " {x1}", value_cost(), timeout=timeout
            )
            objective = make_objective(spec, space("x1"))
            with self.assertLogs("core.services", "WARNING"):
                cost = objective.evaluate([[0.0]])[0]
            self.assertEqual(cost, PENALTY_VALUE)
            self.assertTrue(objective.visited[0].failed)

    def test_missing_value_column(self):
        spec = ExternalModelSpec(
            mock("rosenbrock2.py") + " {x1} {x2}",
            CostSpec("value", value_column="loss"),
        )
        objective = make_objective(spec, space("x1", "x2"))
        with self.assertLogs("core.services", "WARNING"):
            self.assertEqual(objective.evaluate([[0, 0]])[0], PENALTY_VALUE)

    def test_column_costs(self):
        objective = make_objective(sine_spec(), space("a"))
        costs = objective.evaluate([[1.0], [0.0]])
        self.assertAlmostEqual(costs[0], 0.0)
        reference = [math.sin(t) for t in range(6)]
        self.assertAlmostEqual(costs[1], math.sqrt(np.mean(np.square(reference))))

        objective = make_objective(sine_spec("dtw-columns"), space("a"))
        self.assertAlmostEqual(objective.evaluate([[1.0]])[0], 0.0)

        objective = make_objective(sine_spec("nrmsd-columns"), space("a"))
        expected = math.sqrt(np.mean(np.square(reference))) / (
            max(reference) - min(reference)
        )
        self.assertAlmostEqual(objective.evaluate([[0.0]])[0], expected)

    def test_longer_output_is_truncated(self):
        objective = make_objective(sine_spec(n=10), space("a"))
        with self.assertLogs("extmodel.services", "WARNING"):
            cost = objective.evaluate([[1.0]])[0]
        self.assertAlmostEqual(cost, 0.0)

    def test_skip_until(self):
        objective = make_objective(sine_spec(skip_until=3), space("a"))
        reference = [math.sin(t) for t in range(3, 6)]
        cost = objective.evaluate([[0.0]])[0]
        self.assertAlmostEqual(cost, math.sqrt(np.mean(np.square(reference))))

    def test_command_cost(self):
        spec = ExternalModelSpec(
            mock("timeseries.py") + " {a} 6",
            CostSpec(
                "command",
                command=mock("scorer.py") + " {model_csv} {reference_csv}",
            ),
            reference=REFERENCE,
        )
        objective = make_objective(spec, space("a"))
        self.assertEqual(objective.evaluate([[1.0]])[0], 0.5)

    def test_command_cost_reads_model_output_on_stdin(self):
        # 4 lignes de sortie, 6 dans la référence
        spec = ExternalModelSpec(
            mock("timeseries.py") + " {a} 4",
            CostSpec("command", command=mock("row_counter.py") + " {reference_csv}"),
            reference=REFERENCE,
        )
        objective = make_objective(spec, space("a"))
        self.assertEqual(objective.evaluate([[1.0]])[0], 4.0)

    def test_missing_reference(self):
        spec = sine_spec()
        spec.reference = "/nonexistent/reference.csv"
        with self.assertRaises(ExternalModelError):
            make_objective(spec, space("a"))

    def test_unknown_reference_column(self):
        spec = sine_spec()
        spec.cost.columns = [("y", "nope")]
        with self.assertRaises(ExternalModelError) as context:
            make_objective(spec, space("a"))
        self.assertIn("nope", str(context.exception))

        spec.cost.columns = [("t", "t")]
        objective = make_objective(spec, space("a"))
        self.assertAlmostEqual(objective.evaluate([[1.0]])[0], 0.0)

    def test_subprocess_is_transparent_to_search(self):
        options = OptionsPSO(iterations=3, swarm_size=4)
        spec = ExternalModelSpec(mock("rosenbrock2.py") + " {x1} {x2}", value_cost())
        external = make_objective(spec, space("x1", "x2"), tolerance=0)
        in_process = PlainFunction(rosenbrock2, keyword=True, tolerance=0)
        in_process.parameter("x1", -5.0, 5.0).parameter("x2", -5.0, 5.0)

        first = extremize("pso", external, options, seed=11)
        second = extremize("pso", in_process, options, seed=11)
        self.assertEqual(first.stats.total_evals, 16)
        for a, b in zip(first.get_visited_space(), second.get_visited_space()):
            np.testing.assert_array_equal(a.values, b.values)
            self.assertEqual(a.fitness, b.fitness)
        self.assertEqual(first.best.fitness, second.best.fitness)
