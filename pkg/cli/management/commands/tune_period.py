"""
Réglage des paramètres du modèle proie-prédateur pour une période cible

Usage:
    python manage.py tune_period --target 72 --method pso --out runs/period72
"""

from django.core.management.base import CommandError

from cli.management.base import EXIT_INVALID, EstimationCommand
from cli.problem import PERIOD_TUNING_BOUNDS, PERIOD_TUNING_NAMES, build_problem
from cli.services import write_run
from core.exceptions import ProblemFileError
from dynamics.services import PPParams, predator_prey_period
from metaheuristics.services import extremize


class Command(EstimationCommand):
    help = "Cherche c1..c4 donnant au canal y la période cible"

    def add_arguments(self, parser):
        parser.add_argument("--target", type=float, required=True)
        parser.add_argument("--method", default="pso")
        parser.add_argument("--tolerance", type=float, default=0.01)
        parser.add_argument(
            "--budget", type=int, default=2000, help="Évaluations maximales"
        )
        self.add_run_arguments(parser)

    def handle(self, *args, **options):
        lower, upper = PERIOD_TUNING_BOUNDS
        raw = {
            "objective": "period-tuning",
            "target": options["target"],
            "method": options["method"],
            "seed": 0 if options["seed"] is None else options["seed"],
            "tolerance": options["tolerance"],
            "max_evals": options["budget"],
            "lower": lower,
            "upper": upper,
            "parameters": [],
            "options": {},
            "external": {},
            "cost": {},
        }
        try:
            problem = build_problem(raw, base_dir=None)
        except ProblemFileError as e:
            raise CommandError(str(e), returncode=EXIT_INVALID) from e
        objective, method_options = self.prepare(problem, jobs=options["jobs"])

        estimates = extremize(
            problem.method, objective, method_options, seed=problem.seed
        )
        write_run(estimates, options["out"], problem.seed, options["reproducible"])

        period = predator_prey_period(
            PPParams(*estimates.best.values), problem.target
        )
        values = ", ".join(
            f"{name}={value:.4f}"
            for name, value in zip(PERIOD_TUNING_NAMES, estimates.best.values)
        )
        self.success(str(estimates))
        self.success(f"Paramètres: {values}")
        if period is None:
            self.stdout.write("Aucune période détectée pour la meilleure solution")
        else:
            self.success(
                f"Période obtenue: {period:.3f} relevés (cible {problem.target:g})"
            )

        if options["save"]:
            self.archive(estimates, problem.name, problem.seed)
