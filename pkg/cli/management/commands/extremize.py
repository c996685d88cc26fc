"""
Estimation des paramètres d'un problème décrit par un fichier

Usage:
    python manage.py extremize fixtures/problems/rosenbrock2.txt --out runs/ros
"""

from cli.management.base import EstimationCommand
from cli.services import write_run
from metaheuristics.services import extremize


class Command(EstimationCommand):
    help = "Lance la méthode du fichier de problème et écrit les résultats CSV/JSON"

    def add_arguments(self, parser):
        parser.add_argument(
            "problem", help="Fichier de problème (clé-valeur ou JSON)"
        )
        self.add_run_arguments(parser)

    def handle(self, *args, **options):
        problem = self.load(options["problem"])
        seed = problem.seed if options["seed"] is None else options["seed"]
        objective, method_options = self.prepare(problem, jobs=options["jobs"])

        estimates = extremize(problem.method, objective, method_options, seed=seed)
        write_run(estimates, options["out"], seed, options["reproducible"])
        self.success(str(estimates))
        self.success(f"Résultats écrits dans {options['out']}")

        if options["save"]:
            self.archive(estimates, problem.name, seed)
