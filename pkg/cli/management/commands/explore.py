"""
Cartographie de l'espace des solutions : exécution à budget fixe puis
surfaces de fitness minimale par couple de paramètres voisins

Usage:
    python manage.py explore fixtures/problems/rosenbrock4.txt --budget 1000 \
        --grid 20 --out runs/explore
"""

from django.core.management.base import CommandError

from cli.management.base import EXIT_INVALID, EstimationCommand
from cli.services import write_run, write_surfaces
from metaheuristics.services import extremize

# Évaluations minimales par paramètre
BUDGET_PER_DIMENSION = 10


class Command(EstimationCommand):
    help = "Explore l'espace des solutions et écrit les surfaces de fitness"

    def add_arguments(self, parser):
        parser.add_argument(
            "problem", help="Fichier de problème (clé-valeur ou JSON)"
        )
        parser.add_argument(
            "--budget", type=int, required=True, help="Évaluations maximales"
        )
        parser.add_argument(
            "--grid", type=int, default=20, help="Cases par axe des surfaces"
        )
        self.add_run_arguments(parser)

    def handle(self, *args, **options):
        problem = self.load(options["problem"])
        minimum = BUDGET_PER_DIMENSION * problem.dimension
        if options["budget"] < minimum:
            raise CommandError(
                f"Budget insuffisant: {options['budget']} < {minimum} "
                f"({BUDGET_PER_DIMENSION} par paramètre)",
                returncode=EXIT_INVALID,
            )
        if options["grid"] < 1:
            raise CommandError("--grid doit être >= 1", returncode=EXIT_INVALID)

        seed = problem.seed if options["seed"] is None else options["seed"]
        objective, method_options = self.prepare(
            problem, jobs=options["jobs"], max_evals=options["budget"]
        )
        # Cartographie : pas d'arrêt sur convergence, seul le budget borne l'exécution
        objective.set_tolerance(0.0)

        estimates = extremize(problem.method, objective, method_options, seed=seed)
        write_run(estimates, options["out"], seed, options["reproducible"])
        surfaces = write_surfaces(
            estimates, objective.space, options["grid"], options["out"]
        )
        self.success(f"{estimates.stats.total_evals} évaluations")
        self.success(f"{len(surfaces)} surfaces écrites dans {options['out']}")

        if options["save"]:
            self.archive(estimates, problem.name, seed)
