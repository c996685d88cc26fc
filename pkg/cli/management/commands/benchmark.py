"""
Comparaison des métaheuristiques sur les fonctions de test

Usage:
    python manage.py benchmark --replicates 7 --tolerance 0.1 --seed 1 \
        --out runs/benchmark.csv
"""

from django.core.management.base import BaseCommand, CommandError

from benchmarks.functions import registry
from benchmarks.services import DEFAULT_FUNCTIONS, DEFAULT_METHODS, compare_algorithms
from cli.management.base import EXIT_INVALID
from core.exceptions import DimensionMismatchError, UnknownMethodError
from metaheuristics.services import get_options_class


class Command(BaseCommand):
    help = "Exécute la grille fonctions x méthodes et écrit le rapport CSV"

    def add_arguments(self, parser):
        parser.add_argument("--replicates", type=int, default=7)
        parser.add_argument("--tolerance", type=float, default=0.1)
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--out", required=True, help="Fichier CSV du rapport")
        parser.add_argument("--dimension", type=int, default=4)
        parser.add_argument("--functions", nargs="+", default=DEFAULT_FUNCTIONS)
        parser.add_argument("--methods", nargs="+", default=DEFAULT_METHODS)
        parser.add_argument(
            "--jobs", type=int, default=1, help="Processus pour les cases de la grille"
        )

    def handle(self, *args, **options):
        if options["replicates"] < 1:
            raise CommandError("--replicates doit être >= 1", returncode=EXIT_INVALID)
        if options["tolerance"] < 0:
            raise CommandError("--tolerance doit être >= 0", returncode=EXIT_INVALID)
        unknown = [name for name in options["functions"] if name not in registry]
        if unknown:
            raise CommandError(
                f"Fonctions de test inconnues: {', '.join(unknown)} "
                f"(valides: {', '.join(registry)})",
                returncode=EXIT_INVALID,
            )
        try:
            for method in options["methods"]:
                get_options_class(method)
            report = compare_algorithms(
                functions=options["functions"],
                methods=options["methods"],
                replicates=options["replicates"],
                tolerance=options["tolerance"],
                seed_base=options["seed"],
                dimension=options["dimension"],
                jobs=options["jobs"],
            )
        except (UnknownMethodError, DimensionMismatchError) as e:
            raise CommandError(str(e), returncode=EXIT_INVALID) from e

        meta_path = report.to_csv(options["out"])
        for row in report.rows:
            self.stdout.write(
                f"{row.function:12} {row.algorithm:5} "
                f"évaluations={row.mean_evals:10.2f} convergence={row.convergence:.2f}"
            )
        self.stdout.write(
            self.style.SUCCESS(
                f"✓ Rapport écrit: {options['out']} ({meta_path.name})"
            )
        )
