"""
Socle commun des commandes d'estimation : chargement du problème et
conversion des erreurs en codes de sortie
"""

from typing import Optional, Tuple

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import (
    InvalidOptionsError,
    MetaestimError,
    ProblemFileError,
)
from cli.problem import ProblemFile, load_problem
from cli.services import archive_run
from core.services import Estimates, ObjectiveFunction
from metaheuristics.options import BaseOptions

# Fichier de problème ou options invalides
EXIT_INVALID = 2
# Échec de mise en place de l'évaluateur
EXIT_SETUP = 3


class EstimationCommand(BaseCommand):
    """Commande lançant une estimation décrite par un fichier de problème"""

    def add_run_arguments(self, parser):
        parser.add_argument("--out", required=True, help="Répertoire de sortie")
        parser.add_argument(
            "--seed", type=int, help="Graine (remplace celle du fichier)"
        )
        parser.add_argument(
            "--jobs", type=int, help="Évaluations simultanées par lot"
        )
        parser.add_argument(
            "--save", action="store_true", help="Archiver l'exécution dans MongoDB"
        )
        parser.add_argument(
            "--reproducible",
            action="store_true",
            default=None,
            help="Écrire wall_time = 0 pour des sorties identiques",
        )

    def load(self, path) -> ProblemFile:
        try:
            return load_problem(path)
        except ProblemFileError as e:
            raise CommandError(str(e), returncode=EXIT_INVALID) from e

    def prepare(
        self,
        problem: ProblemFile,
        jobs: Optional[int] = None,
        max_evals: Optional[int] = None,
    ) -> Tuple[ObjectiveFunction, BaseOptions]:
        """
        Raises:
            CommandError: code 2 pour des options invalides, code 3 si
                l'évaluateur ne peut pas être construit
        """
        try:
            options = problem.build_options()
        except InvalidOptionsError as e:
            raise CommandError(str(e), returncode=EXIT_INVALID) from e
        try:
            objective = problem.build_objective(jobs=jobs, max_evals=max_evals)
        except (MetaestimError, OSError) as e:
            raise CommandError(
                f"Évaluateur impossible à construire: {e}", returncode=EXIT_SETUP
            ) from e
        return objective, options

    def success(self, message: str) -> None:
        self.stdout.write(self.style.SUCCESS(f"✓ {message}"))

    def archive(self, estimates: Estimates, problem: str, seed: Optional[int]):
        """Archive MongoDB; un échec n'altère pas le code de sortie"""
        run = archive_run(estimates, problem, seed)
        if run is not None:
            self.success(f"Exécution archivée ({run.id})")
        else:
            self.stderr.write("Archivage MongoDB indisponible")
