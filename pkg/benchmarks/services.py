"""
Comparaison des métaheuristiques sur les fonctions de test
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from metaheuristics.services import extremize, get_options_class

from .functions import make_benchmark_objective

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["function", "algorithm", "mean_evals", "convergence", "mean_fitness"]
DEFAULT_FUNCTIONS = ["cigar", "schaffer", "griewank", "bohachevsky"]
DEFAULT_METHODS = ["pso", "saa", "acor", "ees1"]
# Options du protocole de comparaison, appliquées avant les surcharges
# de l'appelant. EES1 garde 50 itérations par défaut hors comparaison.
PROTOCOL_OPTIONS = {"ees1": {"iterations": 200}}


@dataclass
class ComparisonRow:
    function: str
    algorithm: str
    mean_evals: float
    convergence: float
    mean_fitness: float


@dataclass
class ComparisonReport:
    """
    Une ligne par couple (fonction, algorithme), moyennes sur les réplicats
    """

    rows: List[ComparisonRow]
    replicates: int
    tolerance: float
    seeds: List[int]
    dimension: int = 4
    schaffer_variant: str = "F7"
    extra: dict = field(default_factory=dict)

    def get_row(self, function: str, algorithm: str) -> ComparisonRow:
        for row in self.rows:
            if row.function == function and row.algorithm == algorithm:
                return row
        raise KeyError(f"Pas de ligne pour ({function}, {algorithm})")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(row) for row in self.rows], columns=REPORT_COLUMNS)

    def metadata(self) -> dict:
        return {
            "replicates": self.replicates,
            "tolerance": self.tolerance,
            "seeds": self.seeds,
            "dimension": self.dimension,
            "schaffer_variant": self.schaffer_variant,
            **self.extra,
        }

    def to_csv(self, path) -> Path:
        """
        Écrit le rapport CSV et ses métadonnées dans `<path>.meta.json`

        Returns:
            Chemin du fichier de métadonnées
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator="\n")
        meta_path = path.with_name(path.name + ".meta.json")
        meta_path.write_text(
            json.dumps(self.metadata(), indent=2, sort_keys=True, default=str) + "\n",
            encoding="utf-8",
        )
        return meta_path


def run_cell(
    function: str,
    method: str,
    dimension: int,
    replicates: int,
    tolerance: float,
    seed_base: int,
    overrides: Optional[dict] = None,
) -> ComparisonRow:
    """Exécute les réplicats d'une case de la grille"""
    options = get_options_class(method)()
    if overrides:
        options = options.with_overrides(**overrides)
    evals, converged, fitness = [], [], []
    for replicate in range(replicates):
        objective = make_benchmark_objective(function, dimension, tolerance=tolerance)
        estimates = extremize(method, objective, options, seed=seed_base + replicate)
        evals.append(estimates.stats.total_evals)
        converged.append(estimates.stats.converged)
        fitness.append(estimates.best.fitness)
    row = ComparisonRow(
        function=function,
        algorithm=method,
        mean_evals=float(np.mean(evals)),
        convergence=sum(converged) / replicates,
        mean_fitness=float(np.mean(fitness)),
    )
    logger.info(
        "%s/%s: %.2f évaluations, convergence %.2f",
        function,
        method,
        row.mean_evals,
        row.convergence,
    )
    return row


def compare_algorithms(
    functions: Sequence[str] = DEFAULT_FUNCTIONS,
    methods: Sequence[str] = DEFAULT_METHODS,
    replicates: int = 7,
    tolerance: float = 0.1,
    seed_base: int = 0,
    dimension: int = 4,
    jobs: int = 1,
    options: Optional[dict] = None,
) -> ComparisonReport:
    """
    Lance chaque couple (fonction, méthode) `replicates` fois avec les
    graines seed_base + r

    Args:
        functions: Noms des fonctions de test
        methods: Clés des méthodes
        replicates: Nombre de réplicats (>= 1)
        tolerance: Seuil de convergence
        seed_base: Première graine
        dimension: Dimension des fonctions
        jobs: Nombre de processus pour les cases de la grille
        options: Surcharges d'options par méthode, {"pso": {"swarm_size": 32}},
            appliquées par-dessus PROTOCOL_OPTIONS

    Returns:
        Le rapport, lignes dans l'ordre de la grille (fonctions puis méthodes)
    """
    if replicates < 1:
        raise ValueError("replicates doit être >= 1")
    options = options or {}
    overrides = {
        method: {**PROTOCOL_OPTIONS.get(method, {}), **options.get(method, {})}
        for method in methods
    }
    for method in methods:
        get_options_class(method)
    cells = [(function, method) for function in functions for method in methods]
    arguments = [
        (
            function,
            method,
            dimension,
            replicates,
            tolerance,
            seed_base,
            overrides[method] or None,
        )
        for function, method in cells
    ]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            rows = list(executor.map(run_cell, *zip(*arguments)))
    else:
        rows = [run_cell(*args) for args in arguments]

    return ComparisonReport(
        rows=rows,
        replicates=replicates,
        tolerance=tolerance,
        seeds=[seed_base + r for r in range(replicates)],
        dimension=dimension,
        schaffer_variant="F6" if "schaffer_f6" in functions else "F7",
        extra={"options": {m: o for m, o in overrides.items() if o}},
    )
