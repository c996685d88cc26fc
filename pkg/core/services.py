"""
Services du noyau : contrat de la fonction objectif, comptabilité des
évaluations et objet résultat (Estimates) partagé par tous les algorithmes
"""

import logging
import math
import sys
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .conf import metaestim_setting
from .exceptions import BudgetExhausted, DimensionMismatchError
from .parameters import ParameterDef, ParameterSpace

logger = logging.getLogger(__name__)

# Valeur sentinelle enregistrée pour une évaluation en échec
PENALTY_VALUE = sys.float_info.max


@dataclass
class Candidate:
    """
    Un vecteur de paramètres, sa fitness et sa provenance
    """

    values: np.ndarray
    fitness: Optional[float] = None
    pset: int = 0
    iteration: int = 0
    note: Optional[str] = None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    @property
    def failed(self) -> bool:
        return self.note is not None

    def as_row(self, names: List[str]) -> Dict[str, Any]:
        row = {name: float(value) for name, value in zip(names, self.values)}
        row.update(pset=self.pset, iteration=self.iteration, fitness=self.fitness)
        return row


class ObjectiveFunction(ABC):
    """
    Classe de base de toutes les fonctions objectif.

    Les sous-classes implémentent `evaluate_one`; le code des algorithmes
    passe toujours par `evaluate`, qui tient le journal des points visités.
    """

    def __init__(
        self,
        tolerance: Optional[float] = None,
        jobs: Optional[int] = None,
        max_evals: Optional[int] = None,
    ):
        self.space = ParameterSpace()
        self.set_tolerance(
            metaestim_setting("DEFAULT_TOLERANCE") if tolerance is None else tolerance
        )
        self.jobs = metaestim_setting("JOBS") if jobs is None else jobs
        if max_evals is not None and max_evals < 1:
            raise ValueError("max_evals doit être >= 1")
        self.max_evals = max_evals
        self.visited: List[Candidate] = []
        self.best: Optional[Candidate] = None
        self._raw_data = None

    # Paramètres
    def parameter(self, name: str, min: float, max: float) -> "ObjectiveFunction":
        """Ajoute un paramètre borné (chaînable)"""
        self.space.add_parameter(ParameterDef(name, min, max))
        return self

    def get_parameter(self, name: str) -> ParameterDef:
        return self.space.get_parameter(name)

    def get_parameter_names(self) -> List[str]:
        return self.space.names

    def set_tolerance(self, tolerance: float) -> None:
        if tolerance < 0:
            raise ValueError("La tolérance doit être positive ou nulle")
        self.tolerance = tolerance

    # Évaluation
    @abstractmethod
    def evaluate_one(self, values: np.ndarray, pset: int) -> float:
        """Évalue un vecteur de paramètres et retourne son coût"""

    @property
    def total_evals(self) -> int:
        return len(self.visited)

    @property
    def remaining_evals(self) -> Optional[int]:
        if self.max_evals is None:
            return None
        return max(0, self.max_evals - self.total_evals)

    def evaluate(self, batch, iteration: int = 0) -> np.ndarray:
        """
        Évalue un lot de vecteurs et les ajoute au journal des points visités

        Args:
            batch: Vecteurs (lignes) déjà projetés dans les bornes
            iteration: Itération de l'algorithme ayant produit le lot

        Returns:
            Un coût fini par vecteur, dans l'ordre du lot

        Raises:
            BudgetExhausted: après avoir évalué la partie du lot qui tient
                dans le budget `max_evals`
        """
        vectors = np.atleast_2d(np.asarray(batch, dtype=float))
        if vectors.shape[1] != self.space.dimension:
            raise DimensionMismatchError(
                f"Lot de dimension {vectors.shape[1]} pour un espace de "
                f"dimension {self.space.dimension}"
            )

        exhausted = False
        remaining = self.remaining_evals
        if remaining is not None and len(vectors) > remaining:
            vectors = vectors[:remaining]
            exhausted = True

        first_pset = self.total_evals + 1
        psets = range(first_pset, first_pset + len(vectors))

        if self.jobs > 1 and len(vectors) > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as executor:
                outcomes = list(executor.map(self._safe_evaluate, vectors, psets))
        else:
            outcomes = [self._safe_evaluate(v, p) for v, p in zip(vectors, psets)]

        # Écriture unique, dans l'ordre du lot
        costs = np.empty(len(vectors))
        for index, (values, pset, (cost, note)) in enumerate(
            zip(vectors, psets, outcomes)
        ):
            candidate = Candidate(
                values=values.copy(),
                fitness=cost,
                pset=pset,
                iteration=iteration,
                note=note,
            )
            self.visited.append(candidate)
            if self.best is None or cost < self.best.fitness:
                self.best = candidate
            costs[index] = cost

        if exhausted:
            logger.info("Budget de %d évaluations épuisé", self.max_evals)
            raise BudgetExhausted(
                f"Budget de {self.max_evals} évaluations épuisé"
            )
        return costs

    def _safe_evaluate(self, values: np.ndarray, pset: int):
        try:
            cost = float(self.evaluate_one(values, pset))
        except Exception as e:
            logger.warning("Échec de l'évaluation pset=%d: %s", pset, e)
            return PENALTY_VALUE, f"{type(e).__name__}: {e}"
        if not math.isfinite(cost):
            logger.warning("Coût non fini (%s) pour pset=%d", cost, pset)
            return PENALTY_VALUE, f"coût non fini: {cost}"
        return cost, None

    def is_converged(self, best_fitness: float) -> bool:
        return best_fitness <= self.tolerance

    @property
    def converged(self) -> bool:
        return self.best is not None and self.is_converged(self.best.fitness)

    @property
    def exhausted(self) -> bool:
        return self.max_evals is not None and self.total_evals >= self.max_evals

    def raw_data(self):
        """Dernière sortie brute de l'évaluateur, quand il en produit une"""
        return self._raw_data

    def stats(self) -> Dict[str, Any]:
        return {
            "total_evals": self.total_evals,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "failures": sum(1 for candidate in self.visited if candidate.failed),
        }

    def reset(self) -> None:
        """Vide le journal (les paramètres sont conservés)"""
        self.visited = []
        self.best = None
        self._raw_data = None


class PlainFunction(ObjectiveFunction):
    """
    Fonction objectif Python en mémoire.

    Par défaut la fonction reçoit le vecteur; avec keyword=True elle reçoit
    un argument nommé par paramètre, comme rosenbrock2(x1=..., x2=...).
    """

    def __init__(self, fn: Callable, keyword: bool = False, **kwargs):
        super().__init__(**kwargs)
        self.fn = fn
        self.keyword = keyword

    def evaluate_one(self, values: np.ndarray, pset: int) -> float:
        if self.keyword:
            return self.fn(**self.space.as_dict(values))
        return self.fn(values)


def evaluate(objective: ObjectiveFunction, batch, iteration: int = 0) -> np.ndarray:
    return objective.evaluate(batch, iteration=iteration)


def is_converged(objective: ObjectiveFunction, best_fitness: float) -> bool:
    return objective.is_converged(best_fitness)


@dataclass
class RunStats:
    total_evals: int
    converged: bool
    achieved_tolerance: float
    wall_time: float


@dataclass
class Estimates:
    """
    Résultat standard de toutes les méthodes d'optimisation
    """

    best: Candidate
    iteration_bests: List[Candidate]
    visited_space: List[Candidate]
    stats: RunStats
    parameter_names: List[str] = field(default_factory=list)
    method: str = ""
    options: Dict[str, Any] = field(default_factory=dict)

    def get_best(self) -> Candidate:
        return self.best

    def get_iteration_best(self) -> List[Candidate]:
        return self.iteration_bests

    def get_visited_space(self, sort: bool = False) -> List[Candidate]:
        """Points visités, dans l'ordre d'évaluation ou triés par fitness"""
        if sort:
            return sorted(self.visited_space, key=lambda c: (c.fitness, c.pset))
        return self.visited_space

    def __str__(self):
        values = ", ".join(f"{v:.6g}" for v in self.best.values)
        return (
            f"{self.method}: best=({values}) fitness={self.best.fitness:.6g} "
            f"evals={self.stats.total_evals} converged={self.stats.converged}"
        )


class RunTracker:
    """
    État d'une exécution partagé par les algorithmes : compteur
    d'itérations, meilleurs par itération, chronomètre et critère d'arrêt
    """

    def __init__(
        self,
        objective: ObjectiveFunction,
        rng: np.random.Generator,
        method: str = "",
        options: Optional[Dict[str, Any]] = None,
    ):
        if objective.space.dimension < 1:
            raise DimensionMismatchError(
                "La fonction objectif doit avoir au moins un paramètre"
            )
        self.objective = objective
        self.space = objective.space
        self.rng = rng
        self.method = method
        self.options = options or {}
        self.iteration = 0
        self.iteration_bests: List[Candidate] = []
        self._evals_at_iteration_end = objective.total_evals
        self._started = time.perf_counter()

    def evaluate(self, batch) -> np.ndarray:
        return self.objective.evaluate(batch, iteration=self.iteration)

    def end_iteration(self) -> None:
        """Clôt l'itération courante en mémorisant le meilleur courant"""
        self.iteration_bests.append(self.objective.best)
        self._evals_at_iteration_end = self.objective.total_evals
        self.iteration += 1

    def should_stop(self) -> bool:
        return self.objective.converged or self.objective.exhausted

    def estimates(self) -> Estimates:
        # itération interrompue par le budget
        if self.objective.total_evals > self._evals_at_iteration_end:
            self.end_iteration()
        best = self.objective.best
        stats = RunStats(
            total_evals=self.objective.total_evals,
            converged=self.objective.is_converged(best.fitness),
            achieved_tolerance=best.fitness,
            wall_time=time.perf_counter() - self._started,
        )
        return Estimates(
            best=best,
            iteration_bests=list(self.iteration_bests),
            visited_space=list(self.objective.visited),
            stats=stats,
            parameter_names=self.space.names,
            method=self.method,
            options=dict(self.options),
        )
