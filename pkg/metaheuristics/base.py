"""
Squelette commun des métaheuristiques : initialisation, boucle, arrêt
"""

import logging
from typing import Callable, Optional

import numpy as np

from core.exceptions import BudgetExhausted
from core.services import Estimates, ObjectiveFunction, RunTracker

logger = logging.getLogger(__name__)


def make_rng(rng=None, seed: Optional[int] = None) -> np.random.Generator:
    """Flux aléatoire de l'exécution (un Generator existant ou une graine)"""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(seed if rng is None else rng)


def sort_population(rows: np.ndarray, costs: np.ndarray):
    """Tri stable croissant par fitness"""
    order = np.argsort(costs, kind="stable")
    return rows[order], costs[order]


def execute(
    method: str,
    search: Callable[[RunTracker, object], None],
    objective: ObjectiveFunction,
    options,
    rng=None,
) -> Estimates:
    """
    Lance `search` sur une fonction objectif remise à zéro

    Args:
        method: Clé de la méthode (journalisation et Estimates)
        search: Boucle de l'algorithme; elle rend la main dès que
            `tracker.should_stop()` est vrai
        objective: Fonction objectif
        options: Options déjà validées
        rng: Generator ou graine

    Returns:
        Les Estimates de l'exécution, y compris quand le budget
        d'évaluations l'a interrompue
    """
    objective.reset()
    tracker = RunTracker(objective, make_rng(rng), method, options.as_dict())
    logger.info(
        "Début %s (dimension %d, tolérance %g)",
        method,
        objective.space.dimension,
        objective.tolerance,
    )
    try:
        search(tracker, options)
    except BudgetExhausted:
        pass
    estimates = tracker.estimates()
    logger.info(
        "Fin %s: %d évaluations, meilleure fitness %g, convergé=%s",
        method,
        estimates.stats.total_evals,
        estimates.best.fitness,
        estimates.stats.converged,
    )
    return estimates
