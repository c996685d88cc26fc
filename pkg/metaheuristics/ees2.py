"""
Stratégie évolutionnaire 2 : rétrécissement itératif de la boîte
d'échantillonnage autour des k meilleurs points
"""

import math
from typing import Tuple

import numpy as np

from core.parameters import ParameterSpace
from core.services import ObjectiveFunction, RunTracker
from sampling.services import lhs, lhs_bounds

from .base import execute, sort_population
from .options import OptionsEES2

# Probabilité de l'élargissement additif
ADDITIVE_BRANCH_PROBABILITY = 0.2
# Borne supérieure du facteur multiplicatif
MULTIPLICATIVE_SUPPORT = 3.0


def ees2_midpoints(lowest: float, highest: float) -> Tuple[float, float]:
    """
    Centre m1 et demi-largeur m2 d'une dimension des k meilleurs points

    m1 est la moyenne géométrique signée de min et max, ou leur moyenne
    arithmétique quand min·max < 0; m2 = |min + max|/2.
    """
    product = lowest * highest
    if product < 0:
        m1 = (lowest + highest) / 2
    else:
        m1 = math.copysign(math.sqrt(product), lowest + highest)
    return m1, abs(lowest + highest) / 2


def ees2_range(
    best_rows: np.ndarray, space: ParameterSpace, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nouvelle boîte d'échantillonnage, intersectée avec les bornes d'origine

    Args:
        best_rows: Les k meilleurs points (lignes)
        space: Espace des paramètres
        rng: Flux aléatoire de l'exécution

    Returns:
        (bornes inférieures, bornes supérieures)
    """
    d = space.dimension
    lower, upper = np.empty(d), np.empty(d)
    for j in range(d):
        m1, m2 = ees2_midpoints(best_rows[:, j].min(), best_rows[:, j].max())
        if rng.random() < ADDITIVE_BRANCH_PROBABILITY:
            lower[j] = m1 - m2 - rng.random()
            upper[j] = m1 + m2 + rng.random()
        else:
            lower[j] = m1 - m2 * rng.uniform(0, MULTIPLICATIVE_SUPPORT)
            upper[j] = m1 + m2 * rng.uniform(0, MULTIPLICATIVE_SUPPORT)
    lower = np.clip(lower, space.lower, space.upper)
    upper = np.clip(upper, space.lower, space.upper)
    return lower, upper


def _search(tracker: RunTracker, options: OptionsEES2) -> None:
    space, rng = tracker.space, tracker.rng
    n, k = options.N, options.k

    rows = lhs(space, n, rng).rows
    population, costs = sort_population(rows, tracker.evaluate(rows))
    tracker.end_iteration()

    for _ in range(options.iterations):
        if tracker.should_stop():
            return
        lower, upper = ees2_range(population[:k], space, rng)
        fresh = lhs_bounds(lower, upper, n, rng)
        fresh_costs = tracker.evaluate(fresh)
        population, costs = sort_population(
            np.vstack([population, fresh]), np.concatenate([costs, fresh_costs])
        )
        population, costs = population[:n], costs[:n]
        tracker.end_iteration()


def ees2(objective: ObjectiveFunction, options: OptionsEES2 = None, rng=None):
    """Stratégie évolutionnaire 2 (cartographie à budget fixe)"""
    return execute("ees2", _search, objective, options or OptionsEES2(), rng)
