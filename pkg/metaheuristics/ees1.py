"""
Stratégie évolutionnaire 1 : centroïde géométrique des parents et
remplacement élitiste probabiliste
"""

import math
from typing import List

import numpy as np
from scipy.stats import gmean

from core.services import ObjectiveFunction, RunTracker
from sampling.services import lhs

from .base import execute, sort_population
from .options import OptionsEES1

# Probabilité de la branche pondérée par la fitness
WEIGHTED_BRANCH_PROBABILITY = 0.2
# Amplitude de la mutation, en fraction de l'étendue du paramètre
MUTATION_SCALE = 0.1


def ees1_selection_weight(mu: float, rank: int) -> float:
    """Probabilité de sélection du candidat de rang `rank` (base 1)"""
    if not 0 < mu <= 1 or rank < 1:
        raise ValueError("Il faut 0 < mu <= 1 et rank >= 1")
    return mu**rank


def select_mates(n: int, mu: float, count: int, rng: np.random.Generator) -> List[int]:
    """
    Parcourt la population triée en retenant chaque ligne avec la
    probabilité mu^rang. Tant que `count` parents n'ont pas été choisis,
    recommence depuis le haut parmi les lignes restantes, rangées de
    nouveau à partir de 1. Une ligne n'est retenue qu'une fois.

    Returns:
        Indices (base 0) des parents, dans l'ordre de sélection
    """
    if not 1 <= count <= n:
        raise ValueError("Il faut 1 <= count <= n")
    remaining = list(range(n))
    mates: List[int] = []
    while len(mates) < count:
        draws = rng.random(len(remaining))
        passed = []
        for rank, (index, u) in enumerate(zip(remaining, draws), start=1):
            if len(mates) < count and u < ees1_selection_weight(mu, rank):
                mates.append(index)
            else:
                passed.append(index)
        remaining = passed
    return mates


def signed_geometric_mean(values) -> float:
    """
    Moyenne géométrique des magnitudes, de même signe que les valeurs.
    Moyenne arithmétique quand les signes sont mélangés.
    """
    values = np.asarray(values, dtype=float)
    if np.all(values > 0):
        return float(gmean(values))
    if np.all(values < 0):
        return -float(gmean(-values))
    if np.all(values >= 0) or np.all(values <= 0):
        return 0.0
    return float(np.mean(values))


def centroid(mates: np.ndarray) -> np.ndarray:
    return np.array([signed_geometric_mean(column) for column in mates.T])


def recombine(
    x: np.ndarray, g: np.ndarray, weight: float = None, variant: str = "prose"
) -> np.ndarray:
    """
    Recombinaison d'un candidat avec le centroïde G

    Sans poids : (x + G)/2. Avec poids w : (x + (x + G)·w)/2, ou
    (x + x + G·w)/2 pour la variante "pseudocode".
    """
    if weight is None:
        return (x + g) / 2
    if variant == "pseudocode":
        return (x + x + g * weight) / 2
    return (x + (x + g) * weight) / 2


def fitness_weights(costs: np.ndarray) -> np.ndarray:
    total = float(np.sum(costs))
    if total == 0 or not math.isfinite(total):
        return np.full(len(costs), 1 / len(costs))
    return costs / total


def _search(tracker: RunTracker, options: OptionsEES1) -> None:
    space, rng = tracker.space, tracker.rng
    n = options.N
    mutation_span = MUTATION_SCALE * space.span

    rows = lhs(space, n, rng).rows
    population, costs = sort_population(rows, tracker.evaluate(rows))
    tracker.end_iteration()

    for _ in range(options.iterations):
        if tracker.should_stop():
            return
        mates = population[select_mates(n, options.mu, max(1, n // 2), rng)]
        g = centroid(mates)
        weights = fitness_weights(costs)

        offspring = np.empty_like(population)
        for k in range(n):
            if rng.random() < WEIGHTED_BRANCH_PROBABILITY:
                offspring[k] = recombine(
                    population[k], g, weights[k], options.recombination
                )
            else:
                offspring[k] = recombine(population[k], g)

        mutate = rng.random(offspring.shape) < options.rho
        noise = rng.uniform(-mutation_span, mutation_span, size=offspring.shape)
        offspring = space.clamp(np.where(mutate, offspring + noise, offspring))

        offspring_costs = tracker.evaluate(offspring)
        replace = offspring_costs < costs
        downhill = rng.random(n) < 1 - options.kappa
        downhill[0] = False
        replace |= downhill
        population = np.where(replace[:, None], offspring, population)
        costs = np.where(replace, offspring_costs, costs)
        population, costs = sort_population(population, costs)
        tracker.end_iteration()


def ees1(objective: ObjectiveFunction, options: OptionsEES1 = None, rng=None):
    """Stratégie évolutionnaire 1"""
    return execute("ees1", _search, objective, options or OptionsEES1(), rng)
