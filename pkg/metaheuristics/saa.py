"""
Recuit simulé à solution unique, voisinage à deux chemins
"""

import math

import numpy as np

from core.parameters import ParameterSpace
from core.services import ObjectiveFunction, RunTracker
from sampling.services import uniform_sample

from .base import execute
from .options import OptionsSAA

# Probabilité du chemin gaussien centré sur le milieu de l'intervalle
NORMAL_PATH_PROBABILITY = 0.2


def saa_neighborhood_size(mode: str, d: int) -> int:
    """Nombre de dimensions perturbées par proposition"""
    if d < 1:
        raise ValueError("La dimension doit être >= 1")
    sizes = {"perturb-1": 1, "perturb-half": max(1, d // 2), "perturb-all": d}
    try:
        return sizes[mode]
    except KeyError:
        raise ValueError(f"Voisinage inconnu: {mode}") from None


def perturb_normal(lower: float, upper: float, d: float, z: float) -> float:
    """Chemin 1 : d·(max - min)·Z + milieu"""
    return d * (upper - lower) * z + (lower + upper) / 2


def perturb_multiplicative(s: float, u: float) -> float:
    """Chemin 2 : s + s·U, avec U dans ]-1, 1["""
    return s + s * u


def saa_propose(
    current, space: ParameterSpace, d: float, which, rng: np.random.Generator
) -> np.ndarray:
    """
    Propose un voisin de `current` en perturbant les dimensions `which`

    Raises:
        ValueError: si `which` est vide ou si d n'est pas dans ]0, 1]
    """
    if len(which) == 0:
        raise ValueError("Au moins une dimension doit être perturbée")
    if not 0 < d <= 1:
        raise ValueError("d doit être dans ]0, 1]")
    proposal = np.array(current, dtype=float)
    lower, upper = space.lower, space.upper
    for j in which:
        if rng.random() < NORMAL_PATH_PROBABILITY:
            proposal[j] = perturb_normal(lower[j], upper[j], d, rng.standard_normal())
        else:
            proposal[j] = perturb_multiplicative(proposal[j], rng.uniform(-1, 1))
    return space.clamp(proposal)


def acceptance_probability(delta: float, temperature: float) -> float:
    """Critère de Metropolis"""
    if delta <= 0:
        return 1.0
    return math.exp(-delta / temperature)


def saa_accept(delta: float, temperature: float, rng: np.random.Generator) -> bool:
    return rng.random() < acceptance_probability(delta, temperature)


def cool(temperature: float, step: int, options: OptionsSAA) -> float:
    """
    Température suivante après `step` paliers (step >= 1)
    """
    if callable(options.cooling):
        return options.cooling(temperature, step, options)
    if options.cooling == "fast":
        return options.t0 / (1 + step)
    return options.alpha * temperature


def _search(tracker: RunTracker, options: OptionsSAA) -> None:
    space, rng = tracker.space, tracker.rng
    size = saa_neighborhood_size(options.neighborhood, space.dimension)

    current = uniform_sample(space, 1, rng).rows[0]
    current_cost = tracker.evaluate([current])[0]
    tracker.end_iteration()

    temperature, step = options.t0, 0
    while temperature >= options.t_min:
        for _ in range(options.temperature_length):
            if tracker.should_stop():
                return
            which = rng.choice(space.dimension, size=size, replace=False)
            proposal = saa_propose(current, space, options.d, which, rng)
            cost = tracker.evaluate([proposal])[0]
            if saa_accept(float(cost) - float(current_cost), temperature, rng):
                current, current_cost = proposal, cost
        tracker.end_iteration()
        step += 1
        temperature = cool(temperature, step, options)


def saa(objective: ObjectiveFunction, options: OptionsSAA = None, rng=None):
    """Recuit simulé, T <- alpha·T par défaut"""
    return execute("saa", _search, objective, options or OptionsSAA(), rng)
