"""
Colonie de fourmis pour domaines continus (archive de solutions)
"""

import math
from dataclasses import dataclass

import numpy as np

from core.parameters import ParameterSpace
from core.services import ObjectiveFunction, RunTracker
from sampling.services import lhs

from .base import execute, sort_population
from .options import OptionsACOR


def acor_weights(k: int, q: float) -> np.ndarray:
    """
    Poids gaussiens des rangs 1..k, strictement décroissants

    Returns:
        w_l = exp(-(l-1)² / (2·q²·k²)) / (q·k·sqrt(2π))
    """
    if k < 1 or q <= 0:
        raise ValueError("Il faut k >= 1 et q > 0")
    ranks = np.arange(k)
    return np.exp(-(ranks**2) / (2 * q**2 * k**2)) / (q * k * math.sqrt(2 * math.pi))


@dataclass
class AcorArchive:
    """
    Archive triée des k meilleures solutions et de leurs poids
    """

    rows: np.ndarray
    fitness: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, rows, fitness, q: float) -> "AcorArchive":
        rows, fitness = sort_population(np.asarray(rows), np.asarray(fitness))
        return cls(rows, fitness, acor_weights(len(rows), q))

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    def merge(self, rows, fitness) -> None:
        """Garde les k meilleures solutions de l'archive et des nouvelles"""
        merged_rows, merged_fitness = sort_population(
            np.vstack([self.rows, rows]), np.concatenate([self.fitness, fitness])
        )
        self.rows = merged_rows[: self.size]
        self.fitness = merged_fitness[: self.size]


def acor_deviation(archive: AcorArchive, guide: int, xi: float) -> np.ndarray:
    """Écart-type par dimension autour de la ligne guide"""
    k = archive.size
    if k == 1:
        return np.zeros(archive.rows.shape[1])
    distances = np.abs(archive.rows - archive.rows[guide]).sum(axis=0)
    return xi * distances / (k - 1)


def acor_propose(
    archive: AcorArchive, space: ParameterSpace, xi: float, rng: np.random.Generator
) -> np.ndarray:
    """Tire une ligne guide selon les poids puis un point gaussien autour d'elle"""
    guide = rng.choice(archive.size, p=archive.probabilities)
    sd = acor_deviation(archive, guide, xi)
    return space.clamp(rng.normal(archive.rows[guide], sd))


def _search(tracker: RunTracker, options: OptionsACOR) -> None:
    space, rng = tracker.space, tracker.rng

    rows = lhs(space, options.archive_size, rng).rows
    archive = AcorArchive.build(rows, tracker.evaluate(rows), options.q)
    tracker.end_iteration()

    for _ in range(options.iterations):
        if tracker.should_stop():
            return
        ants = np.array(
            [acor_propose(archive, space, options.xi, rng) for _ in range(options.ants)]
        )
        archive.merge(ants, tracker.evaluate(ants))
        tracker.end_iteration()


def acor(objective: ObjectiveFunction, options: OptionsACOR = None, rng=None):
    """ACOR : k solutions archivées, m fourmis par itération"""
    return execute("acor", _search, objective, options or OptionsACOR(), rng)
