"""
Génération des populations initiales : hypercube latin et tirage uniforme
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from core.parameters import ParameterSpace


@dataclass
class SampleMatrix:
    """
    N candidats (lignes) × d paramètres (colonnes), tous dans les bornes
    """

    rows: np.ndarray
    space: ParameterSpace

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, index):
        return self.rows[index]


def _check_size(n: int) -> None:
    if n < 1:
        raise ValueError(f"La taille d'échantillon doit être >= 1 (reçu {n})")


def lhs_bounds(lower, upper, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Hypercube latin sur une boîte [lower, upper], qui peut être dégénérée
    sur certaines dimensions (lower == upper)

    Args:
        lower: Bornes inférieures
        upper: Bornes supérieures
        n: Nombre de points
        rng: Flux aléatoire de l'exécution

    Returns:
        Matrice n × d, un point par strate et par dimension
    """
    _check_size(n)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    engine = qmc.LatinHypercube(d=len(lower), scramble=True, seed=rng)
    unit = engine.random(n)
    # qmc.scale refuse les dimensions dégénérées
    return np.clip(lower + unit * (upper - lower), lower, upper)


def lhs(space: ParameterSpace, n: int, rng: np.random.Generator) -> SampleMatrix:
    """Hypercube latin : exactement un point par strate de chaque dimension"""
    return SampleMatrix(lhs_bounds(space.lower, space.upper, n, rng), space)


def uniform_sample(
    space: ParameterSpace, n: int, rng: np.random.Generator
) -> SampleMatrix:
    """n points i.i.d. uniformes dans la boîte"""
    _check_size(n)
    rows = rng.uniform(space.lower, space.upper, size=(n, space.dimension))
    return SampleMatrix(rows, space)
