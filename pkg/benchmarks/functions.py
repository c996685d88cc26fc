"""
Fonctions de test classiques, toutes de minimum 0
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from core.exceptions import DimensionMismatchError
from core.services import PlainFunction

registry: Dict[str, Callable[[np.ndarray], float]] = {}
optimum_locations: Dict[str, Callable[[int], np.ndarray]] = {}


def benchmark(name, optimum=np.zeros):
    def register(f):
        registry[name] = f
        optimum_locations[name] = optimum
        return f

    return register


@benchmark("rosenbrock", optimum=np.ones)
def rosenbrock(x: np.ndarray) -> float:
    return float(np.sum((1 - x[:-1]) ** 2 + 100 * (x[1:] - x[:-1] ** 2) ** 2))


@benchmark("cigar")
def cigar(x: np.ndarray) -> float:
    return float(x[0] ** 2 + 1e6 * np.sum(x[1:] ** 2))


@benchmark("schaffer")
def schaffer(x: np.ndarray) -> float:
    """Forme F7 sur les paires consécutives"""
    s = np.sqrt(x[:-1] ** 2 + x[1:] ** 2)
    terms = np.sqrt(s) + np.sqrt(s) * np.sin(50 * s**0.2) ** 2
    return float(np.mean(terms) ** 2)


@benchmark("schaffer_f6")
def schaffer_f6(x: np.ndarray) -> float:
    """Forme F6 généralisée (somme sur les paires consécutives)"""
    squares = x[:-1] ** 2 + x[1:] ** 2
    terms = 0.5 + (np.sin(np.sqrt(squares)) ** 2 - 0.5) / (1 + 0.001 * squares) ** 2
    return float(np.sum(terms))


@benchmark("griewank")
def griewank(x: np.ndarray) -> float:
    i = np.arange(1, len(x) + 1)
    return float(1 + np.sum(x**2) / 4000 - np.prod(np.cos(x / np.sqrt(i))))


@benchmark("bohachevsky")
def bohachevsky(x: np.ndarray) -> float:
    a, b = x[:-1], x[1:]
    return float(
        np.sum(
            a**2
            + 2 * b**2
            - 0.3 * np.cos(3 * np.pi * a)
            - 0.4 * np.cos(4 * np.pi * b)
            + 0.7
        )
    )


# Dimension minimale des fonctions définies sur des paires
MIN_DIMENSION = {"rosenbrock": 2, "schaffer": 2, "schaffer_f6": 2, "bohachevsky": 2}


@dataclass
class BenchmarkFunction:
    """
    Fonction de test nommée, de dimension fixée
    """

    name: str
    dimension: int
    known_optimum: float = 0.0
    optimum_location: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if self.name not in registry:
            raise KeyError(
                f"Fonction de test inconnue '{self.name}' "
                f"(valides: {', '.join(registry)})"
            )
        if self.dimension < MIN_DIMENSION.get(self.name, 1):
            raise DimensionMismatchError(
                f"{self.name} demande une dimension >= "
                f"{MIN_DIMENSION.get(self.name, 1)}"
            )
        if self.optimum_location is None:
            self.optimum_location = optimum_locations[self.name](self.dimension)

    def __call__(self, x) -> float:
        return eval_benchmark(self, x)

    def __str__(self):
        return f"{self.name}-{self.dimension}D"


def eval_benchmark(f: BenchmarkFunction, x) -> float:
    """
    Raises:
        DimensionMismatchError: si len(x) != f.dimension
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (f.dimension,):
        raise DimensionMismatchError(
            f"{f.name} attend un vecteur de longueur {f.dimension}, reçu {x.shape}"
        )
    return registry[f.name](x)


def make_benchmark_objective(
    name: str,
    dimension: int,
    lower: float = -100.0,
    upper: float = 100.0,
    tolerance: Optional[float] = None,
    **kwargs,
) -> PlainFunction:
    """Fonction objectif prête à l'emploi, paramètres x1..xd sur [lower, upper]"""
    function = BenchmarkFunction(name, dimension)
    objective = PlainFunction(function, tolerance=tolerance, **kwargs)
    for i in range(1, dimension + 1):
        objective.parameter(f"x{i}", lower, upper)
    return objective
