"""
Espace des paramètres : paramètres réels nommés et bornés
"""

from dataclasses import dataclass
from typing import Iterable, Iterator, List

import numpy as np

from .exceptions import DimensionMismatchError, InvalidParameterError


@dataclass(frozen=True)
class ParameterDef:
    """
    Paramètre réel nommé, borné par [min, max]
    """

    name: str
    min: float
    max: float

    def __post_init__(self):
        if not self.name or not str(self.name).strip():
            raise InvalidParameterError("Le nom du paramètre est obligatoire")
        if not np.isfinite(self.min) or not np.isfinite(self.max):
            raise InvalidParameterError(
                f"Bornes non finies pour le paramètre '{self.name}'"
            )
        if not self.min < self.max:
            raise InvalidParameterError(
                f"Bornes invalides pour '{self.name}': min ({self.min}) doit être "
                f"strictement inférieur à max ({self.max})"
            )

    @property
    def span(self):
        return self.max - self.min


class ParameterSpace:
    """
    Liste ordonnée de paramètres définissant le domaine de recherche.
    L'ordre d'ajout fixe l'ordre des composantes de tous les vecteurs.
    """

    def __init__(self, params: Iterable[ParameterDef] = ()):
        self._params: List[ParameterDef] = []
        for definition in params:
            self.add_parameter(definition)

    def add_parameter(self, definition: ParameterDef) -> "ParameterSpace":
        """
        Ajoute un paramètre à la fin de l'espace

        Args:
            definition: Paramètre à ajouter

        Returns:
            L'espace lui-même (chaînage)

        Raises:
            InvalidParameterError: si le nom existe déjà
        """
        if definition.name in self.names:
            raise InvalidParameterError(
                f"Le paramètre '{definition.name}' existe déjà"
            )
        self._params.append(definition)
        return self

    def get_parameter(self, name: str) -> ParameterDef:
        for definition in self._params:
            if definition.name == name:
                return definition
        raise InvalidParameterError(f"Paramètre inconnu: '{name}'")

    def get_parameter_names(self) -> List[str]:
        return self.names

    @property
    def names(self) -> List[str]:
        return [definition.name for definition in self._params]

    @property
    def dimension(self) -> int:
        return len(self._params)

    @property
    def lower(self) -> np.ndarray:
        return np.array([definition.min for definition in self._params], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([definition.max for definition in self._params], dtype=float)

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def clamp(self, values) -> np.ndarray:
        """
        Projette un vecteur (ou une matrice de vecteurs en lignes) dans la boîte

        Raises:
            DimensionMismatchError: si la longueur ne correspond pas à la dimension
        """
        array = np.asarray(values, dtype=float)
        if array.shape[-1:] != (self.dimension,):
            raise DimensionMismatchError(
                f"Vecteur de longueur {array.shape[-1] if array.ndim else 0} "
                f"pour un espace de dimension {self.dimension}"
            )
        return np.clip(array, self.lower, self.upper)

    def contains(self, values) -> bool:
        array = np.asarray(values, dtype=float)
        return bool(np.all(array >= self.lower) and np.all(array <= self.upper))

    def as_dict(self, values) -> dict:
        """Associe chaque composante du vecteur au nom de son paramètre"""
        return {name: float(value) for name, value in zip(self.names, values)}

    def __len__(self):
        return len(self._params)

    def __iter__(self) -> Iterator[ParameterDef]:
        return iter(self._params)

    def __str__(self):
        bounds = ", ".join(f"{p.name}∈[{p.min}, {p.max}]" for p in self._params)
        return f"ParameterSpace({bounds})"


def add_parameter(space: ParameterSpace, definition: ParameterDef) -> ParameterSpace:
    return space.add_parameter(definition)


def clamp(space: ParameterSpace, values) -> np.ndarray:
    return space.clamp(values)
