"""
Options des métaheuristiques, une dataclass par méthode
"""

from dataclasses import asdict, dataclass, fields, replace
from typing import Callable, Union

from core.exceptions import InvalidOptionsError

PSO_NEIGHBORHOODS = ("K2", "K4", "KN")
SAA_NEIGHBORHOODS = ("perturb-1", "perturb-half", "perturb-all")
SAA_COOLING = ("geometric", "fast")
EES1_RECOMBINATION = ("prose", "pseudocode")


def _coerce(value, current):
    """Convertit une valeur textuelle (fichier de problème) vers le type courant"""
    if not isinstance(value, str) or isinstance(current, str) or callable(current):
        return value
    if isinstance(current, bool):
        return value.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(value)
    return float(value)


class BaseOptions:
    """
    Comportement commun : validation, surcharge par clé et export
    """

    method = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        pass

    def _require(self, condition, message):
        if not condition:
            raise InvalidOptionsError(f"Options {self.method}: {message}")

    def with_overrides(self, **values) -> "BaseOptions":
        """
        Copie des options avec certaines valeurs remplacées

        Raises:
            InvalidOptionsError: clé inconnue, valeur non convertible ou
                invariant violé
        """
        known = {f.name for f in fields(self)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidOptionsError(
                f"Options {self.method} inconnues: {', '.join(unknown)} "
                f"(valides: {', '.join(sorted(known))})"
            )
        try:
            cast = {
                name: _coerce(value, getattr(self, name))
                for name, value in values.items()
            }
        except ValueError as e:
            raise InvalidOptionsError(f"Options {self.method}: {e}") from e
        return replace(self, **cast)

    def as_dict(self) -> dict:
        """Valeurs sérialisables (les fonctions sont remplacées par leur nom)"""
        return {
            name: getattr(value, "__name__", repr(value)) if callable(value) else value
            for name, value in asdict(self).items()
        }


@dataclass
class OptionsPSO(BaseOptions):
    iterations: int = 1000
    swarm_size: int = 16
    phi1: float = 2.05
    phi2: float = 2.05
    chi: float = 0.72984
    # K2, K4, KN ou une fonction (i, N) -> indices 1..N
    neighborhood: Union[str, Callable] = "KN"

    method = "pso"

    def validate(self):
        self._require(self.iterations >= 1, "iterations doit être >= 1")
        self._require(self.swarm_size >= 2, "swarm_size doit être >= 2")
        self._require(self.phi1 + self.phi2 > 4, "phi1 + phi2 doit être > 4")
        self._require(self.chi > 0, "chi doit être > 0")
        self._require(
            callable(self.neighborhood) or self.neighborhood in PSO_NEIGHBORHOODS,
            f"neighborhood doit être une fonction ou l'un de {PSO_NEIGHBORHOODS}",
        )


@dataclass
class OptionsSAA(BaseOptions):
    t0: float = 1.0
    t_min: float = 1e-4
    alpha: float = 0.9
    temperature_length: int = 10
    d: float = 0.5
    neighborhood: str = "perturb-1"
    # geometric, fast ou une fonction (T, k, options) -> T'
    cooling: Union[str, Callable] = "geometric"

    method = "saa"

    def validate(self):
        self._require(0 < self.alpha < 1, "alpha doit être dans ]0, 1[")
        self._require(0 < self.d <= 1, "d doit être dans ]0, 1]")
        self._require(0 < self.t_min < self.t0, "il faut 0 < t_min < t0")
        self._require(
            self.temperature_length >= 1, "temperature_length doit être >= 1"
        )
        self._require(
            self.neighborhood in SAA_NEIGHBORHOODS,
            f"neighborhood doit être l'un de {SAA_NEIGHBORHOODS}",
        )
        self._require(
            callable(self.cooling) or self.cooling in SAA_COOLING,
            f"cooling doit être une fonction ou l'un de {SAA_COOLING}",
        )


@dataclass
class OptionsACOR(BaseOptions):
    archive_size: int = 64
    ants: int = 64
    q: float = 0.2
    xi: float = 0.85
    iterations: int = 500

    method = "acor"

    def validate(self):
        self._require(self.archive_size >= 2, "archive_size doit être >= 2")
        self._require(self.ants >= 1, "ants doit être >= 1")
        self._require(self.q > 0, "q doit être > 0")
        self._require(self.xi > 0, "xi doit être > 0")
        self._require(self.iterations >= 1, "iterations doit être >= 1")


@dataclass
class OptionsEES1(BaseOptions):
    N: int = 10
    mu: float = 0.3
    rho: float = 0.01
    kappa: float = 0.2
    iterations: int = 50
    recombination: str = "prose"

    method = "ees1"

    def validate(self):
        self._require(self.N >= 2, "N doit être >= 2")
        self._require(0 < self.mu <= 1, "mu doit être dans ]0, 1]")
        self._require(0 <= self.rho <= 1, "rho doit être dans [0, 1]")
        self._require(0 <= self.kappa <= 1, "kappa doit être dans [0, 1]")
        self._require(self.iterations >= 1, "iterations doit être >= 1")
        self._require(
            self.recombination in EES1_RECOMBINATION,
            f"recombination doit être l'un de {EES1_RECOMBINATION}",
        )


@dataclass
class OptionsEES2(BaseOptions):
    N: int = 20
    rho: float = 0.25
    iterations: int = 30
    r: float = 0.5

    method = "ees2"

    def validate(self):
        self._require(self.N >= 1, "N doit être >= 1")
        self._require(
            1 <= int(self.N * self.rho) <= self.N, "il faut 1 <= trunc(N*rho) <= N"
        )
        self._require(self.iterations >= 1, "iterations doit être >= 1")
        self._require(self.r == 0.5, "r est fixé à 0.5")

    @property
    def k(self) -> int:
        return int(self.N * self.rho)
