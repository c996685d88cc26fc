"""
Modèle proie-prédateur, détection de période et métriques de distance
utilisées pour construire les fonctions de coût
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np
import pandas as pd
from scipy.signal import argrelmax

from core.conf import metaestim_setting
from core.exceptions import DimensionMismatchError, InvalidMetricError
from core.services import PENALTY_VALUE, PlainFunction

logger = logging.getLogger(__name__)

TIME_COLUMN = "t"


@dataclass
class TimeSeries:
    """
    Série temporelle : un vecteur de temps et des canaux nommés de même longueur
    """

    t: np.ndarray
    channels: Dict[str, np.ndarray] = field(default_factory=dict)
    truncated: bool = False

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.channels = {
            name: np.asarray(values, dtype=float)
            for name, values in self.channels.items()
        }
        for name, values in self.channels.items():
            if len(values) != len(self.t):
                raise DimensionMismatchError(
                    f"Le canal '{name}' a {len(values)} valeurs "
                    f"pour {len(self.t)} temps"
                )
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("Les temps doivent être strictement croissants")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def __len__(self):
        return len(self.t)

    @property
    def names(self):
        return list(self.channels)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({TIME_COLUMN: self.t, **self.channels})

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, lineterminator="\n")

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "TimeSeries":
        """
        Colonne `t` comme temps; à défaut, l'indice de ligne
        """
        if TIME_COLUMN in frame.columns:
            t = frame[TIME_COLUMN].to_numpy(dtype=float)
            channels = frame.drop(columns=[TIME_COLUMN])
        else:
            t = np.arange(len(frame), dtype=float)
            channels = frame
        return cls(
            t, {str(name): channels[name].to_numpy(dtype=float) for name in channels}
        )

    @classmethod
    def read_csv(cls, source) -> "TimeSeries":
        frame = pd.read_csv(source, float_precision="round_trip")
        return cls.from_frame(frame)


@dataclass(frozen=True)
class PPParams:
    """
    c1 : croissance des proies; c2 : mortalité des prédateurs;
    c3 : taux de prédation; c4 : effet de la prédation sur les prédateurs
    """

    c1: float
    c2: float
    c3: float
    c4: float


def integrate_predator_prey(
    p: PPParams, x0: float, y0: float, t_end: float, dt: float
) -> TimeSeries:
    """
    Runge-Kutta d'ordre 4 à pas fixe de
    dx/dt = c1·x - c3·x·y; dy/dt = -c2·y + c4·x·y

    Returns:
        Canaux x et y sur [0, t_end]. Si l'état devient non fini, la série
        est coupée au dernier état fini et marquée `truncated`.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt et t_end doivent être > 0")
    c1, c2, c3, c4 = float(p.c1), float(p.c2), float(p.c3), float(p.c4)

    def rates(x, y):
        return c1 * x - c3 * x * y, -c2 * y + c4 * x * y

    steps = int(round(t_end / dt))
    xs, ys = [float(x0)], [float(y0)]
    x, y = xs[0], ys[0]
    truncated = False
    for _ in range(steps):
        k1x, k1y = rates(x, y)
        k2x, k2y = rates(x + dt / 2 * k1x, y + dt / 2 * k1y)
        k3x, k3y = rates(x + dt / 2 * k2x, y + dt / 2 * k2y)
        k4x, k4y = rates(x + dt * k3x, y + dt * k3y)
        x = x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        y = y + dt / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        if not (math.isfinite(x) and math.isfinite(y)):
            truncated = True
            logger.debug(
                "Intégration interrompue à t=%g (état non fini)", len(xs) * dt
            )
            break
        xs.append(x)
        ys.append(y)

    t = np.arange(len(xs)) * dt
    return TimeSeries(t, {"x": xs, "y": ys}, truncated=truncated)


def naiveperiod(series, t) -> Optional[float]:
    """
    Période moyenne entre maxima locaux stricts consécutifs

    Returns:
        La période en unités de temps, ou None si moins de deux maxima
    """
    series = np.asarray(series, dtype=float)
    t = np.asarray(t, dtype=float)
    if len(series) < 3 or len(series) != len(t):
        raise ValueError("Il faut au moins 3 échantillons, autant que de temps")
    peaks = argrelmax(series)[0]
    if len(peaks) < 2:
        return None
    return float(np.mean(np.diff(t[peaks])))


def _pair(a, b):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if len(a) != len(b):
        raise DimensionMismatchError(f"Longueurs différentes: {len(a)} et {len(b)}")
    if len(a) == 0:
        raise InvalidMetricError("Séries vides")
    return a, b


def rmsd(a, b) -> float:
    """Écart quadratique moyen"""
    a, b = _pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def nrmsd(a, b) -> float:
    """
    RMSD normalisé par l'étendue de la référence b, ou par |b| pour un scalaire

    Raises:
        InvalidMetricError: si le normalisateur est nul
    """
    a, b = _pair(a, b)
    normalizer = abs(b[0]) if len(b) == 1 else float(np.max(b) - np.min(b))
    if normalizer == 0:
        raise InvalidMetricError("Normalisateur nul pour le NRMSD")
    return rmsd(a, b) / normalizer


def dtw_distance(a, b) -> float:
    """
    Distance de déformation temporelle dynamique (coût local |a_i - b_j|,
    pas symétriques, sans fenêtre ni normalisation)
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise InvalidMetricError("Séries vides")
    r, c = len(a), len(b)
    accumulated = np.full((r + 1, c + 1), np.inf)
    accumulated[0, 0] = 0.0
    cost = np.abs(a[:, None] - b[None, :])
    for i in range(1, r + 1):
        for j in range(1, c + 1):
            accumulated[i, j] = cost[i - 1, j - 1] + min(
                accumulated[i - 1, j - 1], accumulated[i - 1, j], accumulated[i, j - 1]
            )
    return float(accumulated[r, c])


def predator_prey_period(
    p: PPParams,
    target: float,
    x0: Optional[float] = None,
    y0: Optional[float] = None,
    t_end: Optional[float] = None,
    dt: Optional[float] = None,
    sample_step: Optional[float] = None,
) -> Optional[float]:
    """
    Période du canal y, comptée en échantillons de la sortie du modèle

    La trajectoire est intégrée au pas `dt` puis relevée tous les
    `sample_step` (en temps du modèle, multiple de dt). Les valeurs
    négatives de y sont remplacées par la valeur de pénalité avant la
    détection de période.

    Returns:
        La période en nombre d'échantillons, ou None si aucune période
        n'est détectée ou si l'intégration diverge
    """
    defaults = metaestim_setting("PERIOD_TUNING")
    x0 = defaults["X0"] if x0 is None else x0
    y0 = defaults["Y0"] if y0 is None else y0
    dt = defaults["DT"] if dt is None else dt
    sample_step = defaults["SAMPLE_STEP"] if sample_step is None else sample_step
    if sample_step < dt:
        raise ValueError("sample_step doit être >= dt")
    if t_end is None:
        t_end = max(defaults["T_END"], 4 * target * sample_step)

    series = integrate_predator_prey(p, x0, y0, t_end, dt)
    if series.truncated:
        return None
    every = int(round(sample_step / dt))
    y = series["y"][::every]
    if len(y) < 3:
        return None
    y = np.where(y < 0, PENALTY_VALUE, y)
    return naiveperiod(y, np.arange(len(y)))


def period_tuning_cost(p: PPParams, target: float, **kwargs) -> float:
    """
    NRMSD entre la période du canal y (en échantillons, voir
    `predator_prey_period`) et la période cible. Sans période détectée, ou
    si l'intégration diverge, le coût est la valeur de pénalité.
    """
    if target <= 0:
        raise ValueError("La période cible doit être > 0")
    period = predator_prey_period(p, target, **kwargs)
    if period is None:
        return PENALTY_VALUE
    return nrmsd(period, target)


def make_period_tuning_objective(
    target: float, lower: float = 0.2, upper: float = 2.0, **kwargs
) -> PlainFunction:
    """Fonction objectif x1..x4 -> period_tuning_cost"""

    def cost(x1, x2, x3, x4):
        return period_tuning_cost(PPParams(x1, x2, x3, x4), target)

    objective = PlainFunction(cost, keyword=True, **kwargs)
    for name in ("x1", "x2", "x3", "x4"):
        objective.parameter(name, lower, upper)
    return objective


def doubling_time_cost(g: float, lower: float, upper: float, center: float) -> float:
    """Coût hybride : 0 dans la bande [lower, upper], sinon RMSD de g et center"""
    if not lower < center < upper:
        raise ValueError("Il faut lower < center < upper")
    if lower <= g <= upper:
        return 0.0
    return rmsd(g, center)


def categorical_cost(value: float, lower: float, upper: float) -> float:
    """Coût catégoriel : 0 dans l'intervalle, sinon distance à la borne proche"""
    if lower > upper:
        raise ValueError("Il faut lower <= upper")
    if value < lower:
        return lower - value
    if value > upper:
        return value - upper
    return 0.0


def scalarize_criteria(criteria: Iterable[float]) -> float:
    """Somme non pondérée des critères"""
    return float(np.sum(np.asarray(list(criteria), dtype=float)))
