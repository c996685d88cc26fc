"""
Écriture des résultats d'une exécution : CSV des points visités,
statistiques JSON et surfaces de l'espace des solutions
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from mongoengine.connection import ConnectionFailure
from pymongo.errors import PyMongoError

from core.conf import metaestim_setting
from core.models import OptimizationRun
from core.parameters import ParameterSpace
from core.services import Estimates

logger = logging.getLogger(__name__)

BEST_FILE = "best.csv"
ITERATION_BESTS_FILE = "iteration_bests.csv"
VISITED_SPACE_FILE = "visited_space.csv"
STATS_FILE = "stats.json"


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def candidates_frame(candidates, names: List[str]) -> pd.DataFrame:
    """Colonnes : noms des paramètres, pset, iteration, fitness"""
    columns = list(names) + ["pset", "iteration", "fitness"]
    return pd.DataFrame([c.as_row(names) for c in candidates], columns=columns)


def write_best(estimates: Estimates, path) -> Path:
    names = estimates.parameter_names
    frame = candidates_frame([estimates.best], names)
    return _write_frame(frame[list(names) + ["pset", "fitness"]], Path(path))


def write_iteration_bests(estimates: Estimates, path) -> Path:
    """Une ligne par itération terminée; `iteration` est l'indice de l'itération"""
    frame = candidates_frame(estimates.iteration_bests, estimates.parameter_names)
    frame["iteration"] = range(len(frame))
    return _write_frame(frame, Path(path))


def write_visited_space(estimates: Estimates, path) -> Path:
    frame = candidates_frame(estimates.visited_space, estimates.parameter_names)
    return _write_frame(frame, Path(path))


def run_stats(
    estimates: Estimates, seed: Optional[int], reproducible: bool = False
) -> Dict:
    stats = estimates.stats
    return {
        "method": estimates.method,
        "parameter_names": list(estimates.parameter_names),
        "total_evals": stats.total_evals,
        "converged": stats.converged,
        "achieved_tolerance": stats.achieved_tolerance,
        "wall_time": 0.0 if reproducible else stats.wall_time,
        "failures": sum(1 for c in estimates.visited_space if c.failed),
        "seed": seed,
        "options": estimates.options,
    }


def write_stats(
    estimates: Estimates, path, seed: Optional[int], reproducible: bool = False
) -> Path:
    path = Path(path)
    path.write_text(
        json.dumps(run_stats(estimates, seed, reproducible), indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    return path


def write_run(
    estimates: Estimates,
    out_dir,
    seed: Optional[int],
    reproducible: Optional[bool] = None,
) -> List[Path]:
    """
    Écrit best.csv, iteration_bests.csv, visited_space.csv et stats.json

    Args:
        reproducible: wall_time forcé à 0 pour des fichiers identiques d'une
            exécution à l'autre (réglage REPRODUCIBLE par défaut)
    """
    if reproducible is None:
        reproducible = metaestim_setting("REPRODUCIBLE")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        write_best(estimates, out_dir / BEST_FILE),
        write_iteration_bests(estimates, out_dir / ITERATION_BESTS_FILE),
        write_visited_space(estimates, out_dir / VISITED_SPACE_FILE),
        write_stats(estimates, out_dir / STATS_FILE, seed, reproducible),
    ]


def surface_pairs(names: Sequence[str]) -> List[Tuple[str, str]]:
    """
    Couples de paramètres voisins, de façon cyclique :
    (x1, x2), (x2, x3), ..., (xd, x1); un seul couple en dimension 2
    """
    d = len(names)
    if d < 2:
        return []
    if d == 2:
        return [(names[0], names[1])]
    return [(names[i], names[(i + 1) % d]) for i in range(d)]


def _cells(values: np.ndarray, lower: float, upper: float, grid: int) -> np.ndarray:
    index = np.floor((values - lower) / (upper - lower) * grid).astype(int)
    return np.clip(index, 0, grid - 1)


def bin_surface(
    estimates: Estimates, space: ParameterSpace, first: str, second: str, grid: int
) -> pd.DataFrame:
    """
    Fitness minimale des points visités dans chaque case d'une grille
    grid x grid sur le couple (first, second)

    Returns:
        grid² lignes (centres des cases et fitness); fitness vide (NaN) pour
        les cases sans point visité
    """
    if grid < 1:
        raise ValueError("grid doit être >= 1")
    names = space.names
    i, j = names.index(first), names.index(second)
    a, b = space.get_parameter(first), space.get_parameter(second)

    visited = estimates.visited_space
    values = np.array([c.values for c in visited], dtype=float).reshape(-1, len(names))
    fitness = np.array([c.fitness for c in visited], dtype=float)
    cell_i = _cells(values[:, i], a.min, a.max, grid)
    cell_j = _cells(values[:, j], b.min, b.max, grid)
    minima = (
        pd.DataFrame({"i": cell_i, "j": cell_j, "fitness": fitness})
        .groupby(["i", "j"])["fitness"]
        .min()
    )

    centers_i = a.min + (np.arange(grid) + 0.5) * a.span / grid
    centers_j = b.min + (np.arange(grid) + 0.5) * b.span / grid
    index = pd.MultiIndex.from_product([range(grid), range(grid)], names=["i", "j"])
    surface = minima.reindex(index).reset_index()
    return pd.DataFrame(
        {
            first: centers_i[surface["i"].to_numpy()],
            second: centers_j[surface["j"].to_numpy()],
            "fitness": surface["fitness"].to_numpy(),
        }
    )


def write_surfaces(
    estimates: Estimates, space: ParameterSpace, grid: int, out_dir
) -> List[Path]:
    """Un fichier surface_<pi>_<pj>.csv par couple de surface_pairs"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for first, second in surface_pairs(space.names):
        frame = bin_surface(estimates, space, first, second, grid)
        paths.append(_write_frame(frame, out_dir / f"surface_{first}_{second}.csv"))
    return paths


def archive_run(
    estimates: Estimates, problem: str, seed: Optional[int]
) -> Optional[OptimizationRun]:
    """
    Archive l'exécution dans MongoDB

    Returns:
        Le document sauvegardé, ou None si la base est injoignable
    """
    run = OptimizationRun.from_estimates(estimates, problem=problem, seed=seed)
    try:
        run.save()
    except (ConnectionFailure, PyMongoError) as e:
        logger.warning("Archivage impossible: %s", e)
        return None
    return run
