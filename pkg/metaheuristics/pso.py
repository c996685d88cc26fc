"""
Essaim particulaire (forme à coefficient de constriction)
"""

import math
from typing import Callable, Dict, List

import numpy as np

from core.parameters import ParameterSpace
from core.services import ObjectiveFunction, RunTracker
from sampling.services import uniform_sample

from .base import execute
from .options import OptionsPSO

neighborhoods: Dict[str, Callable[[int, int], List[int]]] = {}


def neighborhood(key):
    def register(f):
        neighborhoods[key] = f
        return f

    return register


def _check_index(i: int, n: int) -> None:
    if not 1 <= i <= n:
        raise IndexError(f"Indice de particule {i} hors de [1, {n}]")


def _distinct(indices, own=None) -> List[int]:
    seen = []
    for index in indices:
        if index != own and index not in seen:
            seen.append(index)
    return seen


@neighborhood("K2")
def pso_neighborhood_k2(i: int, n: int) -> List[int]:
    """Anneau : voisins gauche et droite"""
    _check_index(i, n)
    return _distinct([(i - 2) % n + 1, i % n + 1], own=i if n > 1 else None)


@neighborhood("K4")
def pso_neighborhood_k4(i: int, n: int) -> List[int]:
    """
    Voisinage de von Neumann : indices 1..N rangés par colonnes dans une
    grille de ceil(sqrt(N)) lignes, torique. Les cases au-delà de N (dernière
    colonne incomplète) sont sautées en poursuivant dans la même direction.

    Returns:
        Voisins haut, bas, gauche, droite sans doublons ni la particule elle-même
    """
    _check_index(i, n)
    rows = math.ceil(math.sqrt(n))
    cols = math.ceil(n / rows)
    row, col = (i - 1) % rows, (i - 1) // rows

    def walk(d_row, d_col):
        r, c = row, col
        while True:
            r, c = (r + d_row) % rows, (c + d_col) % cols
            index = c * rows + r + 1
            if index <= n:
                return index

    return _distinct([walk(-1, 0), walk(1, 0), walk(0, -1), walk(0, 1)], own=i)


@neighborhood("KN")
def pso_neighborhood_kn(i: int, n: int) -> List[int]:
    """Graphe complet"""
    _check_index(i, n)
    return list(range(1, n + 1))


def _neighbor_table(options: OptionsPSO) -> List[np.ndarray]:
    """Indices (base 0) des voisins de chaque particule, elle-même incluse"""
    rule = options.neighborhood
    if not callable(rule):
        rule = neighborhoods[rule]
    n = options.swarm_size
    table = []
    for i in range(1, n + 1):
        members = [j for j in rule(i, n) if 1 <= j <= n]
        table.append(np.array(sorted(set(members) | {i})) - 1)
    return table


def pso_step(x, v, pbest, nbest, space: ParameterSpace, options: OptionsPSO, rng):
    """
    Un pas de l'essaim, toutes particules à la fois

    Returns:
        (positions projetées dans la boîte, vitesses)
    """
    u1 = rng.random(x.shape)
    u2 = rng.random(x.shape)
    v = options.chi * (
        v + options.phi1 * u1 * (pbest - x) + options.phi2 * u2 * (nbest - x)
    )
    moved = x + v
    x = space.clamp(moved)
    # vitesse annulée sur les composantes projetées
    v = np.where(moved != x, 0.0, v)
    return x, v


def _search(tracker: RunTracker, options: OptionsPSO) -> None:
    space, rng = tracker.space, tracker.rng
    n, d = options.swarm_size, space.dimension

    x = uniform_sample(space, n, rng).rows
    v = (rng.uniform(space.lower, space.upper, size=(n, d)) - x) / 2
    costs = tracker.evaluate(x)
    pbest, pbest_cost = x.copy(), costs.copy()
    tracker.end_iteration()
    table = _neighbor_table(options)

    for _ in range(options.iterations):
        if tracker.should_stop():
            return
        leaders = np.array(
            [members[np.argmin(pbest_cost[members])] for members in table]
        )
        x, v = pso_step(x, v, pbest, pbest[leaders], space, options, rng)

        costs = tracker.evaluate(x)
        improved = costs < pbest_cost
        pbest[improved] = x[improved]
        pbest_cost[improved] = costs[improved]
        tracker.end_iteration()


def pso(objective: ObjectiveFunction, options: OptionsPSO = None, rng=None):
    """
    Essaim particulaire avec constriction :
    v <- chi·(v + phi1·U1·(pbest - x) + phi2·U2·(nbest - x)), x <- clamp(x + v)
    """
    return execute("pso", _search, objective, options or OptionsPSO(), rng)
