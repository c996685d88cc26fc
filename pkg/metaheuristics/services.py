"""
Point d'entrée unique des méthodes d'estimation de paramètres
"""

import logging
from typing import Optional

from core.exceptions import (
    DimensionMismatchError,
    OptionsMismatchError,
    UnknownMethodError,
)
from core.services import Estimates, ObjectiveFunction

from .acor import acor
from .ees1 import ees1
from .ees2 import ees2
from .options import OptionsACOR, OptionsEES1, OptionsEES2, OptionsPSO, OptionsSAA
from .pso import pso
from .saa import saa

logger = logging.getLogger(__name__)

METHODS = {
    "pso": (pso, OptionsPSO),
    "saa": (saa, OptionsSAA),
    "acor": (acor, OptionsACOR),
    "ees1": (ees1, OptionsEES1),
    "ees2": (ees2, OptionsEES2),
}


def get_options_class(method: str):
    """
    Raises:
        UnknownMethodError: si la clé n'est pas l'une des cinq méthodes
    """
    try:
        return METHODS[method][1]
    except KeyError:
        raise UnknownMethodError(
            f"Méthode inconnue '{method}' (valides: {', '.join(METHODS)})"
        ) from None


def default_options(method: str):
    return get_options_class(method)()


def extremize(
    method: str,
    objective: ObjectiveFunction,
    options=None,
    seed: Optional[int] = None,
    rng=None,
) -> Estimates:
    """
    Minimise la fonction objectif avec la méthode demandée

    Args:
        method: "pso", "saa", "acor", "ees1" ou "ees2"
        objective: Fonction objectif avec au moins un paramètre
        options: Options de la méthode (valeurs par défaut si absent)
        seed: Graine du flux aléatoire (ignorée si rng est fourni)
        rng: Generator numpy déjà construit

    Returns:
        Estimates de l'exécution

    Raises:
        UnknownMethodError: clé de méthode inconnue
        OptionsMismatchError: options d'une autre méthode
        DimensionMismatchError: fonction objectif sans paramètre
    """
    options_class = get_options_class(method)
    if options is None:
        options = options_class()
    elif not isinstance(options, options_class):
        raise OptionsMismatchError(
            f"La méthode '{method}' attend {options_class.__name__}, "
            f"reçu {type(options).__name__}"
        )
    if objective.space.dimension < 1:
        raise DimensionMismatchError(
            "La fonction objectif doit avoir au moins un paramètre"
        )
    algorithm = METHODS[method][0]
    logger.debug("extremize %s avec %s", method, options)
    return algorithm(objective, options, rng=seed if rng is None else rng)
