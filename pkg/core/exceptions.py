"""
Exceptions communes à toutes les applications metaestim
"""


class MetaestimError(Exception):
    """Erreur de base du projet"""


class InvalidParameterError(MetaestimError, ValueError):
    """Paramètre invalide (nom dupliqué, bornes inversées ou dégénérées)"""


class DimensionMismatchError(MetaestimError, ValueError):
    """Longueur de vecteur incompatible avec l'espace ou la fonction"""


class InvalidMetricError(MetaestimError, ValueError):
    """Métrique impossible à calculer (normalisateur nul, séries vides)"""


class UnknownMethodError(MetaestimError, KeyError):
    """Clé de métaheuristique inconnue"""

    def __str__(self):
        # KeyError met le message entre guillemets
        return str(self.args[0]) if self.args else ""


class OptionsMismatchError(MetaestimError, TypeError):
    """Options ne correspondant pas à la méthode demandée"""


class InvalidOptionsError(MetaestimError, ValueError):
    """Options violant un invariant de l'algorithme"""


class EvaluationError(MetaestimError):
    """Échec d'une évaluation de la fonction objectif"""


class ModelExecutionError(EvaluationError):
    """Le modèle externe s'est terminé avec un code de sortie non nul"""


class ModelTimeoutError(EvaluationError):
    """Le modèle externe a dépassé son délai d'exécution"""


class ModelOutputError(EvaluationError):
    """Sortie du modèle externe (ou du correcteur) illisible"""


class BudgetExhausted(MetaestimError):
    """Le budget d'évaluations de la fonction objectif est épuisé"""


class ExternalModelError(MetaestimError, ValueError):
    """Description de modèle externe invalide, détectée avant tout lancement"""


class ProblemFileError(MetaestimError, ValueError):
    """Fichier de problème illisible ou invalide"""
