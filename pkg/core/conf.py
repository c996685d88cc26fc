"""
Accès aux réglages METAESTIM avec repli sur des valeurs par défaut
lorsque Django n'est pas configuré (usage comme simple bibliothèque).
"""

from django.conf import settings

DEFAULTS = {
    "DEFAULT_TOLERANCE": 0.1,
    "JOBS": 1,
    "EXTERNAL_TIMEOUT": 300.0,
    "REPRODUCIBLE": False,
    "PERIOD_TUNING": {
        "X0": 1.0,
        "Y0": 1.0,
        "T_END": 400.0,
        "DT": 0.1,
        "SAMPLE_STEP": 0.3,
    },
}


def metaestim_setting(name):
    """Retourne le réglage METAESTIM `name`"""
    user_settings = getattr(settings, "METAESTIM", {}) if settings.configured else {}
    return user_settings.get(name, DEFAULTS[name])
