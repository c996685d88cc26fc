"""
Django settings for the metaestim project.

Le projet n'expose aucune interface web : Django fournit la configuration,
les commandes de gestion (manage.py) et le lanceur de tests.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
from decouple import config
import mongoengine

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config(
    "SECRET_KEY",
    default="django-insecure-metaestim-local-only",
)

DEBUG = config("DEBUG", default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    # Local apps
    "core",
    "sampling",
    "metaheuristics",
    "benchmarks",
    "dynamics",
    "extmodel",
    "cli",
]

# MongoDB Configuration (archive optionnelle des exécutions)
MONGODB_URI = config("MONGODB_URI", default=None)
MONGODB_DB_NAME = config("MONGODB_DB_NAME", default="metaestim")

# Connect to MongoDB
if MONGODB_URI:
    mongoengine.connect(db=MONGODB_DB_NAME, host=MONGODB_URI, alias="default")

# Database configuration (SQLite, uniquement pour le lanceur de tests Django)
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

# Internationalization
LANGUAGE_CODE = "fr-fr"
TIME_ZONE = "UTC"
USE_I18N = True
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Paramètres de l'estimation
METAESTIM = {
    "DEFAULT_TOLERANCE": config("METAESTIM_TOLERANCE", default=0.1, cast=float),
    "JOBS": config("METAESTIM_JOBS", default=1, cast=int),
    "EXTERNAL_TIMEOUT": config(
        "METAESTIM_EXTERNAL_TIMEOUT", default=300.0, cast=float
    ),
    "REPRODUCIBLE": config("METAESTIM_REPRODUCIBLE", default=False, cast=bool),
    # Conditions initiales du modèle proie-prédateur (réglage de période)
    "PERIOD_TUNING": {
        "X0": config("METAESTIM_PP_X0", default=1.0, cast=float),
        "Y0": config("METAESTIM_PP_Y0", default=1.0, cast=float),
        "T_END": config("METAESTIM_PP_T_END", default=400.0, cast=float),
        "DT": config("METAESTIM_PP_DT", default=0.1, cast=float),
        # Pas de relevé de la sortie; la période est comptée en relevés
        "SAMPLE_STEP": config("METAESTIM_PP_SAMPLE_STEP", default=0.3, cast=float),
    },
}

# Logging Configuration
LOG_LEVEL = config("METAESTIM_LOG_LEVEL", default="INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "console": {
            "format": "%(asctime)s %(levelname)s [%(name)s] %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "console",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": LOG_LEVEL,
    },
}
