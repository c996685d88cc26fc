from django.apps import AppConfig


class MetaheuristicsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "metaheuristics"
