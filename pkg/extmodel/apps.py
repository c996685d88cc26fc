from django.apps import AppConfig


class ExtmodelConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "extmodel"
