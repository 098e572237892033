from django.apps import AppConfig


class NpConstantsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "np_constants"
