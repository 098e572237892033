from django.apps import AppConfig


class InitialDataConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "initial_data"
