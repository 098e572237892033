from django.apps import AppConfig


class TimeIntegralConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "time_integral"
