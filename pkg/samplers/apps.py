from django.apps import AppConfig


class SamplersConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "samplers"
