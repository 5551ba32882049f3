from django.apps import AppConfig


class ToyConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "toy"
