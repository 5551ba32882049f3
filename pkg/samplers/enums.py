from django.db import models


class MoveKind(models.TextChoices):
    LOCAL = "local", "Local random-walk move"
    INTERACTION = "interaction", "Draw from the hotter level's history"
