from django.db import models


class ToyState(models.IntegerChoices):
    ZERO = 0, "State 0"
    ONE = 1, "State 1"
