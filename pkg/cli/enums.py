from django.db import models


class Command(models.TextChoices):
    RUN_AM = "run-am", "Adaptive Metropolis chain"
    RUN_IT = "run-it", "Interacting tempering ladder"
    TOY = "toy", "Two-state toy chain"
    DIAGNOSE = "diagnose", "Numerical checks"


class ExitCode(models.IntegerChoices):
    SUCCESS = 0, "Success"
    CONFIG_ERROR = 2, "Configuration error"
    RUNTIME_ERROR = 3, "Runtime or numerical error"


class Stage(models.TextChoices):
    SETUP = "setup", "Building targets and seeds"
    SAMPLING = "sampling", "Running chains and checks"
    WRITING = "writing", "Writing output files"
