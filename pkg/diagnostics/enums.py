from django.db import models


class DiagnosticCheck(models.TextChoices):
    PI_INVARIANCE = "pi-invariance", "Brute-force stationarity of the IT kernel"
    TOY_DISTANCE = "toy-distance", "Toy adaptation distance against kernel TV"
    ADAPTATION_BOUND = "adaptation-bound", "Empirical-measure adaptation bound"
    DRIFT = "drift", "Drift constants of the SRWM kernel"
    TOY_MARGINAL = "toy-marginal", "Toy marginal convergence against the exact law"


class ReferenceKind(models.TextChoices):
    CONTINUOUS = "continuous", "Continuous law with cdf and ppf"
    DISCRETE = "discrete", "Probability vector on integer states"
    SAMPLER = "sampler", "Exact sampler, KS-only"
