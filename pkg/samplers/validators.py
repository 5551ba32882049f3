import math

import numpy as np
from django.core.exceptions import ValidationError


def validate_open_unit_interval(value, field):
    """Probabilities such as the interaction rate live strictly inside (0, 1)"""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{field} must be a number, got {value!r}.")
    if not 0 < value < 1:
        raise ValidationError(
            f"{field} must lie in the open interval (0, 1), got {value!r}."
        )


def validate_temperatures(temperatures):
    """Ladder temperatures: first entry exactly 1, strictly ascending"""
    temps = list(temperatures)
    if not temps:
        raise ValidationError("temperatures must contain at least one level.")
    if any(not math.isfinite(t) for t in temps):
        raise ValidationError("temperatures must be finite.")
    if temps[0] != 1:
        raise ValidationError(
            f"temperatures must start at exactly 1, got {temps[0]!r}."
        )
    for previous, current in zip(temps, temps[1:]):
        if not current > previous:
            raise ValidationError(
                "temperatures must be strictly ascending: "
                f"{previous!r} is followed by {current!r}."
            )


def validate_positive(value, field):
    if not value > 0:
        raise ValidationError(f"{field} must be > 0, got {value!r}.")


def validate_steps(steps, burn_in=0):
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}.")
    if not 0 <= burn_in < steps:
        raise ValidationError(f"burn_in must lie in [0, steps), got {burn_in}.")


def validate_same_dimension(x, dim, field="point"):
    point = np.asarray(x, dtype=float)
    if point.shape != (dim,):
        raise ValidationError(f"{field} has shape {point.shape}, expected ({dim},).")
    return point
