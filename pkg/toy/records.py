"""Two-state toy chain: kernel, adaptation schedule and laws on {0, 1}."""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from django.core.exceptions import ValidationError


def default_rule(n):
    """theta_n = n^(-1/4), defined for n >= 1"""
    return np.asarray(n, dtype=float) ** -0.25


@dataclass(frozen=True)
class ToyKernel:
    theta: float

    def __post_init__(self):
        if not 0 <= self.theta <= 1:
            raise ValidationError(f"theta must lie in [0, 1], got {self.theta!r}.")

    @property
    def matrix(self):
        return np.array(
            [[self.theta, 1 - self.theta], [1 - self.theta, self.theta]]
        )


@dataclass(frozen=True)
class ToySchedule:
    """Adaptation schedule n -> theta_n for n >= 1 (theta_0 is undefined)."""

    rule: Callable = default_rule
    name: str = "n^(-1/4)"

    @classmethod
    def constant(cls, theta):
        ToyKernel(theta)
        return cls(rule=lambda n: np.full(np.shape(n), float(theta)), name=f"{theta}")

    def theta(self, n):
        if n < 1:
            raise ValidationError(f"Schedule is indexed from n = 1, got {n}.")
        return float(self.rule(n))

    def thetas(self, n):
        """theta_1, ..., theta_n as an array"""
        index = np.arange(1, n + 1)
        return np.broadcast_to(np.asarray(self.rule(index), dtype=float), index.shape)


@dataclass(frozen=True)
class DistVec2:
    p0: float
    p1: float

    def __post_init__(self):
        if self.p0 < 0 or self.p1 < 0 or abs(self.p0 + self.p1 - 1) > 1e-14:
            raise ValidationError(
                f"({self.p0!r}, {self.p1!r}) is not a probability pair."
            )

    @classmethod
    def point_mass(cls, state):
        return cls(1.0, 0.0) if state == 0 else cls(0.0, 1.0)

    def as_array(self):
        return np.array([self.p0, self.p1])


UNIFORM = DistVec2(0.5, 0.5)
