"""Result records of the numerical checks."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from django.core.exceptions import ValidationError

from .validators import validate_stochastic_matrix

MAX_ORACLE_STATES = 16


@dataclass(frozen=True, eq=False)
class DiscreteKernelOracle:
    """Row-stochastic matrix of a kernel on a small finite state space."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = validate_stochastic_matrix(self.matrix)
        if matrix.shape[0] > MAX_ORACLE_STATES:
            raise ValidationError(
                f"Oracles are limited to {MAX_ORACLE_STATES} states, "
                f"got {matrix.shape[0]}."
            )
        object.__setattr__(self, "matrix", matrix)

    @property
    def n_states(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class DriftEstimate:
    """
    Fitted drift pair for P W <= lambda W + b.

    ``lambda_hat`` and ``b_hat`` are None when no grid value of lambda
    gives an informative pair (``degenerate``).
    """

    lambda_hat: Optional[float]
    b_hat: Optional[float]
    test_points: list
    mc_reps: int
    degenerate: bool
    pw_mean: np.ndarray = field(repr=False)
    pw_upper: np.ndarray = field(repr=False)
    w_values: np.ndarray = field(repr=False)
    b_by_lambda: dict = field(default_factory=dict, repr=False)

    @property
    def feasible(self):
        return not self.degenerate

    def b_at(self, lam):
        """b for the grid value closest to ``lam``"""
        nearest = min(self.b_by_lambda, key=lambda grid_lam: abs(grid_lam - lam))
        return self.b_by_lambda[nearest]


@dataclass(frozen=True, eq=False)
class ErgodicReport:
    running_means: np.ndarray
    target_value: Optional[float]
    final_abs_error: Optional[float]
    n_effective: float
    mc_standard_error: float

    @property
    def final_mean(self):
        return float(self.running_means[-1])


@dataclass(frozen=True)
class CheckpointStatistic:
    n: int
    hist_tv: Optional[float]
    ks_statistic: float
    ks_pvalue: float
    ks_critical: float


@dataclass(frozen=True)
class NoiseFloor:
    hist_tv: Optional[float]
    ks_statistic: float


@dataclass(frozen=True)
class MarginalConvergenceReport:
    series: list
    noise_floor: Optional[NoiseFloor]
    decreasing_within_noise: bool

    @property
    def final(self):
        return self.series[-1]


@dataclass(frozen=True, eq=False)
class AdaptationSeriesReport:
    """Partial sums of an adaptation series and the share added by its tail half."""

    partial_sums: np.ndarray
    tail_ratio: float

    @property
    def total(self):
        return float(self.partial_sums[-1]) if self.partial_sums.size else 0.0
