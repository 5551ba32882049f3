"""
Distances between measures and kernels.

Total variation follows the sup over |f| <= 1 convention: on a discrete
space it is the sum of absolute differences, so disjoint point masses are
at distance 2.
"""

import numpy as np
from django.core.exceptions import ValidationError

from .records import DiscreteKernelOracle
from .validators import validate_distribution, validate_same_length


def tv_distance_discrete(p, q) -> float:
    """sum_i |p_i - q_i|, in [0, 2]"""
    validate_same_length(p, q)
    p = validate_distribution(p, name="p")
    q = validate_distribution(q, name="q")
    return float(np.abs(p - q).sum())


def kernel_tv_sup(p1: DiscreteKernelOracle, p2: DiscreteKernelOracle) -> float:
    """max over rows x of the TV distance between P1(x, .) and P2(x, .)"""
    if p1.n_states != p2.n_states:
        raise ValidationError(
            f"Kernels act on {p1.n_states} and {p2.n_states} states."
        )
    return float(np.abs(p1.matrix - p2.matrix).sum(axis=1).max())


def dv_bound_am(gamma_1, gamma_2, kappa, d) -> float:
    """
    Upper bound 2 d / kappa * |Gamma_1 - Gamma_2| on the W^a-variation of
    two Adaptive Metropolis kernels, |.| being the Frobenius norm.
    """
    gamma_1 = np.atleast_2d(np.asarray(gamma_1, dtype=float))
    gamma_2 = np.atleast_2d(np.asarray(gamma_2, dtype=float))
    if gamma_1.shape != gamma_2.shape:
        raise ValidationError(f"Shapes differ: {gamma_1.shape} vs {gamma_2.shape}.")
    if not kappa > 0:
        raise ValidationError(f"kappa must be > 0, got {kappa!r}.")
    return 2.0 * d / kappa * float(np.linalg.norm(gamma_1 - gamma_2, "fro"))
