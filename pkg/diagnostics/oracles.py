"""
Exact interacting-tempering kernels on small finite state spaces.

P_theta = (1 - upsilon) P + upsilon K_theta with
K_theta(x, y) = alpha(x, y) theta(y) for y != x,
K_theta(x, x) = theta(x) + sum_y (1 - alpha(x, y)) theta(y),
alpha(x, y) = 1 ^ (pi(y) / pi(x))^beta.
"""

import numpy as np
from django.core.exceptions import ValidationError

from .records import DiscreteKernelOracle
from .validators import validate_distribution, validate_stochastic_matrix


def tempered_distribution(pi, temperature):
    """theta* proportional to pi^(1/T)"""
    pi = validate_distribution(pi, name="pi")
    if not temperature >= 1:
        raise ValidationError(f"temperature must be >= 1, got {temperature!r}.")
    weights = pi ** (1 / temperature)
    return weights / weights.sum()


def discrete_metropolis_kernel(pi):
    """Metropolis kernel with a uniform proposal on the other states; pi-reversible"""
    pi = validate_distribution(pi, name="pi")
    n_states = pi.size
    if n_states < 2:
        raise ValidationError("A Metropolis kernel needs at least two states.")
    if np.any(pi <= 0):
        raise ValidationError("pi must be strictly positive.")
    ratio = np.minimum(1.0, pi[None, :] / pi[:, None])
    matrix = ratio / (n_states - 1)
    np.fill_diagonal(matrix, 0.0)
    np.fill_diagonal(matrix, 1.0 - matrix.sum(axis=1))
    return DiscreteKernelOracle(matrix)


def acceptance_matrix(pi, beta):
    """alpha(x, y) for every pair, computed as exp(min(0, beta * delta log pi))"""
    log_pi = np.log(pi)
    return np.exp(np.minimum(0.0, beta * (log_pi[None, :] - log_pi[:, None])))


def brute_force_it_kernel(pi, theta, p_local, upsilon, beta) -> DiscreteKernelOracle:
    """
    Exact one-step matrix of the interacting tempering kernel

    Args:
        pi: Target law on the finite space (strictly positive)
        theta: Law the interaction proposals are drawn from
        p_local: Row-stochastic local kernel (matrix or DiscreteKernelOracle)
        upsilon: Interaction probability in [0, 1]
        beta: Acceptance exponent

    Returns:
        DiscreteKernelOracle of (1 - upsilon) P + upsilon K_theta
    """
    pi = validate_distribution(pi, name="pi")
    theta = validate_distribution(theta, name="theta")
    local = getattr(p_local, "matrix", p_local)
    local = validate_stochastic_matrix(local)
    if not pi.size == theta.size == local.shape[0]:
        raise ValidationError("pi, theta and p_local live on different spaces.")
    if np.any(pi <= 0):
        raise ValidationError("pi must be strictly positive.")
    if not 0 <= upsilon <= 1:
        raise ValidationError(f"upsilon must lie in [0, 1], got {upsilon!r}.")

    alpha = acceptance_matrix(pi, beta)
    interaction = alpha * theta[None, :]
    rejected = ((1.0 - alpha) * theta[None, :]).sum(axis=1)
    interaction[np.diag_indices_from(interaction)] = theta + rejected
    return DiscreteKernelOracle((1 - upsilon) * local + upsilon * interaction)


def stationarity_error(pi, kernel: DiscreteKernelOracle) -> float:
    """max_y |(pi P)(y) - pi(y)|"""
    pi = validate_distribution(pi, name="pi")
    return float(np.max(np.abs(pi @ kernel.matrix - pi)))


def detailed_balance_error(pi, kernel: DiscreteKernelOracle) -> float:
    """max_{x, y} |pi(x) P(x, y) - pi(y) P(y, x)|"""
    pi = validate_distribution(pi, name="pi")
    flow = pi[:, None] * kernel.matrix
    return float(np.max(np.abs(flow - flow.T)))


def random_instance(rng, n_states):
    """Strictly positive random law on n_states points"""
    return rng.dirichlet(np.ones(n_states))
