"""
Exact and simulated behaviour of the nonhomogeneous two-state chain.

P_theta = [[theta, 1 - theta], [1 - theta, theta]] leaves (1/2, 1/2)
invariant for every theta, yet with theta_n = n^(-1/4) the mixing times
blow up along the schedule: the marginal law still converges.
"""

import logging
import math

import numpy as np
from django.core.exceptions import ValidationError

from samplers.enums import MoveKind
from samplers.records import ChainTrace

from .enums import ToyState
from .records import UNIFORM, DistVec2, ToyKernel, ToySchedule

logger = logging.getLogger(__name__)


def _validate_horizon(n):
    if n < 0:
        raise ValidationError(f"n must be >= 0, got {n}.")


def _validate_state(x0):
    if x0 not in ToyState.values:
        raise ValidationError(f"Toy states are 0 and 1, got {x0!r}.")


def _propagate(sched: ToySchedule, init: DistVec2, n):
    """Yield (p0, p1) after 0, 1, ..., n kernel applications"""
    p0, p1 = init.p0, init.p1
    yield p0, p1
    for theta in sched.thetas(n):
        p0, p1 = p0 * theta + p1 * (1 - theta), p0 * (1 - theta) + p1 * theta
        total = p0 + p1
        p0, p1 = p0 / total, p1 / total
        yield p0, p1


def toy_exact_marginal(sched: ToySchedule, init: DistVec2, n) -> DistVec2:
    """init . P_{theta_1} ... P_{theta_n} by exact 2x2 products"""
    _validate_horizon(n)
    for p0, p1 in _propagate(sched, init, n):
        pass
    return DistVec2(p0, p1)


def toy_tv_to_pi(sched: ToySchedule, init: DistVec2, n) -> float:
    """|p_0(n) - 1/2|, the distance of the time-n law to (1/2, 1/2)"""
    return abs(toy_exact_marginal(sched, init, n).p0 - UNIFORM.p0)


def toy_tv_series(sched: ToySchedule, init: DistVec2, n):
    """toy_tv_to_pi for every horizon 0..n in a single pass"""
    _validate_horizon(n)
    return np.array([abs(p0 - UNIFORM.p0) for p0, _ in _propagate(sched, init, n)])


def toy_mixing_time(theta, epsilon) -> float:
    """
    M_eps(theta) = ln(eps) / ln|1 - 2 theta|

    theta = 1/2 mixes in exactly one step and returns 1; theta in {0, 1}
    gives a reducible (or periodic) chain and returns +inf.
    """
    ToyKernel(theta)
    if not 0 < epsilon < 1:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon!r}.")
    if theta in (0, 1):
        return math.inf
    if theta == 0.5:
        return 1.0
    return math.log(epsilon) / math.log(abs(1 - 2 * theta))


def toy_adaptation_distance(theta, theta_prime) -> float:
    """D(theta, theta') = 2 |theta - theta'|"""
    ToyKernel(theta)
    ToyKernel(theta_prime)
    return 2 * abs(theta - theta_prime)


def run_toy_chain(sched: ToySchedule, x0, steps, rng) -> ChainTrace:
    """
    Simulate X_{n+1} | X_n ~ P_{theta_{n+1}}(X_n, .)

    The chain stays with probability theta_{n+1} and flips otherwise; the
    trace's ``accepted`` column records whether the state flipped.
    """
    _validate_state(x0)
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}.")
    gen = rng.generator()
    flips = gen.random(steps) >= sched.thetas(steps)
    states = (x0 + np.cumsum(flips)) % 2
    return ChainTrace(
        steps=np.arange(1, steps + 1, dtype=np.int64),
        states=states.astype(float).reshape(-1, 1),
        accepted=flips,
        move_kind=(MoveKind.LOCAL.value,) * steps,
    )


def run_toy_replicates(sched: ToySchedule, x0, checkpoints, replicates, rng):
    """
    Independent toy chains advanced side by side

    Returns:
        Integer array of shape (len(checkpoints), replicates) holding X_n at
        each checkpoint n
    """
    _validate_state(x0)
    checkpoints = sorted(int(n) for n in checkpoints)
    if not checkpoints or checkpoints[0] < 0:
        raise ValidationError("checkpoints must be non-negative horizons.")
    gen = rng.generator()
    thetas = sched.thetas(checkpoints[-1])
    states = np.full(replicates, x0, dtype=np.int64)
    snapshots = []
    pending = iter(checkpoints)
    target = next(pending)
    for n in range(checkpoints[-1] + 1):
        while target == n:
            snapshots.append(states.copy())
            target = next(pending, None)
        if n < checkpoints[-1]:
            flips = gen.random(replicates) >= thetas[n]
            states = np.where(flips, 1 - states, states)
    logger.debug(f"Simulated {replicates} toy replicates to n={checkpoints[-1]}")
    return np.vstack(snapshots)
