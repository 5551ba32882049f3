"""
Random-walk Metropolis, Adaptive Metropolis and interacting tempering.

Every acceptance test is done in log space as ``log U < min(0, delta)``.
Step functions take a live ``numpy.random.Generator``; ``run_*`` functions
take an ``RngStream`` and are bit-reproducible for a given stream.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
from django.core.exceptions import ValidationError

from target.densities import TemperedDensity

from .enums import MoveKind
from .records import AdaptiveState, EmpiricalMeasure, TraceRecorder
from .validators import (
    validate_positive,
    validate_same_dimension,
    validate_steps,
)

logger = logging.getLogger(__name__)

AM_SCALE = 2.38**2
LOCAL_STREAM = 0
INTERACTION_STREAM = 1


class MetropolisMove(NamedTuple):
    state: np.ndarray
    accepted: bool
    log_density: float


class InteractingMove(NamedTuple):
    state: np.ndarray
    move_kind: MoveKind
    accepted: bool
    log_density: float


def proposal_factor(proposal_cov):
    """
    Lower Cholesky factor of a proposal covariance

    Raises:
        ValidationError: If the covariance is not SPD (never regularized here)
    """
    try:
        return np.linalg.cholesky(np.atleast_2d(proposal_cov))
    except np.linalg.LinAlgError:
        raise ValidationError(
            "Proposal covariance is not positive definite (Cholesky failed)."
        )


def log_uniform(rng):
    """log U for U ~ Uniform[0, 1); U = 0 maps to -inf"""
    u = rng.random()
    return math.log(u) if u > 0 else -math.inf


def rwm_step(
    x, proposal_cov, t, rng, *, factor=None, current_log_density=None
) -> MetropolisMove:
    """
    One symmetric random-walk Metropolis step

    Proposes y = x + L z with L the Cholesky factor of ``proposal_cov`` and
    accepts iff log U < min(0, log pi(y) - log pi(x)). The normal vector is
    drawn before the uniform.

    Args:
        x: Current state
        proposal_cov: SPD proposal covariance
        t: TargetDensity or TemperedDensity
        rng: numpy Generator
        factor: Precomputed Cholesky factor of proposal_cov
        current_log_density: log pi(x) when already known

    Returns:
        MetropolisMove(state, accepted, log_density of the returned state)
    """
    if factor is None:
        factor = proposal_factor(proposal_cov)
    log_px = t.evaluate(x) if current_log_density is None else current_log_density
    y = x + factor @ rng.standard_normal(x.size)
    log_py = t.evaluate(y)
    if math.isnan(log_py):
        raise ArithmeticError(f"Log-density returned NaN at {y.tolist()}.")
    if log_uniform(rng) < min(0.0, log_py - log_px):
        return MetropolisMove(y, True, log_py)
    return MetropolisMove(x, False, log_px)


def run_rwm(t, x0, proposal_cov, steps, rng, burn_in=0):
    """Plain SRWM chain with a fixed proposal covariance"""
    validate_steps(steps, burn_in)
    x = validate_same_dimension(x0, t.dim, "x0")
    factor = proposal_factor(proposal_cov)
    gen = rng.generator()
    log_px = t.evaluate(x)
    recorder = TraceRecorder(t.dim, burn_in=burn_in)
    for step in range(1, steps + 1):
        x, accepted, log_px = rwm_step(
            x, proposal_cov, t, gen, factor=factor, current_log_density=log_px
        )
        recorder.record(step, x, accepted)
    return recorder.finish()


def am_update(s: AdaptiveState, x_new) -> AdaptiveState:
    """
    Adaptive Metropolis recursion

    mu_{n+1} = mu_n + (X - mu_n) / (n + 1)
    Gamma_{n+1} = n/(n+1) Gamma_n + ((X - mu_n)(X - mu_n)^T + kappa Id) / (n + 1)

    The outer product uses the old mean. The result is re-symmetrized.
    """
    x_new = validate_same_dimension(x_new, s.dim, "x_new")
    n = s.count
    innovation = x_new - s.mean
    mean = s.mean + innovation / (n + 1)
    cov = (n / (n + 1)) * s.cov + (
        np.outer(innovation, innovation) + s.kappa * np.eye(s.dim)
    ) / (n + 1)
    cov = 0.5 * (cov + cov.T)
    return AdaptiveState(mean=mean, cov=cov, count=n + 1, kappa=s.kappa)


def am_proposal_cov(s: AdaptiveState):
    """
    Proposal covariance (2.38^2 / d) Gamma

    Raises:
        ValidationError: If Gamma is not SPD, which only happens before the
            first update when Gamma_0 is singular
    """
    if s.count == 0:
        try:
            np.linalg.cholesky(s.cov)
        except np.linalg.LinAlgError:
            raise ValidationError(
                "Gamma_0 is not positive definite; use the kappa * Id fallback."
            )
    return (AM_SCALE / s.dim) * s.cov


def run_am(
    t,
    x0,
    initial_cov,
    kappa,
    steps,
    rng,
    *,
    initial_mean=None,
    burn_in=0,
    snapshot_every=1,
):
    """
    Adaptive Metropolis chain

    Each iteration samples X_{n+1} with the proposal of theta_n, then adapts
    theta_{n+1} from X_{n+1}. Before the first update a singular Gamma_0 is
    replaced by kappa * Id.

    Args:
        t: Target density
        x0: Initial state
        initial_cov: Gamma_0 (positive semi-definite), None for kappa * Id
        kappa: Regularization floor
        steps: Number of iterations
        rng: RngStream
        initial_mean: mu_0, zero by default
        burn_in: Iterations not recorded in the trace
        snapshot_every: Record theta every k recorded steps (0 disables)

    Returns:
        ChainTrace with AdaptiveState snapshots
    """
    validate_positive(kappa, "kappa")
    validate_steps(steps, burn_in)
    x = validate_same_dimension(x0, t.dim, "x0")
    state = AdaptiveState.initial(t.dim, kappa, cov=initial_cov, mean=initial_mean)
    gen = rng.generator()
    log_px = t.evaluate(x)
    recorder = TraceRecorder(t.dim, burn_in=burn_in, snapshot_every=snapshot_every)

    for step in range(1, steps + 1):
        try:
            cov = am_proposal_cov(state)
        except ValidationError:
            logger.debug("Singular Gamma_0, proposing with kappa * Id")
            cov = (AM_SCALE / t.dim) * kappa * np.eye(t.dim)
        x, accepted, log_px = rwm_step(
            x, cov, t, gen, factor=proposal_factor(cov), current_log_density=log_px
        )
        state = am_update(state, x)
        recorder.record(step, x, accepted, snapshot=state)
    return recorder.finish()


def run_am_replicates(
    t, x0, initial_cov, kappa, checkpoints, replicates, rng, *, initial_mean=None
):
    """
    Independent Adaptive Metropolis chains advanced side by side

    Every replicate follows the recursion of ``run_am`` with its own
    (mu, Gamma). Per step the generator draws the (replicates, d) normal
    block, then the replicates uniforms; one replicate therefore consumes
    the stream exactly as ``run_am`` does.

    Args:
        t: Target density with ``evaluate_batch``
        x0: Common initial state
        initial_cov: Gamma_0, None for kappa * Id
        kappa: Regularization floor
        checkpoints: Horizons n at which X_n is kept (0 is the start)
        replicates: Number of chains
        rng: RngStream

    Returns:
        Array of shape (len(checkpoints), replicates, d)
    """
    validate_positive(kappa, "kappa")
    checkpoints = sorted(int(n) for n in checkpoints)
    if not checkpoints or checkpoints[0] < 0:
        raise ValidationError("checkpoints must be non-negative horizons.")
    if replicates < 1:
        raise ValidationError(f"replicates must be >= 1, got {replicates}.")
    x = validate_same_dimension(x0, t.dim, "x0")
    start = AdaptiveState.initial(t.dim, kappa, cov=initial_cov, mean=initial_mean)
    dim = t.dim
    try:
        first_factor = proposal_factor(am_proposal_cov(start))
    except ValidationError:
        logger.debug("Singular Gamma_0, proposing with kappa * Id")
        first_factor = proposal_factor((AM_SCALE / dim) * kappa * np.eye(dim))

    gen = rng.generator()
    xs = np.tile(x, (replicates, 1))
    means = np.tile(start.mean, (replicates, 1))
    covs = np.tile(start.cov, (replicates, 1, 1))
    log_px = t.evaluate_batch(xs)
    kappa_eye = kappa * np.eye(dim)
    horizon = checkpoints[-1]
    snapshots = []
    pending = iter(checkpoints)
    target = next(pending)

    for n in range(horizon + 1):
        while target == n:
            snapshots.append(xs.copy())
            target = next(pending, None)
        if n == horizon:
            break
        if n == 0:
            factors = np.broadcast_to(first_factor, (replicates, dim, dim))
        else:
            factors = np.linalg.cholesky((AM_SCALE / dim) * covs)
        z = gen.standard_normal((replicates, dim))
        ys = xs + np.einsum("rij,rj->ri", factors, z)
        log_py = t.evaluate_batch(ys)
        if np.any(np.isnan(log_py)):
            raise ArithmeticError("Log-density returned NaN on a replicate proposal.")
        with np.errstate(divide="ignore", invalid="ignore"):
            log_u = np.log(gen.random(replicates))
            accept = log_u < np.minimum(0.0, log_py - log_px)
        xs = np.where(accept[:, None], ys, xs)
        log_px = np.where(accept, log_py, log_px)

        innovations = xs - means
        means = means + innovations / (n + 1)
        outer = innovations[:, :, None] * innovations[:, None, :]
        covs = (n / (n + 1)) * covs + (outer + kappa_eye) / (n + 1)
        covs = 0.5 * (covs + np.swapaxes(covs, 1, 2))

    logger.debug(f"Simulated {replicates} AM replicates to n={horizon}")
    return np.stack(snapshots)


def it_acceptance(x, y, t, beta) -> float:
    """alpha(x, y) = 1 ^ pi^beta(y) / pi^beta(x), evaluated in log space"""
    return it_acceptance_from_logs(t.evaluate(x), t.evaluate(y), beta)


def it_acceptance_from_logs(log_px, log_py, beta) -> float:
    if log_py >= log_px:
        return 1.0
    return math.exp(beta * (log_py - log_px))


def it_step(
    x,
    hist: EmpiricalMeasure,
    local_kernel_cov,
    t: TemperedDensity,
    beta,
    upsilon,
    rng,
    *,
    interaction_rng=None,
    history_count=None,
    factor=None,
    current_log_density=None,
) -> InteractingMove:
    """
    One interacting-tempering step at a ladder level

    With probability 1 - upsilon: random-walk step against ``t``. With
    probability upsilon: draw Z uniformly from the first ``history_count``
    entries of the hotter level's history and accept it with
    alpha = 1 ^ (pi(Z) / pi(x))^beta, pi being ``t.base``.

    Draw order on ``interaction_rng`` (``rng`` when omitted): branch uniform,
    acceptance uniform, history index.

    Args:
        x: Current state of this level
        hist: History of the next hotter level
        local_kernel_cov: Proposal covariance of the local move
        t: Tempered target of this level
        beta: Level-pair exponent 1/T_k - 1/T_{k+1}
        upsilon: Interaction probability
        rng: Generator for local moves
        interaction_rng: Generator for the interaction decisions
        history_count: Number of history entries visible to this step
        factor: Precomputed Cholesky factor of local_kernel_cov
        current_log_density: log of t at x when already known

    Returns:
        InteractingMove(state, move_kind, accepted, log_density under t)
    """
    interaction_rng = rng if interaction_rng is None else interaction_rng
    visible = hist.count if history_count is None else history_count

    if interaction_rng.random() < upsilon:
        if visible < 1:
            logger.warning("Interaction drawn with an empty history, moving locally")
        else:
            u = interaction_rng.random()
            z = hist[hist.draw_index(interaction_rng, visible)]
            log_px = t.base.evaluate(x)
            log_pz = t.base.evaluate(z)
            if u < it_acceptance_from_logs(log_px, log_pz, beta):
                return InteractingMove(z, MoveKind.INTERACTION, True, t.evaluate(z))
            if current_log_density is None:
                current_log_density = t.evaluate(x)
            return InteractingMove(
                x, MoveKind.INTERACTION, False, current_log_density
            )

    move = rwm_step(
        x,
        local_kernel_cov,
        t,
        rng,
        factor=factor,
        current_log_density=current_log_density,
    )
    return InteractingMove(move.state, MoveKind.LOCAL, move.accepted, move.log_density)


def ladder_temperatures(t_max, levels):
    """Geometric ladder 1 = T_1 < ... < T_K = t_max"""
    if levels < 1:
        raise ValidationError(f"levels must be >= 1, got {levels}.")
    if levels == 1:
        return (1.0,)
    if not t_max > 1:
        raise ValidationError(f"t_max must be > 1, got {t_max!r}.")
    ratios = np.geomspace(1.0, t_max, levels)
    ratios[0], ratios[-1] = 1.0, float(t_max)
    return tuple(float(r) for r in ratios)


def run_it_ladder(cfg, t, x0_per_level, rng):
    """
    K-stage interacting tempering

    Level K is a plain SRWM chain on pi^(1/T_K). At each time n, level K
    moves first, then levels K-1 down to 1 move with it_step, each reading
    the entries X^(k+1)_0..X^(k+1)_n of the hotter level's history. Every
    history starts with the level's initial state, so a run of ``steps``
    iterations needs MCMC_HISTORY_LIMIT >= steps.

    Level k (1-based) uses ``rng.child(k).child(0)`` for local moves and
    ``rng.child(k).child(1)`` for interaction decisions.

    Returns:
        List of ChainTrace, index 0 being the target level T_1 = 1
    """
    if len(x0_per_level) != cfg.levels:
        raise ValidationError(
            f"x0_per_level has {len(x0_per_level)} entries, expected {cfg.levels}."
        )
    if cfg.dim != t.dim:
        raise ValidationError(
            f"Ladder proposals are {cfg.dim}-dimensional, target is {t.dim}."
        )

    levels = cfg.levels
    targets = [TemperedDensity(t, temperature) for temperature in cfg.temperatures]
    factors = [proposal_factor(cov) for cov in cfg.proposal_covs]
    betas = [cfg.level_pair_exponent(k) for k in range(levels - 1)]
    local_gens = [
        rng.child(k + 1).child(LOCAL_STREAM).generator() for k in range(levels)
    ]
    interaction_gens = [
        rng.child(k + 1).child(INTERACTION_STREAM).generator() for k in range(levels)
    ]

    states = [
        validate_same_dimension(x0, t.dim, f"x0_per_level[{k}]")
        for k, x0 in enumerate(x0_per_level)
    ]
    log_densities = [targets[k].evaluate(states[k]) for k in range(levels)]
    # No level reads the history of level 1.
    histories = [None]
    for k in range(1, levels):
        history = EmpiricalMeasure(t.dim)
        history.append(states[k])
        histories.append(history)
    recorders = [TraceRecorder(t.dim, burn_in=cfg.burn_in) for _ in range(levels)]

    logger.info(
        f"Interacting tempering: {levels} levels, T={cfg.temperatures}, "
        f"upsilon={cfg.upsilon}, steps={cfg.steps}"
    )
    for n in range(cfg.steps):
        top = levels - 1
        move = rwm_step(
            states[top],
            cfg.proposal_covs[top],
            targets[top],
            local_gens[top],
            factor=factors[top],
            current_log_density=log_densities[top],
        )
        states[top], log_densities[top] = move.state, move.log_density
        if top > 0:
            histories[top].append(move.state)
        recorders[top].record(n + 1, move.state, move.accepted)

        for k in range(levels - 2, -1, -1):
            step = it_step(
                states[k],
                histories[k + 1],
                cfg.proposal_covs[k],
                targets[k],
                betas[k],
                cfg.upsilon,
                local_gens[k],
                interaction_rng=interaction_gens[k],
                history_count=n + 1,
                factor=factors[k],
                current_log_density=log_densities[k],
            )
            states[k], log_densities[k] = step.state, step.log_density
            if k > 0:
                histories[k].append(step.state)
            recorders[k].record(n + 1, step.state, step.accepted, step.move_kind)

    return [recorder.finish() for recorder in recorders]
