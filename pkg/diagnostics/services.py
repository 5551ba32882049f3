"""
Batch runners for the ``diagnose`` command.

Each check returns ``(rows, summary)``: rows are ``(statistic, value)``
pairs for the diagnostics CSV, summary entries go to the summary file.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from samplers.records import EmpiricalMeasure, LadderConfig
from samplers.services import AM_SCALE, rwm_step, run_it_ladder
from target.catalog import bimodal_mixture, standard_gaussian
from target.densities import DriftFunction
from toy.records import UNIFORM, DistVec2, ToyKernel, ToySchedule
from toy.services import run_toy_replicates, toy_adaptation_distance, toy_tv_series

from .adaptation import empirical_measure_bound_check
from .drift import estimate_drift
from .enums import DiagnosticCheck
from .ergodic import marginal_convergence_test
from .norms import kernel_tv_sup
from .oracles import (
    brute_force_it_kernel,
    detailed_balance_error,
    discrete_metropolis_kernel,
    random_instance,
    stationarity_error,
    tempered_distribution,
)
from .records import DiscreteKernelOracle

logger = logging.getLogger(__name__)

DEFAULT_TEST_POINTS = ((0.0,), (1.0,), (-1.0,), (3.0,), (-3.0,))


@dataclass(frozen=True)
class DiagnoseParams:
    """Knobs of the diagnostic checks, filled from a run configuration."""

    instances: int = 20
    n_states: int = 5
    oracle_temperature: float = 4.0
    upsilon: float = 0.3
    mc_reps: int = 1000
    drift_exponent: float = 0.25
    test_points: tuple = DEFAULT_TEST_POINTS
    target: object = None
    proposal_cov: object = None
    toy_schedule: ToySchedule = field(default_factory=ToySchedule)
    toy_x0: int = 0
    steps: int = 1000
    pool_size: int = 1000
    grid_n: int = 100
    grid_m: int = 100


def check_pi_invariance(params, rng):
    """pi P = pi and detailed balance of the IT kernel with theta* ~ pi^(1/T)"""
    gen = rng.generator()
    beta = 1 - 1 / params.oracle_temperature
    stationarity, balance = 0.0, 0.0
    for _ in range(params.instances):
        pi = random_instance(gen, params.n_states)
        theta = tempered_distribution(pi, params.oracle_temperature)
        kernel = brute_force_it_kernel(
            pi, theta, discrete_metropolis_kernel(pi), params.upsilon, beta
        )
        stationarity = max(stationarity, stationarity_error(pi, kernel))
        balance = max(balance, detailed_balance_error(pi, kernel))
    rows = [
        ("instances", params.instances),
        ("max_stationarity_error", stationarity),
        ("max_detailed_balance_error", balance),
    ]
    return rows, {"pi_invariance_max_abs_err": max(stationarity, balance)}


def check_toy_distance(params, rng):
    """kernel_tv_sup of two toy kernels against 2|theta - theta'| on a grid"""
    grid = np.linspace(0.0, 1.0, 10)
    worst = 0.0
    for theta in grid:
        for theta_prime in grid:
            exact = kernel_tv_sup(_toy_oracle(theta), _toy_oracle(theta_prime))
            error = abs(exact - toy_adaptation_distance(theta, theta_prime))
            worst = max(worst, error)
    rows = [("pairs", grid.size**2), ("max_abs_err", worst)]
    return rows, {"toy_distance_max_abs_err": worst}


def _toy_oracle(theta):
    return DiscreteKernelOracle(ToyKernel(theta).matrix)


def check_adaptation_bound(params, rng):
    """TV(theta_{n+m}, theta_n) <= 2m / (n + m + 1) over a real IT history"""
    target = params.target or bimodal_mixture()
    steps = params.grid_n + params.grid_m
    covs = [np.eye(target.dim), 36.0 * np.eye(target.dim)]
    ladder = LadderConfig(
        temperatures=(1.0, 8.0),
        upsilon=params.upsilon,
        proposal_covs=covs,
        steps=steps,
    )
    x0 = np.zeros(target.dim)
    traces = run_it_ladder(ladder, target, [x0, x0], rng)
    history = EmpiricalMeasure(target.dim)
    history.append(x0)
    for state in traces[1].states:
        history.append(state)
    excess = empirical_measure_bound_check(history, params.grid_n, params.grid_m)
    rows = [("grid_points", params.grid_n * params.grid_m), ("max_excess", excess)]
    return rows, {"adaptation_bound_max_excess": excess}


def check_drift(params, rng):
    """Drift pair of the random-walk Metropolis kernel"""
    target = params.target or standard_gaussian(1)
    cov = params.proposal_cov
    if cov is None:
        cov = AM_SCALE / target.dim * np.eye(target.dim)

    def kernel_step(x, gen):
        return rwm_step(x, cov, target, gen).state

    estimate = estimate_drift(
        kernel_step,
        DriftFunction(target, params.drift_exponent),
        test_points=[np.asarray(point, dtype=float) for point in params.test_points],
        mc_reps=params.mc_reps,
        rng=rng,
    )
    rows = [
        ("lambda_hat", estimate.lambda_hat),
        ("b_hat", estimate.b_hat),
        ("degenerate", int(estimate.degenerate)),
    ]
    return rows, {"drift_feasible": int(estimate.feasible)}


def check_toy_marginal(params, rng):
    """Pooled toy replicates against the exact law of X_n"""
    checkpoints = sorted({int(n) for n in np.geomspace(1, params.steps, 8)})
    exact = toy_tv_series(
        params.toy_schedule, DistVec2.point_mass(params.toy_x0), checkpoints[-1]
    )

    def runner(horizons, replicates):
        return run_toy_replicates(
            params.toy_schedule, params.toy_x0, horizons, replicates, rng.child(0)
        )

    report = marginal_convergence_test(
        runner, checkpoints, params.pool_size, UNIFORM.as_array(), rng.child(1)
    )
    deviation = max(abs(s.hist_tv - exact[s.n]) for s in report.series)
    rows = [(f"hist_tv_n{s.n}", s.hist_tv) for s in report.series]
    rows += [
        ("max_deviation_from_exact", deviation),
        ("decreasing_within_noise", int(report.decreasing_within_noise)),
    ]
    return rows, {"toy_marginal_max_deviation": deviation}


CHECKS = {
    DiagnosticCheck.PI_INVARIANCE: check_pi_invariance,
    DiagnosticCheck.TOY_DISTANCE: check_toy_distance,
    DiagnosticCheck.ADAPTATION_BOUND: check_adaptation_bound,
    DiagnosticCheck.DRIFT: check_drift,
    DiagnosticCheck.TOY_MARGINAL: check_toy_marginal,
}


def run_diagnostics(checks, params: DiagnoseParams, rng):
    """
    Run the named checks in order, check i on ``rng.child(i)``

    Returns:
        (rows, summary): rows are (check, statistic, value) triples
    """
    rows, summary = [], {}
    for index, check in enumerate(checks):
        check = DiagnosticCheck(check)
        logger.info(f"Running diagnostic {check.value}")
        check_rows, check_summary = CHECKS[check](params, rng.child(index))
        rows.extend((check.value, statistic, value) for statistic, value in check_rows)
        summary.update(check_summary)
    return rows, summary
