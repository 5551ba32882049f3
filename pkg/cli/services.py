import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.conf import settings

from diagnostics.services import DEFAULT_TEST_POINTS, DiagnoseParams, run_diagnostics
from samplers.records import LadderConfig
from samplers.rng import RngStream
from samplers.services import run_am, run_it_ladder
from target.catalog import build_target
from toy.records import DistVec2, ToySchedule
from toy.services import run_toy_chain, toy_mixing_time, toy_tv_series

from .enums import Command, Stage
from .forms import config_hash
from .records import RunConfig
from .writers import (
    write_diagnostics,
    write_summary,
    write_toy_rows,
    write_trace,
)

logger = logging.getLogger(__name__)


class RunStageError(Exception):
    """A run failed after validation; ``stage`` names where."""

    def __init__(self, stage, error):
        self.stage = stage
        self.error = error
        super().__init__(f"stage '{stage}' failed: {error}")


@contextmanager
def stage(name):
    try:
        yield
    except Exception as error:
        logger.error(f"Stage {name} failed: {error}")
        raise RunStageError(name, error) from error


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    files: tuple
    summary: dict


def resolve_seed(cfg: RunConfig, seed=None) -> RunConfig:
    """``--seed`` beats the config's seed, which beats MCMC_DEFAULT_SEED"""
    if seed is None:
        seed = cfg.seed if cfg.seed is not None else settings.MCMC_DEFAULT_SEED
    return cfg.with_seed(int(seed))


def _replicate_suffix(cfg, replicate):
    return "" if cfg.replicates == 1 else f".rep{replicate}"


def _toy_schedule(cfg):
    if cfg.toy_theta is None:
        return ToySchedule()
    return ToySchedule.constant(cfg.toy_theta)


def _run_am(cfg, base):
    target = build_target(cfg.target)
    x0 = np.zeros(target.dim) if cfg.x0 is None else np.asarray(cfg.x0, dtype=float)
    initial_cov = None if cfg.initial_cov is None else np.asarray(cfg.initial_cov)
    chains = {}
    for replicate in range(cfg.replicates):
        chains[_replicate_suffix(cfg, replicate)] = run_am(
            target,
            x0,
            initial_cov,
            cfg.kappa,
            cfg.steps,
            base.child(replicate),
            burn_in=cfg.burn_in,
            snapshot_every=0,
        )
    return chains


def _ladder_starts(cfg, ladder, dim):
    if cfg.x0 is None:
        return [np.zeros(dim)] * ladder.levels
    x0 = np.asarray(cfg.x0, dtype=float)
    if x0.ndim == 1:
        return [x0] * ladder.levels
    return list(x0)


def _run_it(cfg, base):
    target = build_target(cfg.target)
    ladder = LadderConfig(
        temperatures=cfg.temperatures,
        upsilon=cfg.upsilon,
        proposal_covs=[np.asarray(cov, dtype=float) for cov in cfg.proposal_covs],
        steps=cfg.steps,
        burn_in=cfg.burn_in,
    )
    starts = _ladder_starts(cfg, ladder, target.dim)
    chains = {}
    for replicate in range(cfg.replicates):
        traces = run_it_ladder(ladder, target, starts, base.child(replicate))
        for level, trace in enumerate(traces, start=1):
            chains[f"{_replicate_suffix(cfg, replicate)}.level{level}"] = trace
    return chains


def _toy_rows(cfg):
    schedule = _toy_schedule(cfg)
    exact = toy_tv_series(schedule, DistVec2.point_mass(cfg.toy_x0), cfg.steps)
    thetas = schedule.thetas(cfg.steps)
    return [
        (n, thetas[n - 1], exact[n], toy_mixing_time(thetas[n - 1], cfg.epsilon))
        for n in range(1, cfg.steps + 1)
    ]


def _run_toy(cfg, base):
    schedule = _toy_schedule(cfg)
    return {
        f"{_replicate_suffix(cfg, replicate)}.chain": run_toy_chain(
            schedule, cfg.toy_x0, cfg.steps, base.child(replicate)
        )
        for replicate in range(cfg.replicates)
    }


def diagnose_params(cfg: RunConfig) -> DiagnoseParams:
    return DiagnoseParams(
        instances=cfg.instances,
        n_states=cfg.n_states,
        oracle_temperature=cfg.oracle_temperature,
        upsilon=0.3 if cfg.upsilon is None else cfg.upsilon,
        mc_reps=cfg.mc_reps,
        drift_exponent=cfg.drift_exponent,
        test_points=cfg.test_points or DEFAULT_TEST_POINTS,
        target=None if cfg.target is None else build_target(cfg.target),
        proposal_cov=(
            None if cfg.proposal_covs is None else np.asarray(cfg.proposal_covs[0])
        ),
        toy_schedule=_toy_schedule(cfg),
        toy_x0=cfg.toy_x0,
        steps=cfg.steps,
        pool_size=cfg.pool_size,
    )


def run(cfg: RunConfig, out_dir, *, seed=None) -> RunResult:
    """
    Execute a validated configuration and write its files into ``out_dir``

    Args:
        cfg: Validated RunConfig
        out_dir: Output directory, created when missing
        seed: Override of the configuration's seed

    Returns:
        RunResult with the effective config, written paths and summary

    Raises:
        RunStageError: Anything failing during setup, sampling or writing
    """
    started = time.perf_counter()
    cfg = resolve_seed(cfg, seed)
    digest = config_hash(cfg)
    out_dir = Path(out_dir)
    stem = out_dir / cfg.output_path
    logger.info(f"Starting {cfg.command} with seed={cfg.seed} config={digest[:12]}")

    with stage(Stage.SETUP):
        out_dir.mkdir(parents=True, exist_ok=True)
        base = RngStream(cfg.seed)

    summary = {
        "command": cfg.command,
        "seed": cfg.seed,
        "config_hash": digest,
        "replicates": cfg.replicates,
        "steps": cfg.steps,
    }
    files = []
    if cfg.command == Command.DIAGNOSE:
        with stage(Stage.SAMPLING):
            rows, checks_summary = run_diagnostics(
                cfg.checks, diagnose_params(cfg), base
            )
        summary.update(checks_summary)
        with stage(Stage.WRITING):
            files.append(write_diagnostics(Path(f"{stem}.csv"), rows))
    else:
        runners = {Command.RUN_AM: _run_am, Command.RUN_IT: _run_it}
        with stage(Stage.SAMPLING):
            chains = runners.get(cfg.command, _run_toy)(cfg, base)
            toy_rows = _toy_rows(cfg) if cfg.command == Command.TOY else None
        with stage(Stage.WRITING):
            if toy_rows is not None:
                files.append(write_toy_rows(Path(f"{stem}.csv"), toy_rows))
                summary["final_exact_tv"] = toy_rows[-1][2]
            for suffix, trace in chains.items():
                path = Path(f"{stem}{suffix}.csv")
                files.append(write_trace(path, trace, thinning=cfg.thinning))
                summary[f"acceptance_rate{suffix}"] = trace.acceptance_rate
                if cfg.command == Command.RUN_IT:
                    summary[f"interaction_rate{suffix}"] = trace.interaction_rate
                if cfg.command == Command.TOY:
                    summary[f"occupancy_state1{suffix}"] = float(trace.states.mean())

    summary["wall_time_seconds"] = round(time.perf_counter() - started, 6)
    with stage(Stage.WRITING):
        files.append(write_summary(Path(f"{stem}.summary.txt"), summary))
    logger.info(f"Finished {cfg.command}: {len(files)} file(s) in {out_dir}")
    return RunResult(config=cfg, files=tuple(files), summary=summary)
