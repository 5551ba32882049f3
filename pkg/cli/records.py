"""Validated run configuration."""

from dataclasses import asdict, dataclass, fields
from typing import Optional

from diagnostics.enums import DiagnosticCheck

DEFAULT_CHECKS = tuple(DiagnosticCheck.values)


def freeze(value):
    """Lists (nested ones included) become tuples so configs compare by value"""
    if isinstance(value, (list, tuple)):
        return tuple(freeze(item) for item in value)
    if isinstance(value, dict):
        return {key: freeze(item) for key, item in value.items()}
    return value


def thaw(value):
    if isinstance(value, tuple):
        return [thaw(item) for item in value]
    if isinstance(value, dict):
        return {key: thaw(item) for key, item in value.items()}
    return value


@dataclass(frozen=True)
class RunConfig:
    """
    One batch run. Fields a command does not use keep their defaults.

    ``seed`` None means ``--seed`` or MCMC_DEFAULT_SEED decides.
    """

    command: str
    target: Optional[dict] = None
    seed: Optional[int] = None
    output_path: str = "trace"
    replicates: int = 1
    steps: int = 1000
    burn_in: int = 0
    thinning: int = 1
    kappa: float = 0.1
    x0: Optional[tuple] = None
    initial_cov: Optional[tuple] = None
    upsilon: Optional[float] = None
    temperatures: Optional[tuple] = None
    t_max: Optional[float] = None
    levels: Optional[int] = None
    proposal_covs: Optional[tuple] = None
    toy_theta: Optional[float] = None
    toy_x0: int = 0
    epsilon: float = 0.1
    checks: tuple = DEFAULT_CHECKS
    instances: int = 20
    n_states: int = 5
    oracle_temperature: float = 4.0
    mc_reps: int = 1000
    drift_exponent: float = 0.25
    test_points: Optional[tuple] = None
    pool_size: int = 1000

    def __post_init__(self):
        for item in fields(self):
            object.__setattr__(self, item.name, freeze(getattr(self, item.name)))

    @classmethod
    def field_names(cls):
        return [item.name for item in fields(cls)]

    def as_dict(self):
        return thaw(asdict(self))

    def with_seed(self, seed):
        values = asdict(self)
        values["seed"] = seed
        return RunConfig(**values)
