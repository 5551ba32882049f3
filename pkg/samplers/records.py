"""Sampler state, chain history and trace records."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError

from target.validators import validate_spd

from .enums import MoveKind
from .validators import (
    validate_open_unit_interval,
    validate_positive,
    validate_steps,
    validate_temperatures,
)


@dataclass(frozen=True, eq=False)
class AdaptiveState:
    """Adaptive Metropolis parameter theta_n = (mu_n, Gamma_n) after n updates."""

    mean: np.ndarray
    cov: np.ndarray
    count: int = 0
    kappa: float = 0.1

    def __post_init__(self):
        validate_positive(self.kappa, "kappa")
        if self.count < 0:
            raise ValidationError(f"count must be >= 0, got {self.count}.")
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ValidationError(
                f"cov has shape {cov.shape}, expected {(mean.size, mean.size)}."
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.mean.size

    @classmethod
    def initial(cls, dim, kappa, cov=None, mean=None):
        """State before the first update; Gamma_0 defaults to kappa * Id"""
        return cls(
            mean=np.zeros(dim) if mean is None else mean,
            cov=kappa * np.eye(dim) if cov is None else cov,
            count=0,
            kappa=kappa,
        )


class EmpiricalMeasure:
    """
    Append-only sample history of a chain.

    theta_n is the uniform law over the first n + 1 entries; every query
    takes an explicit ``count`` so later appends never change an earlier
    measure.

    ``limit`` caps n: the history holds the initial state plus at most
    ``limit`` further samples.
    """

    def __init__(self, dim, limit=None):
        self.dim = dim
        self.limit = settings.MCMC_HISTORY_LIMIT if limit is None else limit
        self._samples = []

    def __len__(self):
        return len(self._samples)

    @property
    def count(self):
        return len(self._samples)

    def append(self, x):
        if len(self._samples) > self.limit:
            raise OverflowError(
                f"History holds {self.limit} steps past its initial state, "
                "raise MCMC_HISTORY_LIMIT."
            )
        point = np.array(x, dtype=float).reshape(-1)
        if point.size != self.dim:
            raise ValidationError(
                f"History point has {point.size} entries, expected {self.dim}."
            )
        point.flags.writeable = False
        self._samples.append(point)

    def __getitem__(self, index):
        return self._samples[index]

    def _resolve(self, count):
        count = self.count if count is None else count
        if not 1 <= count <= self.count:
            raise ValidationError(
                f"count must lie in [1, {self.count}], got {count}."
            )
        return count

    def as_array(self, count=None):
        count = self._resolve(count)
        return np.vstack(self._samples[:count])

    def expectation(self, f, count=None):
        """theta(f) over the first ``count`` entries"""
        count = self._resolve(count)
        return sum(f(x) for x in self._samples[:count]) / count

    def draw_index(self, rng, count=None):
        """Uniform index among the first ``count`` entries"""
        return int(rng.integers(self._resolve(count)))

    def atom_labels(self, count=None):
        """Label equal points (chain repetitions) with a shared atom id"""
        samples = self.as_array(count)
        _, inverse = np.unique(samples, axis=0, return_inverse=True)
        return inverse.reshape(-1)

    def tv_distance(self, count_a, count_b):
        """
        Exact sum-of-absolute-differences distance between two prefixes

        Both measures are uniform over their prefix; repeated points are
        merged into a single atom before comparing.
        """
        count_a, count_b = sorted((self._resolve(count_a), self._resolve(count_b)))
        return prefix_tv(self.atom_labels(count_b), count_a, count_b)


def prefix_tv(labels, count_a, count_b):
    """Distance between the uniform laws on labels[:count_a] and labels[:count_b]"""
    n_atoms = int(labels[:count_b].max()) + 1
    weights_a = np.bincount(labels[:count_a], minlength=n_atoms) / count_a
    weights_b = np.bincount(labels[:count_b], minlength=n_atoms) / count_b
    return float(np.abs(weights_a - weights_b).sum())


@dataclass(frozen=True, eq=False)
class LadderConfig:
    """Temperature ladder T_1 = 1 < ... < T_K with per-level proposals."""

    temperatures: tuple
    upsilon: float
    proposal_covs: tuple
    steps: int
    burn_in: int = 0

    def __post_init__(self):
        validate_temperatures(self.temperatures)
        validate_open_unit_interval(self.upsilon, "upsilon")
        validate_steps(self.steps, self.burn_in)
        if len(self.proposal_covs) != len(self.temperatures):
            raise ValidationError(
                f"proposal_covs has {len(self.proposal_covs)} entries, "
                f"expected one per level ({len(self.temperatures)})."
            )
        covs = tuple(
            validate_spd(cov, name=f"proposal_covs[{i}]")
            for i, cov in enumerate(self.proposal_covs)
        )
        if len({cov.shape for cov in covs}) != 1:
            raise ValidationError("proposal_covs must all have the same shape.")
        object.__setattr__(self, "temperatures", tuple(map(float, self.temperatures)))
        object.__setattr__(self, "proposal_covs", covs)

    @property
    def levels(self):
        return len(self.temperatures)

    @property
    def dim(self):
        return self.proposal_covs[0].shape[0]

    def level_pair_exponent(self, level):
        """beta_k = 1/T_k - 1/T_{k+1} for 0-based level k < K - 1"""
        return 1 / self.temperatures[level] - 1 / self.temperatures[level + 1]


@dataclass(frozen=True, eq=False)
class ChainTrace:
    """
    Post-burn-in record of one chain.

    ``steps``, ``states``, ``accepted`` and ``move_kind`` are aligned;
    ``param_snapshots`` is thinned separately and indexed by
    ``snapshot_steps``.
    """

    steps: np.ndarray
    states: np.ndarray
    accepted: np.ndarray
    move_kind: tuple
    param_snapshots: list = field(default_factory=list)
    snapshot_steps: np.ndarray = field(
        default_factory=lambda: np.zeros(0, dtype=np.int64)
    )

    def __post_init__(self):
        lengths = {len(self.steps), len(self.states), len(self.accepted)}
        lengths.add(len(self.move_kind))
        if len(lengths) != 1:
            raise ValueError(f"Trace columns have mismatched lengths {lengths}.")
        if len(self.param_snapshots) != len(self.snapshot_steps):
            raise ValueError("Snapshot steps and snapshots differ in length.")

    def __len__(self):
        return len(self.steps)

    @property
    def dim(self):
        return self.states.shape[1]

    @property
    def acceptance_rate(self):
        return float(np.mean(self.accepted)) if len(self) else float("nan")

    @property
    def interaction_rate(self):
        if not len(self):
            return float("nan")
        return sum(kind == MoveKind.INTERACTION for kind in self.move_kind) / len(self)


class TraceRecorder:
    """Collects per-step records and freezes them into a ChainTrace."""

    def __init__(self, dim, burn_in=0, snapshot_every=0):
        self.dim = dim
        self.burn_in = burn_in
        self.snapshot_every = snapshot_every
        self._steps = []
        self._states = []
        self._accepted = []
        self._kinds = []
        self._snapshots = []
        self._snapshot_steps = []

    def record(self, step, state, accepted, kind=MoveKind.LOCAL, snapshot=None):
        """Record iteration ``step`` (1-based) unless it falls in the burn-in"""
        if step <= self.burn_in:
            return
        self._steps.append(step)
        self._states.append(state)
        self._accepted.append(bool(accepted))
        self._kinds.append(str(kind))
        if snapshot is not None and self.snapshot_every:
            if (step - self.burn_in - 1) % self.snapshot_every == 0:
                self._snapshots.append(snapshot)
                self._snapshot_steps.append(step)

    def finish(self):
        states = (
            np.vstack(self._states) if self._states else np.zeros((0, self.dim))
        )
        return ChainTrace(
            steps=np.asarray(self._steps, dtype=np.int64),
            states=states,
            accepted=np.asarray(self._accepted, dtype=bool),
            move_kind=tuple(self._kinds),
            param_snapshots=self._snapshots,
            snapshot_steps=np.asarray(self._snapshot_steps, dtype=np.int64),
        )
