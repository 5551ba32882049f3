"""
Ergodic averages and marginal convergence of replicated chains.

Histogram TV here is on the probability scale (half the sum of absolute
differences), the same scale as toy_tv_to_pi.
"""

import logging

import numpy as np
from django.core.exceptions import ValidationError
from scipy import stats

from .enums import ReferenceKind
from .records import (
    CheckpointStatistic,
    ErgodicReport,
    MarginalConvergenceReport,
    NoiseFloor,
)
from .validators import validate_distribution

logger = logging.getLogger(__name__)

KS_ALPHA = 0.01
TAIL_MASS = 1e-3


def ergodic_average(trace, f, target=None) -> ErgodicReport:
    """
    Running means n^-1 sum f(X_k) along a trace

    n_effective and the Monte Carlo standard error come from batch means
    with batches of floor(sqrt(n)) samples.

    Args:
        trace: ChainTrace
        f: Map from a state to a real number
        target: Value the average should converge to, if known

    Returns:
        ErgodicReport
    """
    if not len(trace):
        raise ValidationError("Cannot average an empty trace.")
    values = np.array([f(x) for x in trace.states], dtype=float)
    n = values.size
    running = np.cumsum(values) / np.arange(1, n + 1)

    batch_size = max(1, int(np.floor(np.sqrt(n))))
    n_batches = n // batch_size
    variance = float(values.var(ddof=1)) if n > 1 else 0.0
    if n_batches >= 2:
        tail = values[n - n_batches * batch_size :]
        batch_means = tail.reshape(n_batches, batch_size).mean(axis=1)
        sigma2 = batch_size * float(batch_means.var(ddof=1))
    else:
        sigma2 = variance
    n_effective = n * variance / sigma2 if sigma2 > 0 else float(n)

    final_abs_error = None
    if target is not None:
        final_abs_error = abs(float(running[-1]) - target)
    return ErgodicReport(
        running_means=running,
        target_value=target,
        final_abs_error=final_abs_error,
        n_effective=n_effective,
        mc_standard_error=float(np.sqrt(sigma2 / n)),
    )


def count_sign_changes(trace, coordinate=0) -> int:
    """Number of times a coordinate crosses zero (exact zeros are skipped)"""
    signs = np.sign(trace.states[:, coordinate])
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def ks_critical_value(n, alpha=KS_ALPHA) -> float:
    """Two-sided one-sample KS critical value at level alpha for n points"""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}.")
    return float(stats.kstwo.ppf(1 - alpha, n))


def reference_kind(reference):
    if hasattr(reference, "cdf") and hasattr(reference, "ppf"):
        return ReferenceKind.CONTINUOUS
    if callable(reference):
        return ReferenceKind.SAMPLER
    return ReferenceKind.DISCRETE


def frozen_bins(reference, size):
    """
    Freedman-Diaconis bin edges of a continuous reference for ``size`` points

    Edges span the central 1 - 2e-3 mass, with one open bin on each side.
    """
    q1, q3 = reference.ppf([0.25, 0.75])
    width = 2 * (q3 - q1) * size ** (-1 / 3)
    low, high = reference.ppf([TAIL_MASS, 1 - TAIL_MASS])
    inner = np.arange(low, high + width, width)
    return np.concatenate(([-np.inf], inner, [np.inf]))


class _Comparator:
    """Statistics of a pooled sample against one reference."""

    def __init__(self, reference, size):
        self.kind = reference_kind(reference)
        self.reference = reference
        self.size = size
        if self.kind == ReferenceKind.CONTINUOUS:
            self.edges = frozen_bins(reference, size)
            self.probabilities = np.diff(reference.cdf(self.edges))
        elif self.kind == ReferenceKind.DISCRETE:
            self.probabilities = validate_distribution(reference, name="reference")

    def draw(self, gen, size):
        if self.kind == ReferenceKind.CONTINUOUS:
            return self.reference.rvs(size=size, random_state=gen)
        if self.kind == ReferenceKind.DISCRETE:
            return gen.choice(self.probabilities.size, size=size, p=self.probabilities)
        return np.asarray(self.reference(size, gen), dtype=float)

    def hist_tv(self, sample):
        if self.kind == ReferenceKind.SAMPLER:
            return None
        if self.kind == ReferenceKind.CONTINUOUS:
            counts, _ = np.histogram(sample, bins=self.edges)
        else:
            labels = np.asarray(sample, dtype=np.int64)
            if labels.min() < 0 or labels.max() >= self.probabilities.size:
                raise ValidationError("Sample has states outside the reference.")
            counts = np.bincount(labels, minlength=self.probabilities.size)
        return 0.5 * float(np.abs(counts / len(sample) - self.probabilities).sum())

    def ks(self, sample, gen=None):
        """(statistic, p-value); sampler references need ``gen``"""
        if self.kind == ReferenceKind.CONTINUOUS:
            result = stats.kstest(sample, self.reference.cdf)
            return float(result.statistic), float(result.pvalue)
        if self.kind == ReferenceKind.DISCRETE:
            labels = np.asarray(sample, dtype=np.int64)
            counts = np.bincount(labels, minlength=self.probabilities.size)
            empirical = np.cumsum(counts) / len(sample)
            reference_cdf = np.cumsum(self.probabilities)
            statistic = float(np.max(np.abs(empirical - reference_cdf)))
            return statistic, float(stats.kstwo.sf(statistic, len(sample)))
        if gen is None:
            raise ValidationError("A sampler reference needs a random generator.")
        result = stats.ks_2samp(sample, self.draw(gen, len(sample)))
        return float(result.statistic), float(result.pvalue)


def noise_floor(reference, size, rng, n_boot=200, quantile=0.99) -> NoiseFloor:
    """
    Quantiles of the statistics when every replicate is an exact draw

    Args:
        reference: Frozen scipy law, probability vector or sampler
            (size, generator) -> draws
        size: Pooled sample size
        rng: RngStream
        n_boot: Bootstrap repetitions
        quantile: Reported quantile of each statistic

    Returns:
        NoiseFloor (``hist_tv`` is None for sampler references)
    """
    comparator = _Comparator(reference, size)
    gen = rng.generator()
    tvs, ks_values = [], []
    for _ in range(n_boot):
        sample = comparator.draw(gen, size)
        tvs.append(comparator.hist_tv(sample))
        ks_values.append(comparator.ks(sample, gen)[0])
    hist_tv = None
    if comparator.kind != ReferenceKind.SAMPLER:
        hist_tv = float(np.quantile(tvs, quantile))
    ks_statistic = float(np.quantile(ks_values, quantile))
    return NoiseFloor(hist_tv=hist_tv, ks_statistic=ks_statistic)


def _decreasing_within(values, slack):
    return all(b <= a + slack for a, b in zip(values, values[1:]))


def marginal_convergence_test(
    replicate_runner,
    checkpoints,
    n_replicates,
    reference,
    rng=None,
    *,
    n_boot=200,
) -> MarginalConvergenceReport:
    """
    Distance of the law of X_n to the reference along a set of checkpoints

    Args:
        replicate_runner: Callable (checkpoints, n_replicates) returning an
            array of shape (len(checkpoints), n_replicates) with X_n of every
            replicate at every checkpoint (first coordinate for vectors)
        checkpoints: Increasing horizons n
        n_replicates: Independent chains pooled at each checkpoint
        reference: Frozen scipy law (histogram TV + KS), probability vector
            on integer states (exact TV + discrete KS), or exact sampler
            (size, generator) -> draws (two-sample KS only)
        rng: RngStream for the noise floor and sampler references; without
            it the slack of the decrease check is the 1% KS critical value
        n_boot: Bootstrap repetitions of the noise floor

    Returns:
        MarginalConvergenceReport with one CheckpointStatistic per checkpoint
    """
    checkpoints = [int(n) for n in checkpoints]
    if not checkpoints or any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValidationError("checkpoints must be a strictly increasing list.")
    if n_replicates < 2:
        raise ValidationError(f"n_replicates must be >= 2, got {n_replicates}.")

    comparator = _Comparator(reference, n_replicates)
    if comparator.kind == ReferenceKind.SAMPLER and rng is None:
        raise ValidationError("A sampler reference needs an RngStream.")
    pooled = np.asarray(replicate_runner(checkpoints, n_replicates))
    if pooled.shape[:2] != (len(checkpoints), n_replicates):
        raise ValidationError(
            f"Runner returned shape {pooled.shape}, expected "
            f"({len(checkpoints)}, {n_replicates})."
        )
    if pooled.ndim == 3:
        pooled = pooled[:, :, 0]

    gen = None if rng is None else rng.child(0).generator()
    critical = ks_critical_value(n_replicates)
    series = []
    for n, sample in zip(checkpoints, pooled):
        hist_tv = comparator.hist_tv(sample)
        statistic, pvalue = comparator.ks(sample, gen)
        series.append(
            CheckpointStatistic(
                n=n,
                hist_tv=hist_tv,
                ks_statistic=statistic,
                ks_pvalue=pvalue,
                ks_critical=critical,
            )
        )
        logger.debug(f"Checkpoint n={n}: KS={statistic:.4g}")

    floor = None
    ks_slack = critical
    if rng is not None:
        floor = noise_floor(reference, n_replicates, rng.child(1), n_boot=n_boot)
        ks_slack = floor.ks_statistic
    decreasing = _decreasing_within([s.ks_statistic for s in series], ks_slack)
    if floor is not None and floor.hist_tv is not None:
        tvs = [s.hist_tv for s in series]
        decreasing = decreasing and _decreasing_within(tvs, floor.hist_tv)
    return MarginalConvergenceReport(
        series=series, noise_floor=floor, decreasing_within_noise=decreasing
    )
