"""Observable parts of the diminishing-adaptation and moment conditions."""

import numpy as np
from django.core.exceptions import ValidationError

from samplers.records import prefix_tv

from .norms import dv_bound_am
from .records import AdaptationSeriesReport


def _report(terms):
    partial_sums = np.cumsum(terms)
    if not partial_sums.size or partial_sums[-1] == 0:
        return AdaptationSeriesReport(partial_sums=partial_sums, tail_ratio=0.0)
    half = partial_sums[partial_sums.size // 2 - 1] if partial_sums.size > 1 else 0.0
    tail_ratio = float((partial_sums[-1] - half) / partial_sums[-1])
    return AdaptationSeriesReport(partial_sums=partial_sums, tail_ratio=tail_ratio)


def am_adaptation_series(trace, kappa, drift, exponent) -> AdaptationSeriesReport:
    """
    Partial sums of k^-1 * dv_bound_am(Gamma_k, Gamma_{k-1}) * W(X_k)^a

    The trace must carry one AdaptiveState snapshot per recorded step
    (``snapshot_every=1``). The first recorded step only provides
    Gamma_{k-1}.

    Args:
        trace: ChainTrace of run_am
        kappa: Regularization floor used by the run
        drift: DriftFunction W
        exponent: Power a applied to W
    """
    snapshots = trace.param_snapshots
    if len(snapshots) != len(trace) or np.any(np.diff(trace.snapshot_steps) != 1):
        raise ValidationError("The series needs a snapshot at every recorded step.")
    if not 0 < exponent <= 1:
        raise ValidationError(f"exponent must lie in (0, 1], got {exponent!r}.")
    terms = []
    for previous, current, x in zip(snapshots, snapshots[1:], trace.states[1:]):
        variation = dv_bound_am(previous.cov, current.cov, kappa, current.dim)
        terms.append(variation * drift(x) ** exponent / current.count)
    return _report(np.asarray(terms, dtype=float))


def empirical_measure_bound_check(hist, n_max=100, m_max=100) -> float:
    """
    Largest excess of TV(theta_{n+m}, theta_n) over 2m / (n + m + 1)

    theta_n is the uniform law over the first n + 1 entries of ``hist``;
    n runs over 0..n_max - 1 and m over 1..m_max. A non-positive result
    (up to float slack) means the bound holds on the whole grid.
    """
    needed = n_max + m_max
    if hist.count < needed:
        raise ValidationError(
            f"History holds {hist.count} samples, the grid needs {needed}."
        )
    labels = hist.atom_labels(needed)
    excess = -np.inf
    for n in range(n_max):
        for m in range(1, m_max + 1):
            distance = prefix_tv(labels, n + 1, n + m + 1)
            excess = max(excess, distance - 2 * m / (n + m + 1))
    return float(excess)


def auxiliary_moment_series(trace, drift):
    """Running mean of W(Y_k) along the auxiliary chain, bounded when sup E W(Y_n) is"""
    if not len(trace):
        raise ValidationError("Cannot average an empty trace.")
    values = np.array([drift(y) for y in trace.states], dtype=float)
    return np.cumsum(values) / np.arange(1, values.size + 1)
