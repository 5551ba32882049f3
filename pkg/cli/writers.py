"""
CSV and summary writers.

Floats are written with ``repr`` (shortest string that round-trips the
binary64 value), so identical runs give identical bytes.
"""

import csv
import logging
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

TRACE_HEADER = ["step", "accepted", "move_kind"]
TOY_HEADER = ["n", "theta", "exact_tv", "mixing_time"]
DIAGNOSTICS_HEADER = ["check", "statistic", "value"]


def format_value(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    logger.info(f"Wrote {path}")
    return path


def write_trace(path: Path, trace, thinning=1):
    """
    One row per recorded step: step, accepted, move_kind, x_0 .. x_{d-1}

    Thinning keeps every ``thinning``-th recorded row and touches nothing else.
    """
    header = TRACE_HEADER + [f"x_{i}" for i in range(trace.dim)]
    rows = (
        (trace.steps[i], trace.accepted[i], trace.move_kind[i], *trace.states[i])
        for i in range(0, len(trace), thinning)
    )
    return _write_rows(path, header, rows)


def write_toy_rows(path: Path, rows):
    """Rows of (n, theta_n, exact TV at n, mixing time of P_{theta_n})"""
    return _write_rows(path, TOY_HEADER, rows)


def write_diagnostics(path: Path, rows):
    return _write_rows(path, DIAGNOSTICS_HEADER, rows)


def write_summary(path: Path, summary: dict):
    """key=value lines in insertion order; ``wall_time_seconds`` goes last"""
    items = [(k, v) for k, v in summary.items() if k != "wall_time_seconds"]
    if "wall_time_seconds" in summary:
        items.append(("wall_time_seconds", summary["wall_time_seconds"]))
    with open(path, "w", encoding="utf-8") as handle:
        for key, value in items:
            handle.write(f"{key}={format_value(value)}\n")
    logger.info(f"Wrote {path}")
    return path


def read_summary(path: Path) -> dict:
    """Parse a summary file back into a dict of strings"""
    summary = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        key, _, value = line.partition("=")
        summary[key] = value
    return summary

