import numpy as np
from django.core.exceptions import ValidationError


def validate_distribution(p, name="distribution", atol=1e-9):
    """Non-negative vector summing to one"""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError(f"{name} must be a non-empty vector.")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValidationError(f"{name} must have finite non-negative entries.")
    if abs(p.sum() - 1) > atol:
        raise ValidationError(f"{name} must sum to 1, sums to {p.sum()!r}.")
    return p


def validate_stochastic_matrix(matrix, atol=1e-12):
    """Square, non-negative, rows summing to one within ``atol``"""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"Kernel matrix must be square, got {matrix.shape}.")
    if np.any(matrix < 0):
        raise ValidationError("Kernel matrix has negative entries.")
    if np.max(np.abs(matrix.sum(axis=1) - 1)) > atol:
        raise ValidationError("Kernel matrix rows must sum to 1.")
    return matrix


def validate_same_length(p, q):
    if len(p) != len(q):
        raise ValidationError(f"Length mismatch: {len(p)} vs {len(q)}.")
