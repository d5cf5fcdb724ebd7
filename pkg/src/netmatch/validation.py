"""Input validation helpers for arrays crossing the package boundary."""

from __future__ import annotations

import numpy as np

from .exceptions import InputDataError


def check_unit_interval(values, name: str) -> np.ndarray:
    """Return ``values`` as a float array after checking it lies in [0, 1]."""
    arr = np.asarray(values, dtype=float)
    if arr.size and (np.min(arr) < 0.0 or np.max(arr) > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def check_adjacency(adjacency) -> np.ndarray:
    """Validate an adjacency matrix and return it as an int8 array.

    Requirements: square, binary entries, zero diagonal, symmetric. Each
    violation raises :class:`InputDataError` with a distinct message.
    """
    arr = np.asarray(adjacency)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputDataError(f"adjacency matrix must be square, got shape {arr.shape}")
    values = np.asarray(arr, dtype=float)
    if not np.isin(values, (0.0, 1.0)).all():
        raise InputDataError("adjacency matrix entries must be binary (0 or 1)")
    if np.diagonal(values).any():
        raise InputDataError("adjacency matrix has nonzero diagonal entries (self-links)")
    if not np.array_equal(values, values.T):
        raise InputDataError("adjacency matrix must be symmetric")
    return values.astype(np.int8)


def check_distance_matrix(distances, n: int | None = None) -> np.ndarray:
    """Validate a pairwise distance matrix (square, symmetric, zero diagonal).

    The triangle inequality is not checked here; it holds by construction for
    matrices produced by :func:`netmatch.codegree.codegree_distance_matrix`
    and an O(n^3) scan would dominate the cost of using one.
    """
    arr = np.asarray(distances, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputDataError(f"distance matrix must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InputDataError(
            f"distance matrix has {arr.shape[0]} rows but the sample has {n} agents"
        )
    if not np.allclose(arr, arr.T, atol=1e-10):
        raise InputDataError("distance matrix must be symmetric")
    if np.abs(np.diagonal(arr)).max(initial=0.0) > 1e-12:
        raise InputDataError("distance matrix must have a zero diagonal")
    if arr.size and arr.min() < -1e-12:
        raise InputDataError("distance matrix entries must be nonnegative")
    return arr


def as_vector(values, name: str, length: int | None = None) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise InputDataError(f"{name} must be one-dimensional")
    if length is not None and arr.shape[0] != length:
        raise InputDataError(f"{name} must have length {length}, got {arr.shape[0]}")
    return arr
