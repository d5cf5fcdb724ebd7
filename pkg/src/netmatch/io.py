"""File formats: outcome/adjacency/truth CSVs, distance dumps, bound reports.

Floats are written with ``repr`` (shortest round-trip form), so identical
inputs always produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .exceptions import InputDataError


def _fmt(value) -> str:
    return repr(float(value))


def write_outcome_csv(path, y, x) -> None:
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    header = ["y"] + [f"x{j + 1}" for j in range(x.shape[1])]
    with open(path, "w", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for yi, xi in zip(y, x):
            handle.write(",".join([_fmt(yi)] + [_fmt(v) for v in xi]) + "\n")


def read_outcome_csv(path):
    """Read ``y,x1,...,xk`` rows; returns (y, x) arrays."""
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise InputDataError(f"{path}: outcome file is empty") from None
        if not header or header[0].strip() != "y":
            raise InputDataError(f"{path}: outcome header must start with 'y'")
        width = len(header)
        if width < 2:
            raise InputDataError(f"{path}: outcome file must contain at least one covariate column")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise InputDataError(f"{path}:{lineno}: expected {width} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise InputDataError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise InputDataError(f"{path}: outcome file has no data rows")
    data = np.asarray(rows)
    return data[:, 0], data[:, 1:]


def write_dense_adjacency(path, adjacency) -> None:
    adjacency = np.asarray(adjacency)
    with open(path, "w", newline="") as handle:
        for row in adjacency:
            handle.write(",".join(str(int(v)) for v in row) + "\n")


def write_edge_list(path, adjacency) -> None:
    """Upper-triangle edges as 1-based ``i,j`` rows."""
    adjacency = np.asarray(adjacency)
    rows, cols = np.nonzero(np.triu(adjacency, k=1))
    with open(path, "w", newline="") as handle:
        handle.write("i,j\n")
        for i, j in zip(rows, cols):
            handle.write(f"{i + 1},{j + 1}\n")


def _read_edge_list(path, n: int | None) -> np.ndarray:
    if n is None:
        raise InputDataError(f"{path}: edge-list adjacency needs the number of agents")
    adjacency = np.zeros((n, n), dtype=np.int8)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        next(reader)  # header, already inspected
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise InputDataError(f"{path}:{lineno}: expected two fields")
            try:
                i, j = int(row[0]), int(row[1])
            except ValueError:
                raise InputDataError(f"{path}:{lineno}: non-integer edge endpoint") from None
            if i == j:
                raise InputDataError(f"{path}:{lineno}: self-link ({i},{j}) is not allowed")
            if not (1 <= i <= n and 1 <= j <= n):
                raise InputDataError(f"{path}:{lineno}: endpoint outside 1..{n}")
            adjacency[i - 1, j - 1] = 1
            adjacency[j - 1, i - 1] = 1
    return adjacency


def read_adjacency(path, n: int | None = None) -> np.ndarray:
    """Read a dense 0/1 CSV or an ``i,j``-headed edge list.

    Validation failures are reported distinctly: non-binary entries, nonzero
    diagonal, asymmetry, and (against ``n``) dimension mismatch.
    """
    path = Path(path)
    with open(path) as handle:
        first = handle.readline()
    if not first:
        raise InputDataError(f"{path}: adjacency file is empty")
    if [f.strip() for f in first.strip().split(",")] == ["i", "j"]:
        return _read_edge_list(path, n)
    try:
        dense = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError:
        raise InputDataError(f"{path}: could not parse dense adjacency values") from None
    if dense.shape[0] != dense.shape[1]:
        raise InputDataError(
            f"{path}: dense adjacency must be square, got {dense.shape[0]}x{dense.shape[1]}"
        )
    if not np.isin(dense, (0.0, 1.0)).all():
        raise InputDataError(f"{path}: adjacency entries must be binary (0 or 1)")
    if np.diagonal(dense).any():
        raise InputDataError(f"{path}: adjacency has nonzero diagonal entries (self-links)")
    if not np.array_equal(dense, dense.T):
        raise InputDataError(f"{path}: adjacency must be symmetric")
    if n is not None and dense.shape[0] != n:
        raise InputDataError(
            f"{path}: adjacency has {dense.shape[0]} rows but the outcome file has {n}"
        )
    return dense.astype(np.int8)


def write_truth_csv(path, types, influence) -> None:
    types = np.asarray(types, dtype=float)
    influence = np.asarray(influence, dtype=float)
    with open(path, "w", newline="") as handle:
        handle.write("type,influence\n")
        for w, lam in zip(types, influence):
            handle.write(f"{_fmt(w)},{_fmt(lam)}\n")


def write_influence_csv(path, influence) -> None:
    influence = np.asarray(influence, dtype=float)
    with open(path, "w", newline="") as handle:
        handle.write("agent,influence\n")
        for i, value in enumerate(influence, start=1):
            handle.write(f"{i},{_fmt(value)}\n")


def write_distance_csv(path, distances) -> None:
    distances = np.asarray(distances, dtype=float)
    with open(path, "w", newline="") as handle:
        for row in distances:
            handle.write(",".join(_fmt(v) for v in row) + "\n")


def write_bound_report_csv(path, report) -> None:
    """Rows: pair_index,u,v,delta,d,bound,pass."""
    with open(path, "w", newline="") as handle:
        handle.write("pair_index,u,v,delta,d,bound,pass\n")
        for idx in range(report.n_pairs):
            handle.write(
                ",".join(
                    [
                        str(idx),
                        _fmt(report.u[idx]),
                        _fmt(report.v[idx]),
                        _fmt(report.delta[idx]),
                        _fmt(report.d[idx]),
                        _fmt(report.bound[idx]),
                        str(bool(report.passed[idx])).lower(),
                    ]
                )
                + "\n"
            )
