"""Composite Gauss-Legendre quadrature on the unit interval.

All population-level integrals in this package are evaluated against one
shared discrete measure: a set of nodes in [0, 1] with positive weights that
sum to one. Using a single measure everywhere keeps the discretized distance
geometry internally consistent (see :mod:`netmatch.graphon`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_NODES = 512
_POINTS_PER_PANEL = 8


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and weights of a quadrature rule on [0, 1].

    Invariants enforced at construction: nodes strictly increasing and
    contained in [0, 1]; weights positive and summing to one within 1e-12.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or weights.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be matching one-dimensional arrays")
        if nodes.size == 0:
            raise ValueError("quadrature grid must contain at least one node")
        if nodes[0] < 0.0 or nodes[-1] > 1.0 or np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing within [0, 1]")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values) -> float:
        """Weighted sum of ``values`` sampled at the grid nodes."""
        return float(np.dot(np.asarray(values, dtype=float), self.weights))

    @classmethod
    def composite_gauss_legendre(
        cls,
        n_nodes: int = DEFAULT_NODES,
        breakpoints=None,
        points_per_panel: int = _POINTS_PER_PANEL,
    ) -> "QuadratureGrid":
        """Build a composite Gauss-Legendre rule with roughly ``n_nodes`` nodes.

        ``breakpoints`` lists interior points of [0, 1] that panel edges must
        hit, so integrands that are smooth between breakpoints (for example
        piecewise-constant link functions) are integrated to machine accuracy.
        Panels are allocated to cells proportionally to cell width, with at
        least one panel per cell.
        """
        if n_nodes < points_per_panel:
            raise ValueError("n_nodes must be at least one panel's worth of points")
        edges = np.array([0.0, 1.0])
        if breakpoints is not None:
            interior = np.asarray(breakpoints, dtype=float)
            interior = interior[(interior > 0.0) & (interior < 1.0)]
            edges = np.unique(np.concatenate([edges, interior]))
        widths = np.diff(edges)
        total_panels = max(n_nodes // points_per_panel, widths.size)
        panels = np.maximum(1, np.floor(total_panels * widths).astype(int))
        # Distribute any remaining panels to the widest cells.
        while panels.sum() < total_panels:
            panels[np.argmax(widths / panels)] += 1

        ref_nodes, ref_weights = np.polynomial.legendre.leggauss(points_per_panel)
        nodes = []
        weights = []
        for left, width, count in zip(edges[:-1], widths, panels):
            sub = left + width / count * np.arange(count + 1)
            for a, b in zip(sub[:-1], sub[1:]):
                half = 0.5 * (b - a)
                nodes.append(0.5 * (a + b) + half * ref_nodes)
                weights.append(half * ref_weights)
        grid = cls(np.concatenate(nodes), np.concatenate(weights))
        # Map of [-1, 1] reference weights preserves the total mass exactly up
        # to rounding; renormalize the residual so the sum-to-one invariant
        # holds regardless of panel count.
        total = grid.weights.sum()
        if total != 1.0:
            return cls(grid.nodes, grid.weights / total)
        return grid
