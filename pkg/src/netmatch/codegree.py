"""Empirical codegree distances from the squared adjacency matrix.

The squared adjacency M = D @ D counts shared neighbors: M[t, i] is the
number of agents linked to both t and i. The distance between agents i and j
is the root average squared difference of their M columns after scaling:

    distance(i, j)^2 = (1/n) * sum_t ((1/n) * sum_s D[t,s] (D[i,s]-D[j,s]))^2
                     = n^{-3} * sum_t (M[t,i] - M[t,j])^2

Sums over t and s run over the full index range including i, j, and t = s;
the zero diagonal of D makes the self terms harmless. Note the 1/n inside
and outside; this is not an (n-2)-style normalization.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import check_adjacency

METHODS = ("gram", "reference")


def squared_adjacency(adjacency) -> np.ndarray:
    """Shared-neighbor counts M = D @ D as an int64 matrix.

    The product is accumulated in float64 BLAS and cast back: counts are
    integers below 2**53 for any n this package targets, so the result is
    exact, and the dense float product is orders of magnitude faster than
    numpy's integer matmul.
    """
    d = check_adjacency(adjacency).astype(float)
    return np.rint(d @ d).astype(np.int64)


def _distance_matrix_gram(d: np.ndarray) -> np.ndarray:
    n = d.shape[0]
    m = d.astype(float) @ d.astype(float)
    gram = m @ m
    diag = np.diagonal(gram)
    sq = (diag[:, None] - 2.0 * gram + diag[None, :]) / float(n) ** 3
    np.fill_diagonal(sq, 0.0)
    return np.sqrt(np.maximum(sq, 0.0))


def _distance_matrix_reference(d: np.ndarray) -> np.ndarray:
    """Literal triple sum, one column difference at a time. O(n^4)."""
    n = d.shape[0]
    dense = d.astype(float)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            codegree_gap = dense @ (dense[:, i] - dense[:, j]) / n
            value = np.sqrt(np.mean(codegree_gap**2))
            out[i, j] = value
            out[j, i] = value
    return out


def codegree_distance_matrix(adjacency, method: str = "gram") -> np.ndarray:
    """Pairwise distance between columns of the squared adjacency matrix.

    Parameters
    ----------
    adjacency : array-like of shape (n, n)
        Binary symmetric adjacency matrix with zero diagonal.
    method : {"gram", "reference"}
        "gram" evaluates the distances through the Gram matrix of M
        (two dense matrix products, fine for thousands of agents);
        "reference" evaluates the defining triple sum directly and is
        meant for cross-checking at small n only.

    Returns
    -------
    ndarray of shape (n, n)
        Symmetric, zero diagonal, entries in [0, 1]. As an L2 distance
        between scaled columns it satisfies the triangle inequality.
    """
    d = check_adjacency(adjacency)
    if method == "gram":
        return _distance_matrix_gram(d)
    if method == "reference":
        return _distance_matrix_reference(d)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


class CodegreeDistance(TransformerMixin, BaseEstimator):
    """Transformer mapping an adjacency matrix to its codegree distances.

    Stateless: ``fit`` only validates. ``transform`` returns the (n, n)
    distance matrix, ready to feed :class:`netmatch.estimate.NetworkRegression`
    through its ``distances`` fit parameter.

    Parameters
    ----------
    method : {"gram", "reference"}, default="gram"
        Computation route, see :func:`codegree_distance_matrix`.
    """

    def __init__(self, method: str = "gram"):
        self.method = method

    def fit(self, X, y=None):
        X = check_adjacency(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        return codegree_distance_matrix(X, method=self.method)
