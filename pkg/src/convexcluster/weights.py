"""Gaussian-kernel pair weights and k-nearest-neighbor graph sparsification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .core import check_data


@dataclass(frozen=True)
class KernelParams:
    """Kernel bandwidth and neighbor count; ``knn`` may be an int or "full"."""

    r: float = 0.0
    knn: int | str = 5


@dataclass
class EdgeSet:
    """Sparse undirected edge list over m nodes.

    ``pairs`` is (E, 2) with i < j sorted lexicographically, ``weights`` the
    matching positive weights.  Zero-weight pairs are never stored: they do
    not contribute to the penalty.
    """

    m: int
    pairs: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.pairs.shape[0] != self.weights.shape[0]:
            raise ValueError("pairs and weights length mismatch")
        if self.pairs.size:
            i, j = self.pairs[:, 0], self.pairs[:, 1]
            if np.any(i < 0) or np.any(j >= self.m) or np.any(i >= j):
                raise ValueError("edges must satisfy 0 <= i < j < m")
            order = np.lexsort((j, i))
            self.pairs = self.pairs[order]
            self.weights = self.weights[order]
            key = self.pairs[:, 0] * self.m + self.pairs[:, 1]
            if np.any(np.diff(key) == 0):
                raise ValueError("duplicate edges")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise ValueError("weights must be finite and nonnegative")
        keep = self.weights > 0
        if not np.all(keep):
            self.pairs = self.pairs[keep]
            self.weights = self.weights[keep]

    @property
    def n_edges(self) -> int:
        return int(self.pairs.shape[0])


def gaussian_weights(A, r: float) -> np.ndarray:
    """Kernel weight exp(-r * ||A_i - A_j||^2) for every pair.

    Returns a condensed vector of length C(m,2) in lexicographic pair order
    (the row order of the difference operator).  Values lie in (0, 1]; they
    may underflow to exactly 0.0 for very large ``r * dist^2``.
    """
    A = check_data(A)
    if r < 0:
        raise ValueError(f"kernel bandwidth r must be >= 0, got {r}")
    if A.shape[0] < 2:
        return np.empty(0)
    d2 = pdist(A, metric="sqeuclidean")
    return np.exp(-r * d2)


def knn_sparsify(A, gamma: np.ndarray, knn: int | str) -> EdgeSet:
    """Keep the edge (i, j) iff one endpoint is among the other's knn nearest.

    The union rule (rather than intersection) keeps the graph connected more
    often at small k.  Equidistant neighbors are broken by ascending index.
    ``knn="full"`` keeps every pair.
    """
    A = check_data(A)
    m = A.shape[0]
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (m * (m - 1) // 2,):
        raise ValueError("gamma must be a condensed vector over all pairs")

    ii, jj = np.triu_indices(m, k=1)
    if knn == "full":
        return EdgeSet(m=m, pairs=np.column_stack([ii, jj]), weights=gamma)
    k = int(knn)
    if not (1 <= k <= m - 1):
        raise ValueError(f"knn must be in [1, m-1] or 'full', got {knn}")

    d2 = squareform(pdist(A, metric="sqeuclidean"))
    np.fill_diagonal(d2, np.inf)
    # stable argsort: ties among equidistant neighbors resolve to lower index
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
    keep = np.zeros((m, m), dtype=bool)
    rows = np.repeat(np.arange(m), k)
    keep[rows, nearest.ravel()] = True
    keep |= keep.T
    mask = keep[ii, jj]
    return EdgeSet(m=m, pairs=np.column_stack([ii[mask], jj[mask]]), weights=gamma[mask])


def gaussian_edges(A, r: float, knn: int | str = 5) -> EdgeSet:
    """Convenience: Gaussian weights followed by knn sparsification."""
    return knn_sparsify(A, gaussian_weights(A, r), knn)
