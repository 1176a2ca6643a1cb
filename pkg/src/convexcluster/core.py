"""Shared data model: column centering, the complete-graph difference operator,
and linearized pair-index bookkeeping.

Conventions
-----------
Data matrices are m x n numpy arrays; rows are observations.  Row indices are
0-based everywhere inside the package.  The linearized pair index ``p`` follows
the mathematical convention and is 1-based: pairs (i, j), i < j, are
enumerated lexicographically, which is exactly the row order of the
difference operator.  ``pair_pos`` / ``pos_pair`` are the 0-based equivalents
used for array addressing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

RNG_ALGORITHM = "philox4x64"


def rng(seed: int) -> np.random.Generator:
    """Counter-based seeded generator (Philox); reproducible across platforms."""
    return np.random.Generator(np.random.Philox(seed))


def check_data(A) -> np.ndarray:
    """Validate an observation matrix and return it as a float array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"data matrix must be 2-dimensional, got shape {A.shape}")
    m, n = A.shape
    if m < 1 or n < 1:
        raise ValueError(f"data matrix must have at least one row and one column, got {m}x{n}")
    if not np.all(np.isfinite(A)):
        raise ValueError("data matrix contains non-finite entries")
    return A


@dataclass(frozen=True)
class CenteredData:
    """Column-centered data and the removed per-column means."""

    centered: np.ndarray
    column_means: np.ndarray


def center_columns(A) -> CenteredData:
    """Subtract the per-column mean from every row.

    The clustering model is invariant under this transform: the minimizer of
    the penalized objective on the centered data is the minimizer on the raw
    data shifted by the column means, so cluster memberships are unchanged.
    """
    A = check_data(A)
    means = A.mean(axis=0)
    return CenteredData(centered=A - means, column_means=means)


def difference_operator(m: int) -> sp.csr_matrix:
    """Sparse C(m,2) x m operator mapping X to all row differences X_i - X_j.

    Row p (0-based) corresponds to the p-th lexicographic pair (i, j), i < j,
    and equals e_i - e_j.  Two nonzeros per row; never densify for large m.
    """
    if m < 2:
        raise ValueError(f"difference operator needs m >= 2, got {m}")
    ii, jj = np.triu_indices(m, k=1)
    npairs = ii.size
    rows = np.repeat(np.arange(npairs), 2)
    cols = np.empty(2 * npairs, dtype=np.int64)
    cols[0::2] = ii
    cols[1::2] = jj
    data = np.tile(np.array([1.0, -1.0]), npairs)
    return sp.csr_matrix((data, (rows, cols)), shape=(npairs, m))


def all_pairs(m: int) -> np.ndarray:
    """(C(m,2), 2) array of 0-based pairs (i, j), i < j, lexicographic."""
    ii, jj = np.triu_indices(m, k=1)
    return np.column_stack([ii, jj]).astype(np.int64)


def pair_pos(i: int, j: int, m: int) -> int:
    """0-based row position of pair (i, j) (0-based, i < j) in the operator."""
    if not (0 <= i < j < m):
        raise ValueError(f"need 0 <= i < j < m, got i={i}, j={j}, m={m}")
    return i * (2 * m - i - 1) // 2 + (j - i - 1)


def pos_pair(p: int, m: int) -> tuple[int, int]:
    """Inverse of :func:`pair_pos`."""
    total = m * (m - 1) // 2
    if not (0 <= p < total):
        raise ValueError(f"pair position {p} out of range for m={m}")
    # Solve i*(2m - i - 1)/2 <= p by the quadratic formula, then adjust.
    disc = (2 * m - 1) ** 2 - 8 * p
    i = (2 * m - 1 - math.isqrt(disc)) // 2
    while i * (2 * m - i - 1) // 2 > p:
        i -= 1
    while (i + 1) * (2 * m - i - 2) // 2 <= p:
        i += 1
    j = p - i * (2 * m - i - 1) // 2 + i + 1
    return i, j


def pair_row_index(i: int, j: int, m: int) -> int:
    """1-based linear index of the 1-based pair (i, j), i < j <= m."""
    if not (1 <= i < j <= m):
        raise ValueError(f"need 1 <= i < j <= m, got i={i}, j={j}, m={m}")
    return pair_pos(i - 1, j - 1, m) + 1


def pair_from_row_index(p: int, m: int) -> tuple[int, int]:
    """Inverse of :func:`pair_row_index` (1-based on both sides)."""
    i, j = pos_pair(p - 1, m)
    return i + 1, j + 1


def contiguous_order(labels) -> np.ndarray:
    """Permutation putting each cluster into a contiguous block.

    Clusters are ordered by first occurrence; the sort is stable, so row order
    inside each cluster is preserved.  Apply as ``A[perm]`` and invert with
    ``np.argsort(perm)``.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a non-empty 1-d sequence")
    _, first_rank = np.unique(labels, return_inverse=True)
    # re-rank by first occurrence rather than label value
    order_of_value: dict[int, int] = {}
    ranks = np.empty(labels.size, dtype=np.int64)
    for pos, v in enumerate(first_rank):
        if v not in order_of_value:
            order_of_value[v] = len(order_of_value)
        ranks[pos] = order_of_value[v]
    return np.argsort(ranks, kind="stable")


@dataclass(frozen=True)
class IndexSets:
    """Partition of the C(m,2) linearized pair indices by cluster membership.

    ``within``/``between`` hold 1-based indices (the math convention);
    ``*_rows`` helpers return sorted 0-based arrays for addressing the rows of
    ``difference_operator(m) @ X``.
    """

    m: int
    sizes: tuple[int, ...]
    blocks: tuple[tuple[int, int], ...]
    within: frozenset[int]
    between: frozenset[int]
    between_by_pair: dict[tuple[int, int], frozenset[int]] = field(repr=False)

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)

    def within_rows(self) -> np.ndarray:
        return np.array(sorted(self.within), dtype=np.int64) - 1

    def between_rows(self) -> np.ndarray:
        return np.array(sorted(self.between), dtype=np.int64) - 1

    def pair_rows(self, k: int, l: int) -> np.ndarray:
        return np.array(sorted(self.between_by_pair[(k, l)]), dtype=np.int64) - 1


def _block_pairs(m: int, rows_a: np.ndarray, rows_b: np.ndarray) -> np.ndarray:
    """0-based linear positions of all pairs (i, j) with i in a, j in b, i < j."""
    ii, jj = np.meshgrid(rows_a, rows_b, indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    keep = ii < jj
    ii, jj = ii[keep], jj[keep]
    return ii * (2 * m - ii - 1) // 2 + (jj - ii - 1)


def index_sets(labels) -> IndexSets:
    """Build the within/between pair-index sets for contiguous cluster labels.

    Raises if any cluster occupies a non-contiguous index block; callers
    permute rows first (see :func:`contiguous_order`).
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a non-empty 1-d sequence")
    m = labels.size
    boundaries = np.nonzero(labels[1:] != labels[:-1])[0] + 1
    starts = np.concatenate([[0], boundaries])
    stops = np.concatenate([boundaries, [m]])
    block_labels = labels[starts]
    if len(set(block_labels.tolist())) != len(block_labels):
        raise ValueError("labels are not contiguous: a cluster id appears in disjoint blocks")

    sizes = tuple(int(b - a) for a, b in zip(starts, stops))
    blocks = tuple((int(a), int(b)) for a, b in zip(starts, stops))
    K = len(sizes)

    within: set[int] = set()
    for a, b in blocks:
        idx = np.arange(a, b)
        if idx.size >= 2:
            within.update((_block_pairs(m, idx, idx) + 1).tolist())

    between_by_pair: dict[tuple[int, int], frozenset[int]] = {}
    between: set[int] = set()
    for k in range(K):
        ak, bk = blocks[k]
        for l in range(k + 1, K):
            al, bl = blocks[l]
            ps = _block_pairs(m, np.arange(ak, bk), np.arange(al, bl)) + 1
            pset = frozenset(int(p) for p in ps)
            between_by_pair[(k, l)] = pset
            between.update(pset)

    return IndexSets(
        m=m,
        sizes=sizes,
        blocks=blocks,
        within=frozenset(within),
        between=frozenset(between),
        between_by_pair=between_by_pair,
    )
