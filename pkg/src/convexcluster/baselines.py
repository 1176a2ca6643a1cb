"""Reference clusterers: Lloyd's k-means, k-means++ seeding, linkage clustering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .core import check_data, rng
from .extraction import Assignment, canonical_labels


@dataclass
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    iterations: int
    inertia: float
    inertia_history: np.ndarray


def _assign(A, centers):
    d2 = cdist(A, centers, metric="sqeuclidean")
    labels = np.argmin(d2, axis=1)  # ties go to the lowest center index
    return labels, d2


def lloyd(A, k: int, init_centers=None, max_iter: int = 300, seed: int = 0) -> KMeansResult:
    """Lloyd's alternating assignment / mean update.

    Initial centers are either supplied or drawn uniformly without
    replacement from the rows.  A cluster that empties is reseeded to the
    point currently farthest from its assigned center, which keeps the run
    deterministic.  Stops when assignments stabilize.
    """
    A = check_data(A)
    m = A.shape[0]
    if not (1 <= k <= m):
        raise ValueError(f"k must be in [1, m={m}], got {k}")
    if init_centers is not None:
        centers = np.array(init_centers, dtype=float, copy=True)
        if centers.shape != (k, A.shape[1]):
            raise ValueError(f"init_centers must be {k}x{A.shape[1]}")
    else:
        centers = A[rng(seed).choice(m, size=k, replace=False)].copy()

    labels = np.full(m, -1, dtype=np.int64)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        new_labels, d2 = _assign(A, centers)
        assigned = d2[np.arange(m), new_labels]
        # repair empty clusters before accepting the assignment
        for cid in range(k):
            if not np.any(new_labels == cid):
                far = int(np.argmax(assigned))
                centers[cid] = A[far]
                new_labels, d2 = _assign(A, centers)
                assigned = d2[np.arange(m), new_labels]
        history.append(float(assigned.sum()))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
        for cid in range(k):
            centers[cid] = A[labels == cid].mean(axis=0)

    labels, d2 = _assign(A, centers)
    inertia = float(d2[np.arange(m), labels].sum())
    return KMeansResult(centers=centers, labels=labels, iterations=it,
                        inertia=inertia, inertia_history=np.array(history))


def kmeanspp_init(A, k: int, seed: int = 0) -> np.ndarray:
    """D^2 seeding: each next center drawn proportionally to the squared
    distance from the nearest already-chosen center."""
    A = check_data(A)
    m = A.shape[0]
    if not (1 <= k <= m):
        raise ValueError(f"k must be in [1, m={m}], got {k}")
    gen = rng(seed)
    chosen = [int(gen.integers(m))]
    d2min = cdist(A, A[chosen[-1]][None, :], metric="sqeuclidean").ravel()
    while len(chosen) < k:
        total = d2min.sum()
        if total > 0:
            probs = d2min / total
            nxt = int(gen.choice(m, p=probs))
        else:
            # all remaining points coincide with chosen centers
            remaining = np.setdiff1d(np.arange(m), np.array(chosen))
            nxt = int(gen.choice(remaining))
        chosen.append(nxt)
        d2min = np.minimum(d2min, cdist(A, A[nxt][None, :], metric="sqeuclidean").ravel())
    return A[np.array(chosen)].copy()


def hierarchical(A, k: int, linkage: str = "single") -> Assignment:
    """Agglomerative clustering down to k clusters.

    ``single`` merges by minimum cross distance, ``average`` by the
    unweighted mean of all cross pairwise distances.  Among equally close
    cluster pairs the one with lexicographically smallest (i, j) wins, where
    a cluster is identified by its smallest original row index.
    """
    A = check_data(A)
    m = A.shape[0]
    if not (1 <= k <= m):
        raise ValueError(f"k must be in [1, m={m}], got {k}")
    if linkage not in ("single", "average"):
        raise ValueError(f"linkage must be 'single' or 'average', got {linkage!r}")

    if k == m:
        return canonical_labels(np.arange(m))

    D = squareform(pdist(A))
    work = D.copy()
    iu = np.tril_indices(m)
    work[iu] = np.inf  # keep only i < j candidates
    sizes = np.ones(m)
    member_of = np.arange(m)  # slot id = smallest member, merged slots die
    active = np.ones(m, dtype=bool)

    n_active = m
    while n_active > k:
        flat = int(np.argmin(work))
        a, b = divmod(flat, m)  # row-major argmin: lexicographic tie-break
        # merge b into a (a < b since the lower triangle is masked)
        for s in np.nonzero(active)[0]:
            if s == a or s == b:
                continue
            da = work[min(a, s), max(a, s)]
            db = work[min(b, s), max(b, s)]
            if linkage == "single":
                new = min(da, db)
            else:
                new = (sizes[a] * da + sizes[b] * db) / (sizes[a] + sizes[b])
            work[min(a, s), max(a, s)] = new
        sizes[a] += sizes[b]
        active[b] = False
        work[b, :] = np.inf
        work[:, b] = np.inf
        member_of[member_of == b] = a
        n_active -= 1

    return canonical_labels(member_of)
