"""Turn a centroid matrix into a partition; sweep c for a regularization path."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import pdist

from .core import check_data, pos_pair
from .solver import SolverConfig, SolverState, admm_solve
from .weights import EdgeSet


@dataclass(frozen=True)
class Assignment:
    """Cluster labels in canonical form: ids 0..k-1 ordered by first occurrence."""

    labels: np.ndarray
    k: int


def canonical_labels(raw) -> Assignment:
    """Relabel arbitrary cluster ids to 0..k-1 by first occurrence."""
    raw = np.asarray(raw)
    if raw.ndim != 1 or raw.size == 0:
        raise ValueError("labels must be a non-empty 1-d sequence")
    mapping: dict = {}
    out = np.empty(raw.size, dtype=np.int64)
    for pos, v in enumerate(raw.tolist()):
        if v not in mapping:
            mapping[v] = len(mapping)
        out[pos] = mapping[v]
    return Assignment(labels=out, k=len(mapping))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, x: int, y: int):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def extract_clusters(X, merge_tol: float = 1e-8) -> Assignment:
    """Group rows whose pairwise distance is at most ``merge_tol``.

    Merging is transitive (union-find over all pairs), so chains of
    borderline rows collapse into one cluster.  ``merge_tol=0`` groups only
    exactly equal rows.
    """
    X = check_data(X)
    if merge_tol < 0:
        raise ValueError(f"merge_tol must be >= 0, got {merge_tol}")
    m = X.shape[0]
    if m == 1:
        return Assignment(labels=np.zeros(1, dtype=np.int64), k=1)
    close = pdist(X) <= merge_tol
    uf = _UnionFind(m)
    for p in np.nonzero(close)[0]:
        i, j = pos_pair(int(p), m)
        uf.union(i, j)
    return canonical_labels([uf.find(i) for i in range(m)])


@dataclass(frozen=True)
class PathPoint:
    c: float
    assignment: Assignment
    n_clusters: int
    iters: int
    converged: bool
    final_change: float


@dataclass(frozen=True)
class PathResult:
    points: tuple[PathPoint, ...]

    @property
    def c_grid(self) -> np.ndarray:
        return np.array([p.c for p in self.points])

    @property
    def cluster_counts(self) -> np.ndarray:
        return np.array([p.n_clusters for p in self.points])

    @property
    def counts_non_increasing(self) -> bool:
        """Cited path behavior; violations are worth reporting, not fatal."""
        return bool(np.all(np.diff(self.cluster_counts) <= 0))


def regularization_path(A, edges: EdgeSet, c_grid, cfg: SolverConfig,
                        merge_tol: float | None = None,
                        warm_start: bool = True) -> PathResult:
    """Solve along an ascending c grid, warm-starting each point from the last.

    All of X, Z, Lam are carried between grid points; the warm start targets
    the same unique minimizer, but the iterate-change stopping rule can fire
    early while clusters are still drifting together, so ``warm_start=False``
    trades speed for robust counts.  ``merge_tol`` defaults to 10 * cfg.tol:
    a solve stopped at tolerance t leaves fused rows about t apart, so the
    extraction threshold must sit above it.
    """
    c_grid = np.asarray(c_grid, dtype=float)
    if c_grid.ndim != 1 or c_grid.size == 0:
        raise ValueError("c grid must be a non-empty 1-d sequence")
    if np.any(c_grid < 0):
        raise ValueError("c grid values must be >= 0")
    if c_grid.size > 1 and np.any(np.diff(c_grid) <= 0):
        raise ValueError("c grid must be strictly ascending")
    if merge_tol is None:
        merge_tol = 10.0 * cfg.tol

    points = []
    state: SolverState | None = None
    for c in c_grid:
        state = admm_solve(A, edges, replace(cfg, c=float(c)),
                           init=state if warm_start else None)
        assign = extract_clusters(state.X, merge_tol)
        points.append(PathPoint(c=float(c), assignment=assign, n_clusters=assign.k,
                                iters=state.iters, converged=state.converged,
                                final_change=state.final_change))
    return PathResult(points=tuple(points))


def select_c_for_k(path: PathResult, k: int) -> float | None:
    """Smallest grid c that produced exactly k clusters, else None."""
    for point in path.points:
        if point.n_clusters == k:
            return point.c
    return None


def find_c_for_k(A, edges: EdgeSet, k: int, cfg: SolverConfig, c_grid,
                 merge_tol: float | None = None, max_bisect: int = 40) -> PathPoint | None:
    """Locate a grid (or bisected) c whose extracted partition has k clusters.

    Runs the regularization path over ``c_grid`` first; when the grid steps
    over k (counts drop from above k to below between neighbors), refines by
    geometric bisection.  All solves are cold-started: warm starts can stop
    early mid-merge and corrupt the bracket.  Returns None when no such c is
    found, e.g. when two fusion events coincide.
    """
    if merge_tol is None:
        merge_tol = 10.0 * cfg.tol
    path = regularization_path(A, edges, c_grid, cfg, merge_tol, warm_start=False)
    c = select_c_for_k(path, k)
    if c is not None:
        return next(p for p in path.points if p.c == c)

    counts = path.cluster_counts
    above = np.nonzero(counts > k)[0]
    below = np.nonzero(counts < k)[0]
    if above.size == 0 or below.size == 0 or below.min() < above.max():
        return None
    lo = float(path.points[above.max()].c)
    hi = float(path.points[below.min()].c)
    if lo <= 0:
        lo = hi * 1e-9
    for _ in range(max_bisect):
        mid = float(np.sqrt(lo * hi))
        state = admm_solve(A, edges, replace(cfg, c=mid))
        assign = extract_clusters(state.X, merge_tol)
        if assign.k == k:
            return PathPoint(c=mid, assignment=assign, n_clusters=assign.k,
                             iters=state.iters, converged=state.converged,
                             final_change=state.final_change)
        if assign.k > k:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-12:
            break
    return None
