"""Synthetic dataset generators and CSV I/O.

All generators are deterministic functions of (spec, seed) built on a
counter-based RNG (Philox), so outputs reproduce across platforms.  The
algorithm identifier is exported for embedding in run reports.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import RNG_ALGORITHM, check_data, rng

__all__ = [
    "RNG_ALGORITHM", "BallModelSpec", "GmmSpec", "stochastic_ball",
    "gaussian_mixture", "paper_gaussians", "embedded_circles",
    "load_csv", "save_csv",
]


@dataclass(frozen=True)
class BallModelSpec:
    """Clusters drawn i.i.d. from a rotation-invariant unit-ball distribution
    around the given centers."""

    centers: np.ndarray
    per_cluster: int
    distribution: str = "uniform_ball"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "centers", np.atleast_2d(np.asarray(self.centers, dtype=float)))
        if self.per_cluster < 1:
            raise ValueError(f"per_cluster must be >= 1, got {self.per_cluster}")
        if self.distribution not in ("uniform_ball", "uniform_sphere"):
            raise ValueError(f"unknown distribution {self.distribution!r}")


def _unit_directions(gen: np.random.Generator, count: int, n: int) -> np.ndarray:
    v = gen.standard_normal((count, n))
    norms = np.linalg.norm(v, axis=1)
    while np.any(norms < 1e-12):  # essentially never; keeps the map total
        bad = norms < 1e-12
        v[bad] = gen.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(v, axis=1)
    return v / norms[:, None]


def stochastic_ball(spec: BallModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Sample the ball model; returns (data, true labels).

    ``uniform_ball`` draws a uniform point of the unit ball (radius u^(1/n)
    for uniform u), ``uniform_sphere`` a uniform point of its boundary.
    Every sample lies within distance 1 of its cluster center.
    """
    gen = rng(spec.seed)
    K, n = spec.centers.shape
    rows = []
    labels = np.repeat(np.arange(K), spec.per_cluster)
    for k in range(K):
        dirs = _unit_directions(gen, spec.per_cluster, n)
        if spec.distribution == "uniform_ball":
            radii = gen.uniform(size=spec.per_cluster) ** (1.0 / n)
        else:
            radii = np.ones(spec.per_cluster)
        rows.append(spec.centers[k] + dirs * radii[:, None])
    A = np.vstack(rows)
    # support constraint is a hard guarantee of the model
    assert np.all(np.linalg.norm(A - spec.centers[labels], axis=1) <= 1.0 + 1e-12)
    return A, labels


@dataclass(frozen=True)
class GmmSpec:
    """Mixture of Gaussians: component i with probability weights[i]."""

    weights: np.ndarray
    means: np.ndarray
    covariances: tuple
    m: int
    seed: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        covs = tuple(np.asarray(S, dtype=float) for S in self.covariances)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "covariances", covs)
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")
        if np.any(w < 0):
            raise ValueError("mixture weights must be nonnegative")
        if mu.shape[0] != w.size or len(covs) != w.size:
            raise ValueError("need one mean and one covariance per component")
        if self.m < 1:
            raise ValueError(f"sample count must be >= 1, got {self.m}")


def _cov_sqrt(S: np.ndarray) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if not np.allclose(S, S.T, atol=1e-10):
        raise ValueError("covariance must be symmetric")
    w, V = np.linalg.eigh(S)
    if w.min() < -1e-10 * max(1.0, abs(w.max())):
        raise ValueError("covariance must be positive semidefinite")
    return V @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ V.T


def gaussian_mixture(spec: GmmSpec) -> tuple[np.ndarray, np.ndarray]:
    """Sample the mixture; returns (data, component labels)."""
    gen = rng(spec.seed)
    roots = [_cov_sqrt(S) for S in spec.covariances]
    K, n = spec.means.shape
    labels = gen.choice(K, size=spec.m, p=spec.weights)
    z = gen.standard_normal((spec.m, n))
    A = np.empty((spec.m, n))
    for k in range(K):
        sel = labels == k
        A[sel] = spec.means[k] + z[sel] @ roots[k].T
    return A, labels


def paper_gaussians(sigma: float, seed: int = 0) -> tuple[np.ndarray, np.ndarray, float]:
    """The desk-scale Gaussian benchmark: 30 points in R^100, three equal
    clusters at 0, +3, -3 (per coordinate), spherical variance sigma^2.

    Returns (data, labels, r) with the recommended bandwidth
    r = 0.02 (2 sigma^2 + 5 sigma).
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    n, per = 100, 10
    gen = rng(seed)
    mus = np.array([0.0, 3.0, -3.0])
    rows = [mus[k] * np.ones(n) + sigma * gen.standard_normal((per, n)) for k in range(3)]
    labels = np.repeat(np.arange(3), per)
    r = 0.02 * (2.0 * sigma ** 2 + 5.0 * sigma)
    return np.vstack(rows), labels, r


def embedded_circles(seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Two embedded circles in the plane: 250 points from a standard 2-d
    Gaussian inside 250 points on a noisy ring (radius N(5, 0.25^2), angle
    uniform)."""
    gen = rng(seed)
    inner = gen.standard_normal((250, 2))
    radii = gen.normal(loc=5.0, scale=0.25, size=250)
    angles = gen.uniform(0.0, 2.0 * math.pi, size=250)
    outer = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    labels = np.repeat(np.arange(2), 250)
    return np.vstack([inner, outer]), labels


def save_csv(path, A, labels=None, header: list[str] | None = None,
             label_name: str = "label") -> None:
    """Write observations (and an optional trailing label column) as CSV.

    Values are written with shortest round-trip precision, so decimal-exact
    data reloads bit-identically.  UTF-8, comma separated, one optional
    header row.
    """
    A = check_data(A)
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (A.shape[0],):
            raise ValueError("labels length must match row count")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header is not None:
            if len(header) != A.shape[1]:
                raise ValueError("header length must match column count")
            w.writerow(list(header) + ([label_name] if labels is not None else []))
        elif labels is not None:
            w.writerow([f"x{q}" for q in range(A.shape[1])] + [label_name])
        for i in range(A.shape[0]):
            row = [repr(float(v)) for v in A[i]]
            if labels is not None:
                row.append(str(int(labels[i])))
            w.writerow(row)


def load_csv(path, label_column: str | int | None = None):
    """Read a rectangular numeric CSV; rows are observations.

    ``label_column`` (a header name or column index) is extracted as integer
    truth labels and excluded from the features.  Ragged rows, non-numeric
    feature cells, and a missing label column are errors.  Returns
    (data, labels_or_None, header_or_None).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows (widths {sorted(widths)})")

    header: list[str] | None = None
    first = rows[0]
    def _numeric(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False
    if not all(_numeric(c) for c in first):
        header = [c.strip() for c in first]
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: header but no data rows")

    label_idx: int | None = None
    if label_column is not None:
        if isinstance(label_column, str):
            if header is None or label_column not in header:
                raise ValueError(f"{path}: label column {label_column!r} not found")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            ncol = len(rows[0])
            if not (-ncol <= label_idx < ncol):
                raise ValueError(f"{path}: label column index {label_idx} out of range")
            label_idx %= ncol

    data = []
    labels = []
    for ln, row in enumerate(rows, start=1):
        vals = []
        for ci, cell in enumerate(row):
            if ci == label_idx:
                labels.append(cell.strip())
                continue
            try:
                vals.append(float(cell))
            except ValueError:
                raise ValueError(f"{path}: non-numeric feature cell {cell!r} in data row {ln}")
        data.append(vals)
    A = check_data(np.array(data, dtype=float))

    out_labels = None
    if label_idx is not None:
        try:
            out_labels = np.array([int(float(s)) for s in labels], dtype=np.int64)
        except ValueError:
            # map arbitrary label strings to dense integer ids
            seen: dict[str, int] = {}
            out_labels = np.array([seen.setdefault(s, len(seen)) for s in labels], dtype=np.int64)
    feat_header = None
    if header is not None:
        feat_header = [h for ci, h in enumerate(header) if ci != label_idx]
    return A, out_labels, feat_header
