"""Independent reference minimizer for the convex clustering objective.

Solves the identical objective by accelerated proximal gradient on its dual:
the conjugate of the weighted l1 penalty is a box indicator, so the dual is a
smooth quadratic over a box and the proximal step is a clip.  The primal
iterate is recovered in closed form and certified by the duality gap, which
upper-bounds its suboptimality.  Shares no code path with the ADMM solver.
"""

from __future__ import annotations

import numpy as np

from convexcluster.solver import PAPER, _fidelity_factor, incidence
from convexcluster.weights import EdgeSet


def reference_minimizer(A, edges: EdgeSet, c: float, convention: str = PAPER,
                        gap_tol: float = 1e-11, max_iter: int = 200000):
    """Return (X, primal objective, duality gap) for the given problem."""
    A = np.asarray(A, dtype=float)
    a = _fidelity_factor(convention)
    if edges.n_edges == 0 or c == 0:
        return A.copy(), 0.0, 0.0

    E = incidence(edges).toarray()
    EA = E @ A
    bound = c * edges.weights[:, None]
    lam_max = float(np.linalg.eigvalsh(E @ E.T).max())
    step = 2.0 * a / lam_max

    def primal_value(X):
        diffs = E @ X
        return a * float(np.sum((A - X) ** 2)) + c * float(
            edges.weights @ np.abs(diffs).sum(axis=1))

    def dual_value(Y):
        G = E.T @ Y
        return -float(np.sum(G ** 2)) / (4.0 * a) + float(np.sum(Y * EA))

    Y = np.zeros_like(EA)
    V = Y.copy()
    t = 1.0
    scale = 1.0 + abs(primal_value(A))
    gap = np.inf
    X = A.copy()
    for it in range(max_iter):
        grad = (E @ (E.T @ V)) / (2.0 * a) - EA
        Y_new = np.clip(V - step * grad, -bound, bound)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        V = Y_new + ((t - 1.0) / t_new) * (Y_new - Y)
        Y, t = Y_new, t_new
        if it % 20 == 19 or it == max_iter - 1:
            X = A - (E.T @ Y) / (2.0 * a)
            gap = primal_value(X) - dual_value(Y)
            if gap <= gap_tol * scale:
                break
    X = A - (E.T @ Y) / (2.0 * a)
    return X, primal_value(X), primal_value(X) - dual_value(Y)
