import numpy as np
import pytest

from convexcluster.solver import (
    HALF,
    PAPER,
    SolverConfig,
    admm_solve,
    augmented_lagrangian,
    incidence,
    kkt_residual,
    objective,
    soft_threshold,
)
from convexcluster.weights import EdgeSet, gaussian_edges

from oracle import reference_minimizer

TWO_POINTS = np.array([[0.0], [2.0]])
TWO_EDGE = EdgeSet(m=2, pairs=[[0, 1]], weights=[1.0])


def tight(c, convention=PAPER, nu=1.0):
    return SolverConfig(c=c, nu=nu, tol=1e-11, max_iter=300000, convention=convention)


def test_soft_threshold_examples():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-0.5, 1.0) == 0.0
    assert soft_threshold(0.0, 0.0) == 0.0
    v = np.array([[3.0, -3.0], [0.5, -0.5]])
    out = soft_threshold(v, np.array([[1.0], [1.0]]))
    assert np.allclose(out, [[2.0, -2.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.1)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(c=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(c=1.0, nu=0.0)
    with pytest.raises(ValueError):
        SolverConfig(c=1.0, max_iter=0)
    with pytest.raises(ValueError):
        SolverConfig(c=1.0, convention="bogus")


def test_c_zero_returns_data_exactly():
    gen = np.random.default_rng(1)
    A = gen.normal(size=(6, 3))
    edges = gaussian_edges(A, 0.5, "full")
    state = admm_solve(A, edges, SolverConfig(c=0.0))
    assert np.array_equal(state.X, A)
    assert state.converged


def test_two_point_fusion_and_partial_shrinkage():
    # half fidelity: fusion threshold is c = 1; below it X = (c, 2 - c)
    fused = admm_solve(TWO_POINTS, TWO_EDGE, tight(2.5, HALF))
    assert np.allclose(fused.X, 1.0, atol=1e-9)
    partial = admm_solve(TWO_POINTS, TWO_EDGE, tight(0.5, HALF))
    assert np.allclose(partial.X, [[0.5], [1.5]], atol=1e-9)
    # paper convention rescales: same c gives half the shrinkage
    paper = admm_solve(TWO_POINTS, TWO_EDGE, tight(0.5, PAPER))
    assert np.allclose(paper.X, [[0.25], [1.75]], atol=1e-9)


def test_conventions_are_rescalings():
    gen = np.random.default_rng(2)
    A = gen.normal(size=(5, 2))
    edges = gaussian_edges(A, 0.3, "full")
    a = admm_solve(A, edges, tight(0.8, PAPER))
    b = admm_solve(A, edges, tight(0.4, HALF))
    assert np.allclose(a.X, b.X, atol=1e-8)


def test_objective_examples():
    A = np.array([[1.0, 2.0], [4.0, 6.0]])
    edges = EdgeSet(m=2, pairs=[[0, 1]], weights=[0.5])
    val = objective(A, A, edges, c=2.0)
    assert np.isclose(val, 2.0 * 0.5 * (3.0 + 4.0))
    gen = np.random.default_rng(0)
    X = gen.normal(size=A.shape)
    assert np.isclose(objective(A, X, edges, c=0.0), np.sum((A - X) ** 2))
    val = objective(TWO_POINTS, np.array([[1.0], [1.0]]), TWO_EDGE, c=1.0, convention=PAPER)
    assert np.isclose(val, 2.0)


def test_x_update_matches_dense_solve_and_descends():
    gen = np.random.default_rng(4)
    m, n = 6, 2
    A = gen.normal(size=(m, n))
    edges = gaussian_edges(A, 0.4, "full")
    c, nu = 0.7, 1.3
    cfg = SolverConfig(c=c, nu=nu, tol=1e-30, max_iter=1, convention=HALF)
    Z = gen.normal(size=(edges.n_edges, n))
    Lam = gen.normal(size=(edges.n_edges, n))
    X0 = gen.normal(size=(m, n))
    from convexcluster.solver import SolverState

    one = admm_solve(A, edges, cfg, init=SolverState(X=X0, Z=Z, Lam=Lam, iters=0,
                                                     final_change=0.0, converged=False))
    # dense re-solve of the first X update
    E = incidence(edges).toarray()
    M = np.eye(m) + nu * E.T @ E
    X1 = np.linalg.solve(M, A + E.T @ (nu * Z + Lam))
    assert np.allclose(one.X, X1, atol=1e-10)

    # blockwise descent of the merit function
    before = augmented_lagrangian(A, X0, Z, Lam, edges, c, nu, HALF)
    after_x = augmented_lagrangian(A, X1, Z, Lam, edges, c, nu, HALF)
    assert after_x <= before + 1e-12
    thr = (c / nu) * edges.weights[:, None]
    Z1 = soft_threshold(E @ X1 - Lam / nu, thr)
    after_z = augmented_lagrangian(A, X1, Z1, Lam, edges, c, nu, HALF)
    assert after_z <= after_x + 1e-12


def test_matches_reference_minimizer_on_random_instances():
    gen = np.random.default_rng(7)
    for trial in range(10):
        m = int(gen.integers(2, 7))
        n = int(gen.integers(1, 4))
        A = gen.normal(size=(m, n))
        c = float(gen.uniform(0.05, 1.0))
        conv = PAPER if trial % 2 else HALF
        edges = gaussian_edges(A, float(gen.uniform(0, 1)), "full")
        state = admm_solve(A, edges, tight(c, conv))
        assert state.converged
        X_ref, f_ref, gap = reference_minimizer(A, edges, c, conv)
        assert gap <= 1e-9
        f_admm = objective(A, state.X, edges, c, conv)
        assert abs(f_admm - f_ref) <= 1e-6 * max(1.0, abs(f_ref))
        assert np.allclose(state.X, X_ref, atol=1e-5)


def test_kkt_residual_cases():
    gen = np.random.default_rng(9)
    A = gen.normal(size=(4, 2))
    edges = gaussian_edges(A, 0.2, "full")
    assert kkt_residual(A, A, edges, c=0.0) == 0.0
    # analytic two-point optimum
    res = kkt_residual(TWO_POINTS, np.array([[1.0], [1.0]]), TWO_EDGE, 2.5, HALF)
    assert res <= 1e-8
    res = kkt_residual(TWO_POINTS, np.array([[0.5], [1.5]]), TWO_EDGE, 0.5, HALF)
    assert res <= 1e-10
    # a random non-optimal point has positive residual
    X_bad = A + gen.normal(size=A.shape)
    assert kkt_residual(A, X_bad, edges, c=0.3) > 1e-3


def test_permutation_equivariance():
    gen = np.random.default_rng(12)
    A = gen.normal(size=(6, 2))
    edges = gaussian_edges(A, 0.5, "full")
    state = admm_solve(A, edges, tight(0.6))
    perm = gen.permutation(6)
    Ap = A[perm]
    edges_p = gaussian_edges(Ap, 0.5, "full")
    state_p = admm_solve(Ap, edges_p, tight(0.6))
    assert np.allclose(state_p.X, state.X[perm], atol=1e-7)


def test_distinct_initializations_agree():
    gen = np.random.default_rng(13)
    A = gen.normal(size=(5, 2))
    edges = gaussian_edges(A, 0.4, "full")
    cfg = SolverConfig(c=0.5, tol=1e-9, max_iter=200000)
    cold = admm_solve(A, edges, cfg)
    from convexcluster.solver import SolverState

    warm = admm_solve(A, edges, cfg, init=SolverState(
        X=gen.normal(size=A.shape), Z=gen.normal(size=(edges.n_edges, 2)),
        Lam=gen.normal(size=(edges.n_edges, 2)), iters=0, final_change=0.0,
        converged=False))
    assert np.linalg.norm(cold.X - warm.X) <= 10 * cfg.tol


def test_history_and_nonconvergence_flag():
    gen = np.random.default_rng(14)
    A = gen.normal(size=(5, 2))
    edges = gaussian_edges(A, 0.4, "full")
    state = admm_solve(A, edges, SolverConfig(c=0.5, tol=1e-12, max_iter=3))
    assert not state.converged
    assert state.iters == 3
    assert state.history.shape == (3,)
    assert state.final_change == state.history[-1]
    good = admm_solve(A, edges, SolverConfig(c=0.5, tol=1e-6, max_iter=100000))
    assert good.converged
    assert good.final_change <= 1e-6
