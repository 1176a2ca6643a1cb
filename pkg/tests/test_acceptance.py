"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.  The whole module targets a few minutes of runtime.
"""

import itertools
import json
import math
import subprocess
import sys

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.spatial.distance import pdist, squareform

import convexcluster as cc
from convexcluster.extraction import find_c_for_k
from oracle import reference_minimizer


def report(line: str):
    print(f"\nACCEPTANCE {line}", flush=True)


# ------------------------------------------------------------------ 1

def test_c01_table1_embedded_circles():
    # paper values: convex 0.996, Lloyd 0.517, k-means++ 0.491
    convex_rands = []
    for seed in range(5):
        A, labels = cc.embedded_circles(seed=seed)
        edges = cc.gaussian_edges(A, r=3.0, knn=10)
        pt = find_c_for_k(A, edges, 2,
                          cc.SolverConfig(c=0.0, tol=1e-5, max_iter=40000),
                          np.geomspace(1.0, 1e7, 12), merge_tol=1e-4)
        assert pt is not None, f"no c with 2 clusters at dataset seed {seed}"
        convex_rands.append(cc.rand_index(pt.assignment.labels, labels))
    convex_rands = np.array(convex_rands)
    assert convex_rands[0] >= 0.98
    assert convex_rands.std() <= 0.01

    A, labels = cc.embedded_circles(seed=0)
    lloyd_rands = np.array([
        cc.rand_index(cc.lloyd(A, 2, seed=s).labels, labels) for s in range(100)])
    pp_rands = np.array([
        cc.rand_index(cc.lloyd(A, 2, init_centers=cc.kmeanspp_init(A, 2, seed=s)).labels,
                      labels)
        for s in range(100)])
    assert 0.45 <= lloyd_rands.mean() <= 0.60
    assert 0.44 <= pp_rands.mean() <= 0.60
    report(f"01 PASS table-1 circles: convex={convex_rands[0]:.4f} "
           f"(sd over seeds {convex_rands.std():.4f}), lloyd={lloyd_rands.mean():.4f}, "
           f"kmeans++={pp_rands.mean():.4f}")


# ------------------------------------------------------------------ 2

def test_c02_stochastic_ball_exact_recovery():
    angle = 0.198
    centers = np.array([
        [0.0, 0.0],
        [4.5 * math.cos(angle), 4.5 * math.sin(angle)],
        [1.8, 6.0],
    ])
    delta = cc.ball_condition(centers).delta
    assert abs(delta - 4.5) < 1e-12

    successes = 0
    for seed in range(100):
        A, labels = cc.stochastic_ball(
            cc.BallModelSpec(centers=centers, per_cluster=10, seed=seed))
        try:
            feas = cc.search_feasible_r(A, labels)
        except ValueError:
            continue
        edges = cc.gaussian_edges(A, r=feas.r, knn="full")
        for c in cc.candidate_c_values(feas, count=5):
            state = cc.admm_solve(A, edges, cc.SolverConfig(
                c=float(c), tol=1e-8, max_iter=60000))
            if cc.exact_clustering_check(state.X, labels, merge_tol=1e-6).ok:
                successes += 1
                break
    assert successes >= 95, f"exact recovery in only {successes}/100 seeds"
    report(f"02 PASS ball model delta=4.5: exact recovery {successes}/100 seeds")


# ------------------------------------------------------------------ 3

def test_c03_solver_oracle_equivalence():
    gen = np.random.default_rng(7)
    worst_rel = worst_kkt = 0.0
    for trial in range(50):
        m = int(gen.integers(2, 7))
        n = int(gen.integers(1, 4))
        A = gen.normal(size=(m, n))
        c = float(gen.uniform(0.0, 1.0))
        conv = cc.PAPER if trial % 2 == 0 else cc.HALF
        edges = cc.gaussian_edges(A, float(gen.uniform(0.0, 1.0)), "full")
        state = cc.admm_solve(A, edges, cc.SolverConfig(
            c=c, tol=1e-11, max_iter=300000, convention=conv))
        _, f_ref, gap = reference_minimizer(A, edges, c, conv)
        assert gap <= 1e-9
        f_admm = cc.objective(A, state.X, edges, c, conv)
        rel = abs(f_admm - f_ref) / max(1.0, abs(f_ref))
        kkt = cc.kkt_residual(A, state.X, edges, c, conv, fuse_tol=1e-7)
        worst_rel, worst_kkt = max(worst_rel, rel), max(worst_kkt, kkt)
    assert worst_rel <= 1e-6
    assert worst_kkt <= 1e-5
    report(f"03 PASS solver-oracle: worst rel obj diff {worst_rel:.2e}, "
           f"worst KKT residual {worst_kkt:.2e}")


# ------------------------------------------------------------------ 4

def test_c04_analytic_limits():
    gen = np.random.default_rng(1)
    A = gen.normal(size=(7, 3))
    edges = cc.gaussian_edges(A, 0.4, "full")
    state = cc.admm_solve(A, edges, cc.SolverConfig(c=0.0))
    assert np.max(np.abs(state.X - A)) <= 1e-10

    # two points at 0 and 2, unit weight, paper convention: threshold c = 2
    two = np.array([[0.0], [2.0]])
    edge = cc.EdgeSet(m=2, pairs=[[0, 1]], weights=[1.0])
    for c in (2.0001, 2.5, 10.0):
        state = cc.admm_solve(two, edge, cc.SolverConfig(
            c=c, tol=1e-10, max_iter=200000, convention=cc.PAPER))
        assert np.max(np.abs(state.X - 1.0)) <= 1e-6, f"no fusion at c={c}"
    below = cc.admm_solve(two, edge, cc.SolverConfig(
        c=1.9, tol=1e-10, max_iter=200000, convention=cc.PAPER))
    assert abs(below.X[0, 0] - below.X[1, 0]) > 1e-3
    report("04 PASS analytic limits: c=0 returns the data, two-point fusion at "
           "the threshold")


# ------------------------------------------------------------------ 5

def test_c05_rand_index_brute_force():
    gen = np.random.default_rng(0)
    for _ in range(200):
        m = int(gen.integers(2, 13))
        a = gen.integers(0, 4, size=m)
        b = gen.integers(0, 4, size=m)
        agree = sum(
            1 for i, j in itertools.combinations(range(m), 2)
            if (a[i] == a[j]) == (b[i] == b[j]))
        assert cc.rand_index(a, b) == agree / (m * (m - 1) // 2)
    report("05 PASS rand index equals the brute-force pair count on 200 pairs")


# ------------------------------------------------------------------ 6

def test_c06_operator_identities():
    gen = np.random.default_rng(2)
    for m in range(3, 9):
        X = gen.normal(size=(m, 3))
        Y = cc.difference_operator(m) @ X
        H = sp.hstack([cc.difference_operator(m - 1),
                       sp.identity((m - 1) * (m - 2) // 2)])
        assert np.max(np.abs(H @ Y)) <= 1e-12

    for m in range(2, 11):
        seen = {cc.pair_row_index(i, j, m)
                for i in range(1, m + 1) for j in range(i + 1, m + 1)}
        assert seen == set(range(1, m * (m - 1) // 2 + 1))
        for p in seen:
            i, j = cc.pair_from_row_index(p, m)
            assert cc.pair_row_index(i, j, m) == p

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for head in range(1, total - parts + 2):
            for rest in compositions(total - head, parts - 1):
                yield (head,) + rest

    for m in range(2, 11):
        universe = set(range(1, m * (m - 1) // 2 + 1))
        for parts in range(1, m + 1):
            for sizes in compositions(m, parts):
                sets = cc.index_sets(np.repeat(np.arange(parts), sizes))
                assert sets.within | sets.between == universe
                assert not (sets.within & sets.between)
    report("06 PASS operator identities: H(D X)=0, pair bijection, index partition")


# ------------------------------------------------------------------ 7

def test_c07_feasibility_formulas():
    A = np.array([[0.0], [0.0], [3.0], [3.0]])
    labels = np.array([0, 0, 1, 1])
    rep = cc.c_interval_two(A, labels, r=1.0)
    assert abs(rep.r_min - math.log(4) / 9) <= 1e-12
    expected_upper = 1.5 * math.exp(9.0)
    assert abs(rep.kappa_upper - expected_upper) <= 1e-6 * expected_upper
    below = cc.c_interval_two(A, labels, r=0.9 * math.log(4) / 9)
    assert not below.feasible
    report(f"07 PASS feasibility formulas: r_min=ln4/9, "
           f"kappa_upper(1)={rep.kappa_upper:.6g}")


# ------------------------------------------------------------------ 8

def test_c08_gaussian_mixture_monte_carlo():
    n, m = 5, 30
    base = 22.0 / math.sqrt(n)
    means = np.array([
        np.zeros(n) + np.linspace(0.0, 0.4, n),
        base + np.linspace(-0.2, 0.2, n),
        -base + np.linspace(0.1, -0.3, n),
    ])
    covs = [np.eye(n)] * 3
    bound = cc.gmm_separation_bound(means, covs, m)
    assert bound.satisfied, "construction must exceed the computed bound"

    trials, hits = 2000, 0
    for seed in range(trials):
        A, labels = cc.gaussian_mixture(cc.GmmSpec(
            weights=[1 / 3] * 3, means=means, covariances=covs, m=m, seed=seed))
        d = squareform(pdist(A))
        same = labels[:, None] == labels[None, :]
        off = ~np.eye(m, dtype=bool)
        within = d[same & off]
        cross = d[~same]
        if cross.size == 0 or within.size == 0:
            hits += 1
        elif cross.min() > within.max():
            hits += 1
    freq = hits / trials
    assert freq >= 1.0 - 3.0 / m - 0.05
    report(f"08 PASS mixture separation Monte Carlo: frequency {freq:.4f} "
           f">= {1.0 - 3.0 / m - 0.05:.2f} (bound {np.nanmax(bound.pair_bounds):.3f}, "
           f"min distance {bound.min_center_distance:.3f})")


# ------------------------------------------------------------------ 9

def test_c09_gaussian_comparison_stability():
    conv_rands, lloyd_rands = [], []
    for seed in range(200):
        A, labels, r = cc.paper_gaussians(1.0, seed=seed)
        assert np.isclose(r, 0.14)
        feas = cc.c_interval_k(A, labels, r)
        assert feas.feasible
        c = float(np.sqrt(max(feas.kappa_lower, feas.kappa_upper * 1e-6)
                          * feas.kappa_upper))
        edges = cc.gaussian_edges(A, r=r, knn="full")
        state = cc.admm_solve(A, edges, cc.SolverConfig(c=c, tol=1e-6, max_iter=50000))
        assign = cc.extract_clusters(state.X, merge_tol=1e-4)
        conv_rands.append(cc.rand_index(assign.labels, labels))
        lloyd_rands.append(cc.rand_index(cc.lloyd(A, 3, seed=seed).labels, labels))
    conv_rands, lloyd_rands = np.array(conv_rands), np.array(lloyd_rands)
    assert conv_rands.std() <= lloyd_rands.std()
    assert conv_rands.mean() >= lloyd_rands.mean() - 0.02
    report(f"09 PASS sigma=1 mixture: convex {conv_rands.mean():.4f}"
           f"+-{conv_rands.std():.4f} vs lloyd {lloyd_rands.mean():.4f}"
           f"+-{lloyd_rands.std():.4f} over 200 runs")


# ------------------------------------------------------------------ 10

def test_c10_cli_determinism(tmp_path):
    import os

    data = tmp_path / "ball.csv"

    def run(args):
        env = dict(os.environ)
        env["CONVEXCLUSTER_THREADS"] = "2"
        proc = subprocess.run(
            [sys.executable, "-m", "convexcluster.cli", *args],
            capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    gen_args = ["generate", "ball", "--centers", "0,0", "4.6,0.9", "1.8,6.2",
                "--per-cluster", "8", "--seed", "5", "-o", str(data)]
    first_gen = run(gen_args)
    csv_bytes = data.read_bytes()
    assert run(gen_args) == first_gen
    assert data.read_bytes() == csv_bytes

    cluster_args = ["cluster", str(data), "--label-column", "label",
                    "--auto-params", "--tol", "1e-8", "--max-iter", "60000"]
    assert run(cluster_args) == run(cluster_args)

    bench_args = ["bench", str(data), "--repeats", "5", "--inits", "2",
                  "--r", "0.8", "--knn", "full", "--tol", "1e-6",
                  "--c-min", "0.01", "--c-max", "1000", "--c-steps", "8",
                  "--seed", "3"]
    assert run(bench_args) == run(bench_args)

    feas_args = ["feasibility", str(data), "--gmm-sigmas", "0.5"]
    assert run(feas_args) == run(feas_args)
    report("10 PASS CLI determinism: generate/cluster/bench/feasibility "
           "byte-identical on repeat")
