"""Command-line front end: dataset generation, clustering runs, paths,
feasibility reports, and the benchmark harness.

Output is machine-first (JSON or CSV) and byte-deterministic for a fixed
seed and thread cap: timing goes to stderr unless ``--timing`` opts it into
the report.  Exit codes: 0 success, 2 input error, 3 non-convergence under
``--strict``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import datagen, theory
from .baselines import hierarchical, kmeanspp_init, lloyd
from .extraction import canonical_labels, extract_clusters, find_c_for_k, regularization_path
from .metrics import rand_index
from .solver import PAPER, SolverConfig, admm_solve, objective
from .theory import candidate_c_values, feasibility_report, search_feasible_r
from .weights import gaussian_edges

ENV_THREADS = "CONVEXCLUSTER_THREADS"


class CliError(Exception):
    """Input or configuration error: exit code 2."""


def _threads() -> int:
    raw = os.environ.get(ENV_THREADS, "1")
    try:
        val = int(raw)
    except ValueError:
        raise CliError(f"{ENV_THREADS} must be an integer, got {raw!r}")
    if val < 1:
        raise CliError(f"{ENV_THREADS} must be >= 1, got {val}")
    return val


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _parse_vector(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise CliError(f"cannot parse vector {text!r} (expected comma-separated numbers)")


def _parse_knn(text: str):
    if text == "full":
        return "full"
    try:
        return int(text)
    except ValueError:
        raise CliError(f"--knn must be an integer or 'full', got {text!r}")


def _load_config_defaults(argv: list[str]) -> dict:
    """Read a flat key=value config file named by --config, if any."""
    cfg_path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            cfg_path = argv[i + 1]
        elif tok.startswith("--config="):
            cfg_path = tok.split("=", 1)[1]
    if cfg_path is None:
        return {}
    path = Path(cfg_path)
    if not path.exists():
        raise CliError(f"config file not found: {cfg_path}")
    defaults = {}
    for ln, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{cfg_path}:{ln}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        defaults[key.strip().replace("-", "_")] = value.strip()
    return defaults


def _load_dataset(path: str, label_column: str | None):
    if not Path(path).exists():
        raise CliError(f"dataset not found: {path}")
    try:
        A, labels, header = datagen.load_csv(path, label_column)
    except ValueError as exc:
        raise CliError(str(exc))
    return A, labels, header


# ---------------------------------------------------------------- generate

def _sidecar(out: str) -> Path:
    p = Path(out)
    return p.with_suffix(".spec.json") if p.suffix else Path(str(p) + ".spec.json")


def _write_generated(out: str, A, labels, spec: dict) -> dict:
    datagen.save_csv(out, A, labels=labels)
    spec = dict(spec)
    spec["rng"] = datagen.RNG_ALGORITHM
    spec["m"] = int(A.shape[0])
    spec["n"] = int(A.shape[1])
    _sidecar(out).write_text(json.dumps(spec, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    return spec


def cmd_generate(args) -> int:
    if args.kind == "circles":
        A, labels = datagen.embedded_circles(seed=args.seed)
        spec = {"kind": "circles", "seed": args.seed}
    elif args.kind == "ball":
        if not args.centers:
            raise CliError("generate ball requires --centers")
        centers = np.array([_parse_vector(c) for c in args.centers])
        spec_obj = datagen.BallModelSpec(centers=centers, per_cluster=args.per_cluster,
                                         distribution=args.distribution, seed=args.seed)
        A, labels = datagen.stochastic_ball(spec_obj)
        delta = theory.ball_condition(centers).delta if centers.shape[0] >= 2 else None
        spec = {"kind": "ball", "centers": centers.tolist(),
                "per_cluster": args.per_cluster, "distribution": args.distribution,
                "seed": args.seed, "delta": delta}
    elif args.kind == "paper-gaussians" or (args.kind == "gmm" and args.paper):
        A, labels, r = datagen.paper_gaussians(args.sigma, seed=args.seed)
        spec = {"kind": "paper-gaussians", "sigma": args.sigma, "seed": args.seed,
                "r_recommended": r}
    else:  # general gmm
        if not args.means:
            raise CliError("generate gmm requires --means (or --paper)")
        means = np.array([_parse_vector(c) for c in args.means])
        K = means.shape[0]
        sigmas = _parse_vector(args.sigmas) if args.sigmas else [args.sigma] * K
        if len(sigmas) == 1:
            sigmas = sigmas * K
        if len(sigmas) != K:
            raise CliError("need one sigma per component (or a single shared value)")
        weights = _parse_vector(args.weights) if args.weights else [1.0 / K] * K
        covs = [s ** 2 * np.eye(means.shape[1]) for s in sigmas]
        spec_obj = datagen.GmmSpec(weights=np.array(weights), means=means,
                                   covariances=covs, m=args.m, seed=args.seed)
        A, labels = datagen.gaussian_mixture(spec_obj)
        spec = {"kind": "gmm", "means": means.tolist(), "sigmas": list(sigmas),
                "weights": list(weights), "m": args.m, "seed": args.seed}
    try:
        written = _write_generated(args.output, A, labels, spec)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}")
    _emit({"written": args.output, "sidecar": str(_sidecar(args.output)), "spec": written},
          None)
    return 0


# ---------------------------------------------------------------- cluster

def _solver_config(args, c: float) -> SolverConfig:
    return SolverConfig(c=c, nu=args.nu, tol=args.tol, max_iter=args.max_iter,
                        convention=args.convention)


def cmd_cluster(args) -> int:
    t0 = time.perf_counter()
    A, truth, _ = _load_dataset(args.data, args.label_column)
    merge_tol = args.merge_tol if args.merge_tol is not None else 10.0 * args.tol

    report: dict = {
        "command": "cluster",
        "input": {"path": args.data, "sha256": _sha256(args.data),
                  "label_column": args.label_column,
                  "m": int(A.shape[0]), "n": int(A.shape[1])},
        "config": {"nu": args.nu, "tol": args.tol, "max_iter": args.max_iter,
                   "knn": args.knn, "merge_tol": merge_tol,
                   "convention": args.convention, "seed": args.seed,
                   "threads": _threads()},
    }

    if args.auto_r and not args.auto_params:
        # pick only the bandwidth from theory; c stays caller-supplied
        if truth is None:
            raise CliError("--auto-r needs labeled data (--label-column)")
        args.r = search_feasible_r(A, truth).r

    if args.auto_params:
        if truth is None:
            raise CliError("--auto-params needs labeled data (--label-column)")
        feas = search_feasible_r(A, truth, r_start=args.r if args.r > 0 else None)
        r = feas.r
        edges = gaussian_edges(A, r=r, knn="full")
        truth_canonical = canonical_labels(truth).labels
        chosen = None
        for cand in candidate_c_values(feas, count=args.auto_candidates):
            cfg = _solver_config(args, float(cand))
            state = admm_solve(A, edges, cfg)
            assign = extract_clusters(state.X, merge_tol)
            if np.array_equal(assign.labels, truth_canonical):
                chosen = (float(cand), state, assign)
                break
            if chosen is None:
                chosen = (float(cand), state, assign)
        c, state, assign = chosen
        report["feasibility"] = feas.to_dict()
        report["config"].update({"c": c, "r": r, "knn": "full"})
    else:
        if args.c is None:
            raise CliError("--c is required unless --auto-params is given")
        c, r = args.c, args.r
        edges = gaussian_edges(A, r=r, knn=args.knn)
        cfg = _solver_config(args, c)
        state = admm_solve(A, edges, cfg)
        assign = extract_clusters(state.X, merge_tol)
        report["config"].update({"c": c, "r": r})

    report["result"] = {
        "labels": assign.labels.tolist(),
        "n_clusters": assign.k,
        "objective": objective(A, state.X, edges, c, args.convention),
        "solver": {"iters": state.iters, "converged": state.converged,
                   "final_change": state.final_change},
    }
    if truth is not None:
        report["result"]["rand_index"] = rand_index(assign.labels, truth)
    elapsed = time.perf_counter() - t0
    if args.timing:
        report["wall_time_s"] = elapsed
    print(f"elapsed_s={elapsed:.3f}", file=sys.stderr)

    if args.labels_out:
        datagen.save_csv(args.labels_out, A, labels=assign.labels)
    _emit(report, args.output)
    if args.strict and not state.converged:
        print("solver did not converge within max_iter", file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------- path

def _c_grid(args) -> np.ndarray:
    if args.c_grid:
        grid = np.array(_parse_vector(args.c_grid))
    else:
        if args.c_min <= 0 or args.c_max <= args.c_min:
            raise CliError("need 0 < --c-min < --c-max for a geometric grid")
        grid = np.geomspace(args.c_min, args.c_max, args.c_steps)
    return grid


def cmd_path(args) -> int:
    t0 = time.perf_counter()
    A, truth, _ = _load_dataset(args.data, args.label_column)
    edges = gaussian_edges(A, r=args.r, knn=args.knn)
    merge_tol = args.merge_tol if args.merge_tol is not None else 10.0 * args.tol
    grid = _c_grid(args)
    path = regularization_path(A, edges, grid, _solver_config(args, 0.0),
                               merge_tol=merge_tol, warm_start=not args.cold)
    if not path.counts_non_increasing:
        print("warning: cluster counts are not monotone along this path "
              "(try --cold or a tighter --tol)", file=sys.stderr)
    lines = ["c,n_clusters,rand,iterations,converged"]
    for pt in path.points:
        rand = repr(rand_index(pt.assignment.labels, truth)) if truth is not None else ""
        lines.append(f"{pt.c!r},{pt.n_clusters},{rand},{pt.iters},{pt.converged}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"elapsed_s={time.perf_counter() - t0:.3f}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- bench

_WORKER_STATE: dict = {}


def _bench_init(A, truth, k, inits):
    _WORKER_STATE["A"] = A
    _WORKER_STATE["truth"] = truth
    _WORKER_STATE["k"] = k
    _WORKER_STATE["inits"] = inits


def _bench_task(task):
    """One benchmark repetition: best Rand index over the configured inits."""
    method, rep, base_seed = task
    A = _WORKER_STATE["A"]
    truth = _WORKER_STATE["truth"]
    k = _WORKER_STATE["k"]
    inits = _WORKER_STATE["inits"]
    best = -1.0
    for i in range(inits):
        seed = base_seed + rep * inits + i
        if method == "lloyd":
            res = lloyd(A, k, seed=seed)
            labels = res.labels
        else:  # kmeanspp
            centers = kmeanspp_init(A, k, seed=seed)
            labels = lloyd(A, k, init_centers=centers).labels
        best = max(best, rand_index(labels, truth))
    return method, rep, best


def cmd_bench(args) -> int:
    t0 = time.perf_counter()
    A, truth, _ = _load_dataset(args.data, args.label_column)
    if truth is None:
        raise CliError("bench needs truth labels (--label-column)")
    k = args.k if args.k else int(np.unique(truth).size)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    known = {"convex", "lloyd", "kmeanspp", "hc-single", "hc-average"}
    bad = set(methods) - known
    if bad:
        raise CliError(f"unknown methods: {sorted(bad)} (choose from {sorted(known)})")

    results: dict[str, dict] = {}

    if "convex" in methods:
        edges = gaussian_edges(A, r=args.r, knn=args.knn)
        merge_tol = args.merge_tol if args.merge_tol is not None else 10.0 * args.tol
        if args.c is not None:
            state = admm_solve(A, edges, _solver_config(args, args.c))
            assign = extract_clusters(state.X, merge_tol)
            c_used = args.c
        else:
            pt = find_c_for_k(A, edges, k, _solver_config(args, 0.0), _c_grid(args),
                              merge_tol=merge_tol)
            if pt is None:
                raise CliError(f"no c on the grid yields {k} clusters; widen --c-min/--c-max")
            assign, c_used = pt.assignment, pt.c
        results["convex"] = {"mean": rand_index(assign.labels, truth), "sd": 0.0,
                             "runs": 1, "c": c_used, "n_clusters": assign.k}

    for method, name in (("hc-single", "single"), ("hc-average", "average")):
        if method in methods:
            assign = hierarchical(A, k, linkage=name)
            results[method] = {"mean": rand_index(assign.labels, truth), "sd": 0.0,
                               "runs": 1}

    km_methods = [m for m in methods if m in ("lloyd", "kmeanspp")]
    if km_methods:
        tasks = [(m, rep, args.seed) for m in km_methods for rep in range(args.repeats)]
        workers = _threads()
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers, initializer=_bench_init,
                                     initargs=(A, truth, k, args.inits)) as pool:
                outcomes = list(pool.map(_bench_task, tasks, chunksize=8))
        else:
            _bench_init(A, truth, k, args.inits)
            outcomes = [_bench_task(t) for t in tasks]
        for m in km_methods:
            vals = np.array(sorted(v for mm, _, v in outcomes if mm == m))
            results[m] = {"mean": float(vals.mean()), "sd": float(vals.std()),
                          "runs": int(vals.size)}

    elapsed = time.perf_counter() - t0
    report = {
        "command": "bench",
        "input": {"path": args.data, "sha256": _sha256(args.data),
                  "label_column": args.label_column, "m": int(A.shape[0]),
                  "n": int(A.shape[1]), "k": k},
        "config": {"methods": methods, "repeats": args.repeats, "inits": args.inits,
                   "seed": args.seed, "r": args.r, "knn": args.knn,
                   "threads": _threads()},
        "results": results,
    }
    if args.timing:
        report["wall_time_s"] = elapsed
    print(f"elapsed_s={elapsed:.3f}", file=sys.stderr)
    if args.format == "csv":
        lines = ["method,mean,sd,runs"]
        for m in sorted(results):
            r = results[m]
            lines.append(f"{m},{r['mean']!r},{r['sd']!r},{r['runs']}")
        text = "\n".join(lines) + "\n"
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    else:
        _emit(report, args.output)
    return 0


# ---------------------------------------------------------------- feasibility

def cmd_feasibility(args) -> int:
    A, truth, _ = _load_dataset(args.data, args.label_column)
    if truth is None:
        raise CliError("feasibility needs truth labels (--label-column)")
    report: dict = {
        "command": "feasibility",
        "input": {"path": args.data, "sha256": _sha256(args.data),
                  "label_column": args.label_column,
                  "m": int(A.shape[0]), "n": int(A.shape[1])},
    }
    sep = theory.separation_check(A, truth)
    report["separation"] = {
        "separated": sep.separated,
        "means_distinct": sep.means_distinct,
        "min_dist": sep.stats.min_dist,
        "max_dia": sep.stats.max_dia,
        "diameters": sep.stats.diameters.tolist(),
    }
    if args.r is not None:
        feas = feasibility_report(A, truth, args.r)
    else:
        try:
            feas = search_feasible_r(A, truth)
        except ValueError as exc:
            feas = None
            report["interval_error"] = str(exc)
    if feas is not None:
        report["interval"] = feas.to_dict()
    if args.centers:
        centers = np.array([_parse_vector(c) for c in args.centers])
        check = theory.ball_condition(centers)
        report["ball"] = {"delta": check.delta, "satisfied": check.satisfied}
    if args.gmm_sigmas:
        sigmas = _parse_vector(args.gmm_sigmas)
        values = np.unique(truth)
        if len(sigmas) == 1:
            sigmas = sigmas * len(values)
        if len(sigmas) != len(values):
            raise CliError("need one --gmm-sigmas entry per cluster (or one shared)")
        means = np.stack([A[truth == v].mean(axis=0) for v in values])
        covs = [s ** 2 * np.eye(A.shape[1]) for s in sigmas]
        gmm = theory.gmm_separation_bound(means, covs, A.shape[0])
        report["gmm_bound"] = {
            "pair_bounds": [[None if math.isnan(x) else x for x in row]
                            for row in gmm.pair_bounds.tolist()],
            "min_center_distance": gmm.min_center_distance,
            "satisfied": gmm.satisfied,
        }
    _emit(report, args.output)
    return 0


# ---------------------------------------------------------------- parser

def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--r", type=float, default=0.0, help="Gaussian kernel bandwidth")
    p.add_argument("--knn", type=_parse_knn, default=5,
                   help="neighbor count for the edge graph, or 'full'")
    p.add_argument("--nu", type=float, default=1.0, help="ADMM penalty parameter")
    p.add_argument("--tol", type=float, default=1e-4, help="stopping tolerance on centroid change")
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--merge-tol", type=float, default=None,
                   help="cluster extraction threshold (default 10*tol)")
    p.add_argument("--convention", choices=[PAPER, "half"], default=PAPER,
                   help="objective convention for c")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.add_argument("--config", default=None, help="flat key=value config file; flags override")
    p.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convexcluster",
                                     description="Weighted l1 convex clustering toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset as CSV + sidecar spec")
    g.add_argument("kind", choices=["ball", "gmm", "circles", "paper-gaussians"])
    g.add_argument("--centers", nargs="+", default=None,
                   help="cluster centers as comma-separated vectors")
    g.add_argument("--means", nargs="+", default=None,
                   help="gmm component means as comma-separated vectors")
    g.add_argument("--per-cluster", type=int, default=10)
    g.add_argument("--distribution", choices=["uniform_ball", "uniform_sphere"],
                   default="uniform_ball")
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--sigmas", default=None, help="per-component sigmas, comma separated")
    g.add_argument("--weights", default=None, help="mixture weights, comma separated")
    g.add_argument("--m", type=int, default=30)
    g.add_argument("--paper", action="store_true",
                   help="use the fixed 30x100 three-cluster benchmark configuration")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--config", default=None)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("cluster", help="run the convex model on a CSV")
    c.add_argument("data")
    c.add_argument("--label-column", default=None)
    c.add_argument("--c", type=float, default=None, help="regularization weight")
    c.add_argument("--auto-params", action="store_true",
                   help="pick (r, c) from the feasibility interval (needs labels)")
    c.add_argument("--auto-r", action="store_true",
                   help="pick only r from the feasibility search; c stays as given")
    c.add_argument("--auto-candidates", type=int, default=5)
    c.add_argument("--labels-out", default=None, help="write a labeled copy of the data")
    c.add_argument("--strict", action="store_true",
                   help="exit 3 when the solver does not converge")
    _add_solver_flags(c)
    c.set_defaults(func=cmd_cluster)

    p = sub.add_parser("path", help="regularization path over a c grid")
    p.add_argument("data")
    p.add_argument("--label-column", default=None)
    p.add_argument("--c-grid", default=None, help="explicit comma-separated ascending c values")
    p.add_argument("--c-min", type=float, default=1e-3)
    p.add_argument("--c-max", type=float, default=1e3)
    p.add_argument("--c-steps", type=int, default=15)
    p.add_argument("--cold", action="store_true", help="disable warm starts along the path")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_path)

    b = sub.add_parser("bench", help="baseline comparison on a labeled CSV")
    b.add_argument("data")
    b.add_argument("--label-column", default="label")
    b.add_argument("--methods", default="convex,lloyd,kmeanspp,hc-single,hc-average")
    b.add_argument("--k", type=int, default=None, help="target cluster count (default: truth)")
    b.add_argument("--repeats", type=int, default=100)
    b.add_argument("--inits", type=int, default=10,
                   help="take the best Rand index over this many initializations per repeat")
    b.add_argument("--c", type=float, default=None,
                   help="fixed c for the convex method (default: path-select k)")
    b.add_argument("--c-grid", default=None)
    b.add_argument("--c-min", type=float, default=1e-2)
    b.add_argument("--c-max", type=float, default=1e7)
    b.add_argument("--c-steps", type=int, default=12)
    b.add_argument("--format", choices=["json", "csv"], default="json")
    _add_solver_flags(b)
    b.set_defaults(func=cmd_bench)

    f = sub.add_parser("feasibility", help="exactness theory report for a labeled CSV")
    f.add_argument("data")
    f.add_argument("--label-column", default="label")
    f.add_argument("--r", type=float, default=None,
                   help="evaluate the c interval at this bandwidth (default: search)")
    f.add_argument("--centers", nargs="+", default=None,
                   help="ball centers for the unit-ball condition")
    f.add_argument("--gmm-sigmas", default=None,
                   help="spherical sigmas for the mixture separation bound")
    f.add_argument("--config", default=None)
    f.add_argument("-o", "--output", default=None)
    f.set_defaults(func=cmd_feasibility)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        defaults = _load_config_defaults(argv)
        if defaults:
            ns, _ = parser.parse_known_args(argv)
            sub_actions = [a for a in parser._actions
                           if isinstance(a, argparse._SubParsersAction)]
            subparser = sub_actions[0].choices[ns.command]
            known = {a.dest for a in subparser._actions}
            unknown = set(defaults) - known
            if unknown:
                raise CliError(f"unknown config keys: {sorted(unknown)}")
            typed = {}
            for key, raw in defaults.items():
                action = next(a for a in subparser._actions if a.dest == key)
                if action.type is not None:
                    typed[key] = action.type(raw)
                elif isinstance(action.const, bool) or isinstance(action.default, bool):
                    typed[key] = raw.lower() in ("1", "true", "yes", "on")
                else:
                    typed[key] = raw
            subparser.set_defaults(**typed)
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
