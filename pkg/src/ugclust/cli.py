"""Command-line interface.

One binary with subcommands: `mcp` / `acp` / `gmm` run the clustering
algorithms, `metrics` re-scores a saved clustering, `oracle` and
`estimate` answer pairwise probability queries, `eval` compares a saved
clustering against a ground-truth complex file, and `sweep` runs one
algorithm over a grid of k values and emits a CSV.

Every flag can also be set through an environment variable with the
`UGCLUST_` prefix (e.g. UGCLUST_SEED=7).  Exit codes: 0 success, 1 "no
clustering above threshold", 2 input or validation error.

Output documents are canonical JSON (sorted keys, two-space indent,
trailing newline), so identical runs diff byte-identically.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from .baselines import gmm as gmm_algorithm
from .clustering import (
    DEFAULT_EPSILON,
    DEFAULT_GAMMA,
    DEFAULT_P_LOW,
    DEFAULT_SAMPLES_INIT,
    DEFAULT_SEED,
    Clustering,
    acp as acp_algorithm,
    mcp as mcp_algorithm,
)
from .graph import GraphFormatError, UncertainGraph, WorldSamplePool, load_graph
from .metrics import (
    QualityReport,
    evaluate_predictions,
    inner_avpr,
    load_ground_truth,
    outer_avpr,
    score_clustering,
)
from .oracle import (
    DEFAULT_UNCERTAIN_EDGE_LIMIT,
    ExactOracle,
    OracleLimitError,
    PoolEstimator,
    exact_connection_prob,
    exact_d_connection_prob,
    mc_estimate,
    mc_estimate_d,
)

# Fresh evaluation pools are seeded away from the clustering pool so
# out-of-sample metrics never reuse clustering worlds.
_EVAL_SEED_OFFSET = 1000003

_CSV_FIELDS = [
    "algorithm", "k", "outcome", "min_prob", "avg_prob",
    "inner_avpr", "outer_avpr", "q_final", "phi", "iterations", "r", "seed",
]


def _env(name: str, default):
    return os.environ.get(f"UGCLUST_{name.upper().replace('-', '_')}", default)


def _env_num(name: str, cast, default):
    raw = _env(name, None)
    return cast(raw) if raw is not None else default


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ugclust",
        description="Cluster uncertain graphs by connection probability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_k=True):
        p.add_argument("graph", help="edge-list file: '<u> <v> <p>' per line")
        if with_k:
            p.add_argument("--k", type=int, required=True, help="cluster count")
        p.add_argument("--seed", type=int,
                       default=_env_num("seed", int, DEFAULT_SEED))
        p.add_argument("--workers", type=int,
                       default=_env_num("workers", int, 1))
        p.add_argument("--output", default=_env("output", None),
                       help="write the JSON document here (default stdout)")
        p.add_argument("--csv", default=_env("csv", None),
                       help="append a one-line CSV summary to this file")
        p.add_argument("--timings", action="store_true",
                       help="include wall-clock durations (breaks byte-identical reruns)")

    def algo_flags(p):
        p.add_argument("--gamma", type=float,
                       default=_env_num("gamma", float, DEFAULT_GAMMA))
        p.add_argument("--epsilon", type=float,
                       default=_env_num("epsilon", float, DEFAULT_EPSILON))
        p.add_argument("--p-low", type=float, dest="p_low",
                       default=_env_num("p_low", float, DEFAULT_P_LOW))
        p.add_argument("--depth", type=int,
                       default=_env_num("depth", int, None),
                       help="hop limit d for d-connection probabilities")
        p.add_argument("--sample-mode", choices=["practical", "theory"],
                       default=_env("sample_mode", "practical"))
        p.add_argument("--samples-init", type=int,
                       default=_env_num("samples_init", int, DEFAULT_SAMPLES_INIT))
        p.add_argument("--estimator", choices=["mc", "exact"],
                       default=_env("estimator", "mc"))
        p.add_argument("--schedule", choices=["doubling", "geometric"],
                       default=_env("schedule", "doubling"))
        p.add_argument("--oracle-limit", type=int,
                       default=_env_num("oracle_limit", int, DEFAULT_UNCERTAIN_EDGE_LIMIT))
        p.add_argument("--fresh-eval-samples", type=int,
                       default=_env_num("fresh_eval_samples", int, None),
                       help="score AVPR on a fresh pool of this size")

    p = sub.add_parser("mcp", help="maximize the minimum connection probability")
    common(p)
    algo_flags(p)

    p = sub.add_parser("acp", help="maximize the average connection probability")
    common(p)
    algo_flags(p)
    p.add_argument("--mode", choices=["practical", "theory"],
                   default=_env("mode", "practical"))

    p = sub.add_parser("gmm", help="deterministic farthest-point baseline")
    common(p)
    p.add_argument("--fresh-eval-samples", type=int,
                   default=_env_num("fresh_eval_samples", int, None))

    p = sub.add_parser("metrics", help="re-score a saved clustering")
    common(p, with_k=False)
    p.add_argument("clustering", help="clustering JSON produced by mcp/acp/gmm")
    p.add_argument("--r", type=int, default=_env_num("r", int, 1000),
                   help="pool size for Monte Carlo scoring")
    p.add_argument("--fresh-eval-samples", type=int,
                   default=_env_num("fresh_eval_samples", int, None))

    p = sub.add_parser("oracle", help="exact pairwise connection probability")
    p.add_argument("graph")
    p.add_argument("u")
    p.add_argument("v")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--oracle-limit", type=int,
                   default=_env_num("oracle_limit", int, DEFAULT_UNCERTAIN_EDGE_LIMIT))
    p.add_argument("--output", default=None)

    p = sub.add_parser("estimate", help="Monte Carlo pairwise estimate")
    p.add_argument("graph")
    p.add_argument("u")
    p.add_argument("v")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--r", type=int, default=_env_num("r", int, 1000))
    p.add_argument("--seed", type=int, default=_env_num("seed", int, DEFAULT_SEED))
    p.add_argument("--workers", type=int, default=_env_num("workers", int, 1))
    p.add_argument("--output", default=None)

    p = sub.add_parser("eval", help="confusion metrics vs ground-truth complexes")
    p.add_argument("clustering", help="clustering JSON produced by mcp/acp/gmm")
    p.add_argument("truth", help="complex file: '<id> <member> ...' per line")
    p.add_argument("--output", default=None)

    p = sub.add_parser("sweep", help="run one algorithm over a k grid, emit CSV")
    common(p, with_k=False)
    algo_flags(p)
    p.add_argument("--algorithm", choices=["mcp", "acp", "gmm"], required=True)
    p.add_argument("--k-list", required=True,
                   help="comma-separated cluster counts, e.g. 10,20,50")
    p.add_argument("--mode", choices=["practical", "theory"],
                   default=_env("mode", "practical"))
    return parser


# ---------------------------------------------------------------------------
# Serialization


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def serialize_clustering(clustering: Clustering, report: QualityReport,
                         graph: UncertainGraph) -> dict:
    """Clustering + report as a JSON-ready document keyed by node labels."""
    clusters = {}
    for i, c in enumerate(clustering.centers):
        clusters[graph.labels[c]] = sorted(
            graph.labels[u] for u in clustering.members(i)
        )
    estimates = {
        graph.labels[u]: float(clustering.estimates[u]) for u in range(graph.n)
    }
    return {
        "centers": [graph.labels[c] for c in clustering.centers],
        "clusters": clusters,
        "estimates": estimates,
        "k": clustering.k,
        "metrics": report.to_dict(),
        "params": _jsonable(clustering.params),
    }


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def parse_clustering(doc: dict, graph: UncertainGraph) -> Clustering:
    """Rebuild a Clustering from a serialized document."""
    centers = [graph.id_of(lab) for lab in doc["centers"]]
    assignment = np.full(graph.n, -1, dtype=np.int64)
    estimates = np.zeros(graph.n)
    for i, center_label in enumerate(doc["centers"]):
        for lab in doc["clusters"][center_label]:
            assignment[graph.id_of(lab)] = i
    for lab, est in doc.get("estimates", {}).items():
        estimates[graph.id_of(lab)] = float(est)
    return Clustering(
        k=len(centers),
        centers=centers,
        assignment=assignment,
        estimates=estimates,
        params=doc.get("params", {}),
    )


def _write_output(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_csv_row(path: str | None, report: QualityReport):
    if path is None:
        return
    row = report.to_dict()
    exists = os.path.exists(path) and os.path.getsize(path) > 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_FIELDS, extrasaction="ignore")
        if not exists:
            writer.writeheader()
        writer.writerow({f: row.get(f) for f in _CSV_FIELDS})


def _avpr_pool(args, graph: UncertainGraph, run_pool: WorldSamplePool | None):
    """Pool used for AVPR metrics: fresh out-of-sample if requested,
    otherwise the clustering pool."""
    fresh = getattr(args, "fresh_eval_samples", None)
    if fresh:
        pool = WorldSamplePool(graph, args.seed + _EVAL_SEED_OFFSET,
                               workers=getattr(args, "workers", 1))
        pool.extend(fresh)
        return pool
    return run_pool


def _attach_avpr(report: QualityReport, clustering: Clustering, pool):
    if pool is not None and pool.r > 0:
        report.inner_avpr = inner_avpr(clustering, pool)
        report.outer_avpr = outer_avpr(clustering, pool)


# ---------------------------------------------------------------------------
# Subcommand handlers


def _make_estimator(graph, args):
    """(pool, estimator) for the configured estimator mode; exact -> (None, None),
    letting the algorithm build its own exact oracle."""
    if args.estimator == "mc":
        pool = WorldSamplePool(graph, args.seed, workers=args.workers)
        return pool, PoolEstimator(pool)
    return None, None


def _cmd_cluster(args) -> int:
    t0 = time.perf_counter()
    graph = load_graph(args.graph)
    t1 = time.perf_counter()

    durations = {"load": t1 - t0}
    if args.command == "gmm":
        clustering = gmm_algorithm(graph, args.k)
        report = QualityReport(algorithm="gmm", k=args.k, seed=args.seed)
        report.min_prob = float(clustering.estimates.min())
        report.avg_prob = float(clustering.estimates.mean())
        report.cluster_sizes = clustering.cluster_sizes()
        run_pool = None
    else:
        run_pool, estimator = _make_estimator(graph, args)
        kwargs = dict(
            gamma=args.gamma,
            epsilon=args.epsilon,
            p_low=args.p_low,
            seed=args.seed,
            depth=args.depth,
            estimator=estimator,
            estimator_mode=args.estimator,
            sample_mode=args.sample_mode,
            samples_init=args.samples_init,
            workers=args.workers,
            schedule=args.schedule,
            oracle_limit=args.oracle_limit,
        )
        if args.command == "mcp":
            clustering, report = mcp_algorithm(graph, args.k, **kwargs)
        else:
            clustering, report = acp_algorithm(graph, args.k, mode=args.mode, **kwargs)
    durations["cluster"] = time.perf_counter() - t1

    if clustering is None:
        if args.timings:
            report.durations = durations
        _write_output(canonical_json({"metrics": report.to_dict()}), args.output)
        _write_csv_row(args.csv, report)
        return 1

    t2 = time.perf_counter()
    _attach_avpr(report, clustering, _avpr_pool(args, graph, run_pool))
    durations["metrics"] = time.perf_counter() - t2
    if args.timings:
        report.durations = durations

    doc = serialize_clustering(clustering, report, graph)
    _write_output(canonical_json(doc), args.output)
    _write_csv_row(args.csv, report)
    return 0


def _cmd_metrics(args) -> int:
    graph = load_graph(args.graph)
    with open(args.clustering, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    clustering = parse_clustering(doc, graph)
    pool = WorldSamplePool(graph, args.seed, workers=args.workers)
    pool.extend(args.r)
    estimator = PoolEstimator(pool)
    report = QualityReport(
        algorithm=doc.get("metrics", {}).get("algorithm"),
        k=clustering.k, seed=args.seed, r=pool.r,
    )
    report.min_prob, report.avg_prob = score_clustering(clustering, estimator)
    report.cluster_sizes = clustering.cluster_sizes()
    _attach_avpr(report, clustering, _avpr_pool(args, graph, pool))
    _write_output(canonical_json({"metrics": report.to_dict()}), args.output)
    _write_csv_row(args.csv, report)
    return 0


def _cmd_oracle(args) -> int:
    graph = load_graph(args.graph)
    u, v = graph.id_of(args.u), graph.id_of(args.v)
    if args.depth is None:
        prob = exact_connection_prob(graph, u, v, limit=args.oracle_limit)
    else:
        prob = exact_d_connection_prob(graph, u, v, args.depth, limit=args.oracle_limit)
    doc = {"u": args.u, "v": args.v, "depth": args.depth, "prob": prob}
    _write_output(canonical_json(doc), args.output)
    return 0


def _cmd_estimate(args) -> int:
    graph = load_graph(args.graph)
    u, v = graph.id_of(args.u), graph.id_of(args.v)
    pool = WorldSamplePool(graph, args.seed, workers=args.workers)
    pool.extend(args.r)
    if args.depth is None:
        est = mc_estimate(pool, u, v)
    else:
        est = mc_estimate_d(pool, u, v, args.depth)
    doc = {"u": args.u, "v": args.v, "depth": args.depth,
           "prob": est.value, "r": est.r, "seed": args.seed}
    _write_output(canonical_json(doc), args.output)
    return 0


def _cmd_eval(args) -> int:
    with open(args.clustering, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    truth = load_ground_truth(args.truth)
    clusters = list(doc["clusters"].values())
    confusion = evaluate_predictions(clusters, truth)
    _write_output(canonical_json(confusion.to_dict()), args.output)
    return 0


def _cmd_sweep(args) -> int:
    try:
        k_values = [int(x) for x in args.k_list.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"bad --k-list {args.k_list!r}") from None
    if not k_values:
        raise ValueError("empty --k-list")
    if args.csv is None:
        raise ValueError("sweep requires --csv")
    graph = load_graph(args.graph)
    for k in k_values:
        if args.algorithm == "gmm":
            clustering = gmm_algorithm(graph, k)
            report = QualityReport(algorithm="gmm", k=k, seed=args.seed)
            report.min_prob = float(clustering.estimates.min())
            report.avg_prob = float(clustering.estimates.mean())
            report.cluster_sizes = clustering.cluster_sizes()
            run_pool = None
        else:
            algo = mcp_algorithm if args.algorithm == "mcp" else acp_algorithm
            run_pool, estimator = _make_estimator(graph, args)
            kwargs = dict(
                gamma=args.gamma, epsilon=args.epsilon, p_low=args.p_low,
                seed=args.seed, depth=args.depth, estimator=estimator,
                estimator_mode=args.estimator, sample_mode=args.sample_mode,
                samples_init=args.samples_init, workers=args.workers,
                schedule=args.schedule, oracle_limit=args.oracle_limit,
            )
            if args.algorithm == "acp":
                kwargs["mode"] = args.mode
            clustering, report = algo(graph, k, **kwargs)
        if clustering is not None:
            _attach_avpr(report, clustering, _avpr_pool(args, graph, run_pool))
        _write_csv_row(args.csv, report)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help; keep its code
        return int(exc.code or 0)
    try:
        if args.command in ("mcp", "acp", "gmm"):
            return _cmd_cluster(args)
        if args.command == "metrics":
            return _cmd_metrics(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        raise ValueError(f"unknown command {args.command!r}")
    except (GraphFormatError, OracleLimitError, ValueError, KeyError,
            OSError, json.JSONDecodeError) as exc:
        print(f"ugclust: error: {exc}", file=sys.stderr)
        return 2


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
