"""Clustering algorithms for uncertain graphs.

`min_partial` is the greedy primitive: it places up to k centers, each
chosen to cover as many still-uncovered nodes as possible at a probability
threshold.  The two drivers search for the best threshold: `mcp` maximizes
the minimum connection probability of any node to its center, `acp` the
average.  Both work against either the exact oracle or a Monte Carlo
estimator over a growing world pool.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .graph import UncertainGraph, WorldSamplePool
from .metrics import QualityReport, score_clustering
from .oracle import (
    DEFAULT_UNCERTAIN_EDGE_LIMIT,
    ExactOracle,
    PoolEstimator,
    exact_pairwise_matrix,
    samples_acp,
    samples_mcp,
)

DEFAULT_GAMMA = 0.1
DEFAULT_EPSILON = 0.1
DEFAULT_P_LOW = 1e-4
DEFAULT_SEED = 1234
DEFAULT_SAMPLES_INIT = 50

# slack for >= threshold comparisons on floating-point estimates
_TOL = 1e-12


@dataclass
class Clustering:
    """A (possibly partial) assignment of nodes to k centers.

    `assignment[u]` is the cluster index of node u, or -1 if uncovered;
    `estimates[u]` is the estimated connection probability of u to its
    center (0 for uncovered nodes, 1 for centers).
    """

    k: int
    centers: list[int]
    assignment: np.ndarray
    estimates: np.ndarray
    params: dict = field(default_factory=dict)

    def is_full(self) -> bool:
        return not np.any(self.assignment < 0)

    def coverage(self) -> int:
        return int(np.sum(self.assignment >= 0))

    def cluster_sizes(self) -> list[int]:
        return [int(np.sum(self.assignment == i)) for i in range(self.k)]

    def members(self, i: int) -> list[int]:
        return np.flatnonzero(self.assignment == i).tolist()


@dataclass
class GuessSchedule:
    """Sequence of decreasing probability guesses plus the refinement rule.

    The default `doubling` schedule opens the gap to 1 geometrically:
    1, 1-g, 1-2g, 1-4g, ..., floored at p_low.  The `geometric` schedule
    divides by (1+g) each step.  After the first success, the driver
    bisects between the bracketing guesses until `done(lo, hi)`.
    """

    gamma: float = DEFAULT_GAMMA
    p_low: float = DEFAULT_P_LOW
    mode: str = "doubling"

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ValueError(f"gamma {self.gamma} must be positive")
        if not 0.0 < self.p_low < 1.0:
            raise ValueError(f"probability floor {self.p_low} outside (0, 1)")
        if self.mode not in ("doubling", "geometric"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")

    def guesses(self):
        yield 1.0
        if self.mode == "doubling":
            gap = self.gamma
            while 1.0 - gap > self.p_low:
                yield 1.0 - gap
                gap *= 2.0
        else:
            q = 1.0 / (1.0 + self.gamma)
            while q > self.p_low:
                yield q
                q /= 1.0 + self.gamma
        yield self.p_low

    def done(self, lo: float, hi: float) -> bool:
        """Stop refining once the bracket ratio is within the guarantee."""
        return lo / hi > 1.0 / (1.0 + self.gamma)


def _validate_depths(n: int, depth, select_depth):
    if depth is None:
        if select_depth is not None:
            raise ValueError("select_depth given without depth")
        return None, None
    depth = int(depth)
    if not (1 <= depth < n):
        raise ValueError(f"hop limit {depth} outside [1, n-1]")
    if select_depth is None:
        return depth, depth
    select_depth = int(select_depth)
    if not (1 <= select_depth <= depth):
        raise ValueError(
            f"selection depth {select_depth} outside [1, depth={depth}]"
        )
    return depth, select_depth


def min_partial(
    graph: UncertainGraph,
    k: int,
    q: float,
    alpha: int,
    q_bar: float,
    estimator,
    epsilon: float = 0.0,
    depth: int | None = None,
    select_depth: int | None = None,
    select_rng: np.random.Generator | None = None,
) -> Clustering:
    """Greedy partial k-clustering covering nodes at threshold q.

    Each of up to k iterations scores a candidate set T of min(alpha, #
    uncovered) nodes by how many uncovered nodes they would cover at
    threshold (1 - eps/2) * q_bar, picks the best as the next center, and
    removes every node within (1 - eps/2) * q of it.  T is the alpha
    uncovered nodes of smallest id, or a seeded uniform draw when
    `select_rng` is given.  Covered nodes end up assigned to their
    best-estimate center.
    """
    n = graph.n
    if not 1 <= k <= n:
        raise ValueError(f"cluster count {k} outside [1, n]")
    if not (0.0 < q <= q_bar <= 1.0):
        raise ValueError(f"thresholds must satisfy 0 < q <= q_bar <= 1, got {q}, {q_bar}")
    if alpha < 1:
        raise ValueError(f"candidate set size {alpha} must be >= 1")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon {epsilon} outside [0, 1)")
    depth, select_depth = _validate_depths(n, depth, select_depth)

    select_thresh = (1.0 - epsilon / 2.0) * q_bar - _TOL
    cover_thresh = (1.0 - epsilon / 2.0) * q - _TOL

    uncovered = np.ones(n, dtype=bool)
    centers: list[int] = []
    while len(centers) < k and uncovered.any():
        pool = np.flatnonzero(uncovered)
        t = min(alpha, pool.size)
        if select_rng is None:
            cand = pool[:t]
        else:
            cand = np.sort(select_rng.choice(pool, size=t, replace=False))
        best_v = -1
        best_score = -1
        for v in cand.tolist():
            row = estimator.probs_from(v, select_depth)
            score = int(np.sum(uncovered & (row >= select_thresh)))
            if score > best_score:
                best_v, best_score = v, score
        centers.append(best_v)
        row = estimator.probs_from(best_v, depth)
        uncovered &= ~(row >= cover_thresh)

    # Pad to k centers: uncovered nodes first, then any non-center.
    if len(centers) < k:
        taken = set(centers)
        for v in itertools.chain(
            np.flatnonzero(uncovered).tolist(), range(n)
        ):
            if len(centers) == k:
                break
            if v not in taken:
                centers.append(v)
                taken.add(v)
                uncovered[v] = False

    assignment = np.full(n, -1, dtype=np.int64)
    estimates = np.zeros(n)
    covered = np.flatnonzero(~uncovered)
    if covered.size:
        rows = np.stack([estimator.probs_from(c, depth) for c in centers])
        sub = rows[:, covered]
        idx = np.argmax(sub, axis=0)  # ties break to the smallest index
        assignment[covered] = idx
        estimates[covered] = sub[idx, np.arange(covered.size)]
    for i, c in enumerate(centers):
        assignment[c] = i
        estimates[c] = 1.0

    return Clustering(
        k=k,
        centers=centers,
        assignment=assignment,
        estimates=estimates,
        params={
            "q": q,
            "q_bar": q_bar,
            "alpha": alpha,
            "epsilon": epsilon,
            "depth": depth,
            "select_depth": select_depth,
        },
    )


def min_partial_d(
    graph: UncertainGraph,
    k: int,
    q: float,
    alpha: int,
    q_bar: float,
    d: int,
    d_prime: int,
    estimator,
    epsilon: float = 0.0,
) -> Clustering:
    """min_partial with d'-hop selection disks and d-hop coverage disks."""
    return min_partial(
        graph, k, q, alpha, q_bar, estimator,
        epsilon=epsilon, depth=d, select_depth=d_prime,
    )


def complete_clustering(partial: Clustering, estimator, depth: int | None = None) -> Clustering:
    """Assign every uncovered node to its best-estimate center.

    Nodes with zero estimated probability to every center land in cluster
    0 with estimate 0.  Already-full clusterings are returned unchanged.
    """
    if partial.is_full():
        return partial
    assignment = partial.assignment.copy()
    estimates = partial.estimates.copy()
    unc = np.flatnonzero(assignment < 0)
    rows = np.stack([estimator.probs_from(c, depth) for c in partial.centers])
    sub = rows[:, unc]
    idx = np.argmax(sub, axis=0)
    assignment[unc] = idx
    estimates[unc] = sub[idx, np.arange(unc.size)]
    return Clustering(
        k=partial.k,
        centers=list(partial.centers),
        assignment=assignment,
        estimates=estimates,
        params=dict(partial.params),
    )


# ---------------------------------------------------------------------------
# Threshold-search drivers


class _Driver:
    """Shared estimator construction and progressive pool sizing."""

    def __init__(self, graph, estimator, estimator_mode, seed, workers,
                 sample_mode, samples_init, oracle_limit):
        self.graph = graph
        self.sample_mode = sample_mode
        self.samples_init = max(1, int(samples_init))
        if sample_mode not in ("practical", "theory"):
            raise ValueError(f"unknown sample mode {sample_mode!r}")
        if estimator is not None:
            self.estimator = estimator
            self.pool = getattr(estimator, "pool", None)
        elif estimator_mode == "exact":
            self.estimator = ExactOracle(graph, limit=oracle_limit)
            self.pool = None
        elif estimator_mode == "mc":
            self.pool = WorldSamplePool(graph, seed, workers=workers)
            self.estimator = PoolEstimator(self.pool)
        else:
            raise ValueError(f"unknown estimator mode {estimator_mode!r}")
        self.exact = self.pool is None
        self._q_min = None  # smallest threshold sampled for so far

    def prepare(self, q: float, theory_r: int):
        """Size the pool for a run at guess q.

        Theory mode jumps straight to the bound; practical mode starts at
        `samples_init` worlds and doubles whenever the guess drops below
        anything seen before, capped by the bound.
        """
        if self.pool is None:
            return
        if self.sample_mode == "theory":
            target = theory_r
        elif self._q_min is None:
            target = min(self.samples_init, theory_r)
        elif q < self._q_min:
            target = min(max(self.pool.r * 2, self.samples_init), theory_r)
        else:
            target = self.pool.r
        if self._q_min is None or q < self._q_min:
            self._q_min = q
        self.pool.extend(max(target, 1))

    @property
    def r(self):
        return None if self.pool is None else self.pool.r


def mcp(
    graph: UncertainGraph,
    k: int,
    gamma: float = DEFAULT_GAMMA,
    epsilon: float = DEFAULT_EPSILON,
    p_low: float = DEFAULT_P_LOW,
    seed: int = DEFAULT_SEED,
    depth: int | None = None,
    estimator=None,
    estimator_mode: str = "mc",
    sample_mode: str = "practical",
    samples_init: int = DEFAULT_SAMPLES_INIT,
    workers: int = 1,
    schedule: str = "doubling",
    oracle_limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT,
) -> tuple[Clustering | None, QualityReport]:
    """Maximize the minimum connection probability to a center.

    Lowers the threshold guess until the greedy covers every node, then
    bisects between the bracketing guesses.  Returns (None, report) with
    outcome "no-clustering" if even the floor p_low fails.
    """
    drv = _Driver(graph, estimator, estimator_mode, seed, workers,
                  sample_mode, samples_init, oracle_limit)
    eps = 0.0 if drv.exact else epsilon
    sched = GuessSchedule(gamma, p_low, schedule)
    n = graph.n

    def run(q: float) -> Clustering:
        drv.prepare(q, samples_mcp(q, epsilon, gamma, p_low, max(n, 2)))
        return min_partial(graph, k, q, 1, q, drv.estimator, eps, depth=depth)

    iterations = 0
    best = None
    best_q = None
    fail_q = None
    for q in sched.guesses():
        iterations += 1
        c = run(q)
        if c.is_full():
            best, best_q = c, q
            break
        fail_q = q

    report = QualityReport(algorithm="mcp", k=k, seed=seed,
                           iterations=iterations, r=drv.r)
    if best is None:
        report.outcome = "no-clustering"
        report.q_final = p_low
        return None, report

    lo, hi = best_q, (fail_q if fail_q is not None else best_q)
    while not sched.done(lo, hi):
        mid = (lo + hi) / 2.0
        iterations += 1
        c = run(mid)
        if c.is_full():
            best, lo = c, mid
        else:
            hi = mid

    report.iterations = iterations
    report.r = drv.r
    report.q_final = lo
    report.cluster_sizes = best.cluster_sizes()
    report.min_prob, report.avg_prob = score_clustering(best, drv.estimator, depth)
    best.params.update({"gamma": gamma, "epsilon": epsilon, "p_low": p_low,
                        "seed": seed, "r": drv.r})
    return best, report


def acp(
    graph: UncertainGraph,
    k: int,
    gamma: float = DEFAULT_GAMMA,
    epsilon: float = DEFAULT_EPSILON,
    p_low: float = DEFAULT_P_LOW,
    seed: int = DEFAULT_SEED,
    depth: int | None = None,
    mode: str = "practical",
    estimator=None,
    estimator_mode: str = "mc",
    sample_mode: str = "practical",
    samples_init: int = DEFAULT_SAMPLES_INIT,
    workers: int = 1,
    schedule: str = "doubling",
    oracle_limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT,
) -> tuple[Clustering, QualityReport]:
    """Maximize the average connection probability to a center.

    Runs the greedy at decreasing guesses, completes each partial
    clustering, and keeps the completion with the best measured average.
    `mode="practical"` uses coverage threshold q with a single candidate
    per iteration; `mode="theory"` uses threshold q^3 with all uncovered
    nodes as candidates (and selection depth floor(depth/3) when depth-limited).
    """
    if mode not in ("practical", "theory"):
        raise ValueError(f"unknown acp mode {mode!r}")
    drv = _Driver(graph, estimator, estimator_mode, seed, workers,
                  sample_mode, samples_init, oracle_limit)
    eps = 0.0 if drv.exact else epsilon
    sched = GuessSchedule(gamma, p_low, schedule)
    n = graph.n

    iterations = 0
    phi_best = 0.0
    best = None
    best_avg = -1.0
    best_q = None
    for q in sched.guesses():
        if mode == "practical":
            cover_q, alpha, sel_depth = q, 1, depth
        else:
            cover_q, alpha = q**3, n
            sel_depth = max(1, depth // 3) if depth is not None else None
        if best is not None and cover_q < phi_best:
            break
        iterations += 1
        drv.prepare(cover_q, samples_acp(q, epsilon, gamma, p_low, max(n, 2)))
        part = min_partial(graph, k, cover_q, alpha, q, drv.estimator, eps,
                           depth=depth, select_depth=sel_depth)
        # Algorithm invariant value: uncovered nodes contribute 0.
        phi = float(np.sum(part.estimates[part.assignment >= 0])) / n
        phi_best = max(phi_best, phi)
        full = complete_clustering(part, drv.estimator, depth)
        avg = float(np.mean(full.estimates))
        if avg > best_avg:
            best, best_avg, best_q = full, avg, q

    report = QualityReport(algorithm="acp", k=k, seed=seed,
                           iterations=iterations, r=drv.r,
                           q_final=best_q, phi=phi_best)
    report.cluster_sizes = best.cluster_sizes()
    report.min_prob, report.avg_prob = score_clustering(best, drv.estimator, depth)
    best.params.update({"gamma": gamma, "epsilon": epsilon, "p_low": p_low,
                        "seed": seed, "r": drv.r, "mode": mode})
    return best, report


# ---------------------------------------------------------------------------
# Brute-force test oracle


def brute_force_optimum(
    graph: UncertainGraph,
    k: int,
    objective: str,
    depth: int | None = None,
    max_nodes: int = 10,
    limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT,
) -> tuple[float, Clustering]:
    """Optimal k-clustering by exhaustive center enumeration.

    `objective` is "min" or "avg".  Every node is assigned to its
    exact-best center; all k-subsets of nodes are tried.
    """
    n = graph.n
    if n > max_nodes:
        raise ValueError(f"{n} nodes exceeds the brute-force limit of {max_nodes}")
    if not 1 <= k <= n:
        raise ValueError(f"cluster count {k} outside [1, n]")
    if objective not in ("min", "avg"):
        raise ValueError(f"unknown objective {objective!r}")
    P = exact_pairwise_matrix(graph, d=depth, limit=limit)
    np.fill_diagonal(P, 1.0)

    best_val = -1.0
    best_centers = None
    best_idx = None
    best_est = None
    for centers in itertools.combinations(range(n), k):
        sub = P[list(centers), :]
        idx = np.argmax(sub, axis=0)
        est = sub[idx, np.arange(n)]
        for i, c in enumerate(centers):
            idx[c] = i
            est[c] = 1.0
        val = float(est.min()) if objective == "min" else float(est.mean())
        if val > best_val:
            best_val, best_centers, best_idx, best_est = val, centers, idx, est
    clustering = Clustering(
        k=k,
        centers=list(best_centers),
        assignment=best_idx.astype(np.int64),
        estimates=best_est,
        params={"objective": objective, "depth": depth, "brute_force": True},
    )
    return best_val, clustering
