"""Connection-probability oracles and sample-size formulas.

Exact probabilities are computed by summing over edge realizations.  For
unlimited-depth queries the enumeration is organized as a dynamic program
over node partitions (worlds that induce the same partition of the nodes
are merged), which is never worse than enumerating all 2^m realizations and
usually far cheaper.  Depth-limited queries fall back to full enumeration
with a per-world breadth-first search, since hop distances are not a
function of the partition.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .graph import (
    UncertainGraph,
    WorldSamplePool,
    _bfs_limited,
    _labels_union_find,
    _masked_adjacency,
)

DEFAULT_UNCERTAIN_EDGE_LIMIT = 25


class OracleLimitError(ValueError):
    """Exact computation refused: too many uncertain edges."""


@dataclass(frozen=True)
class ProbEstimate:
    """A Monte Carlo estimate of a connection probability.

    `value` is a multiple of 1/r; `regime` records the probability
    threshold the sample size was dimensioned for, when known.
    """

    value: float
    r: int
    regime: float | None = None


@dataclass(frozen=True)
class SamplePlan:
    """A sample count together with the parameters that produced it."""

    q: float
    epsilon: float
    gamma: float
    p_low: float
    n: int
    r: int

    @classmethod
    def for_min_objective(cls, q, epsilon, gamma, p_low, n):
        return cls(q, epsilon, gamma, p_low, n, samples_mcp(q, epsilon, gamma, p_low, n))

    @classmethod
    def for_avg_objective(cls, q, epsilon, gamma, p_low, n):
        return cls(q, epsilon, gamma, p_low, n, samples_acp(q, epsilon, gamma, p_low, n))


# ---------------------------------------------------------------------------
# Exact computation


def _check_limit(count: int, limit: int):
    if count > limit:
        raise OracleLimitError(
            f"{count} uncertain edges exceeds the exact-oracle limit of {limit}"
        )


def _merge_partition(part: tuple, a: int, b: int) -> tuple:
    la, lb = part[a], part[b]
    if la == lb:
        return part
    lo, hi = (la, lb) if la < lb else (lb, la)
    # Replacing the larger label keeps labels canonical (min id per class).
    return tuple(lo if x == hi else x for x in part)


def _resolve_edge(graph: UncertainGraph, e) -> int:
    if isinstance(e, (int, np.integer)):
        if not 0 <= int(e) < graph.m:
            raise ValueError(f"edge index {e} out of range")
        return int(e)
    u, v = e
    return graph.edge_index(int(u), int(v))


def _partition_distribution(
    graph: UncertainGraph,
    forced: dict[int, bool] | None = None,
    limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT,
) -> dict[tuple, float]:
    """Probability of each node partition induced by a random world.

    `forced` pins edges present/absent; the returned weights are then the
    conditional distribution given those events.
    """
    forced = forced or {}
    certain = []
    uncertain = []
    for i in range(graph.m):
        if i in forced:
            if forced[i]:
                certain.append(i)
            elif graph.edge_p[i] >= 1.0:
                raise ValueError(
                    "cannot condition on the absence of a certain (p=1) edge"
                )
            continue
        if graph.edge_p[i] >= 1.0:
            certain.append(i)
        else:
            uncertain.append(i)
    _check_limit(len(uncertain), limit)

    base = tuple(
        _labels_union_find(
            graph.n,
            graph.edge_u[certain] if certain else np.zeros(0, dtype=np.int64),
            graph.edge_v[certain] if certain else np.zeros(0, dtype=np.int64),
        ).tolist()
    )
    states = {base: 1.0}
    for i in uncertain:
        p = float(graph.edge_p[i])
        u, v = int(graph.edge_u[i]), int(graph.edge_v[i])
        nxt: dict[tuple, float] = {}
        for part, w in states.items():
            nxt[part] = nxt.get(part, 0.0) + w * (1.0 - p)
            merged = _merge_partition(part, u, v)
            nxt[merged] = nxt.get(merged, 0.0) + w * p
        states = nxt
    return states


def exact_connection_prob(
    graph: UncertainGraph, u: int, v: int, limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT
) -> float:
    """Exact probability that u and v are connected in a random world."""
    if u == v:
        return 1.0
    states = _partition_distribution(graph, limit=limit)
    return math.fsum(w for part, w in states.items() if part[u] == part[v])


def exact_conditional_prob(
    graph: UncertainGraph,
    u: int,
    v: int,
    e,
    present: bool,
    limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT,
) -> float:
    """Exact Pr(u ~ v) conditioned on edge `e` being present or absent."""
    idx = _resolve_edge(graph, e)
    if u == v:
        return 1.0
    states = _partition_distribution(graph, forced={idx: bool(present)}, limit=limit)
    return math.fsum(w for part, w in states.items() if part[u] == part[v])


def exact_pairwise_matrix(
    graph: UncertainGraph,
    d: int | None = None,
    limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT,
    forced: dict[int, bool] | None = None,
) -> np.ndarray:
    """All-pairs exact connection probabilities (optionally depth-limited)."""
    n = graph.n
    if d is not None:
        if not (1 <= d < max(n, 2)):
            raise ValueError(f"hop limit {d} outside [1, n-1]")
        return _d_cumulative_matrices(graph, limit, forced)[:, :, d]
    states = _partition_distribution(graph, forced=forced, limit=limit)
    out = np.zeros((n, n))
    for part, w in states.items():
        lab = np.asarray(part)
        out += w * (lab[:, None] == lab[None, :])
    return out


def _d_cumulative_matrices(
    graph: UncertainGraph,
    limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT,
    forced: dict[int, bool] | None = None,
) -> np.ndarray:
    """C[u, v, d] = exact Pr(u and v within <= d hops), for all d in 0..n-1.

    Full enumeration over uncertain-edge subsets with per-world BFS.
    """
    forced = forced or {}
    n = graph.n
    uncertain = [
        i for i in range(graph.m) if graph.edge_p[i] < 1.0 and i not in forced
    ]
    for i, state in forced.items():
        if not state and graph.edge_p[i] >= 1.0:
            raise ValueError("cannot condition on the absence of a certain (p=1) edge")
    _check_limit(len(uncertain), limit)

    base_mask = np.zeros(graph.m, dtype=bool)
    for i in range(graph.m):
        if i in forced:
            base_mask[i] = forced[i]
        elif graph.edge_p[i] >= 1.0:
            base_mask[i] = True

    # bucket[u, v, t] accumulates the probability that hop distance == t
    bucket = np.zeros((n, n, n + 1))
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    probs = graph.edge_p[uncertain]
    for bits in itertools.product((False, True), repeat=len(uncertain)):
        sel = np.asarray(bits, dtype=bool)
        w = float(np.prod(np.where(sel, probs, 1.0 - probs))) if len(uncertain) else 1.0
        mask = base_mask.copy()
        mask[uncertain] = sel
        dist = _hop_distances(graph, mask)
        np.add.at(bucket, (ii, jj, dist), w)
    # clip the "unreachable" bucket (index n) and accumulate over distance
    cum = np.cumsum(bucket[:, :, :n], axis=2)
    return cum


def _hop_distances(graph: UncertainGraph, mask: np.ndarray) -> np.ndarray:
    """All-pairs hop distances in one realization; n stands for unreachable."""
    n = graph.n
    indptr, nbrs = _masked_adjacency(graph, mask)
    dist = np.full((n, n), n, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        frontier = [s]
        depth = 0
        while frontier:
            depth += 1
            nxt = []
            for u in frontier:
                for w in nbrs[indptr[u]:indptr[u + 1]].tolist():
                    if dist[s, w] > depth:
                        dist[s, w] = depth
                        nxt.append(w)
            frontier = nxt
    return dist


def exact_d_connection_prob(
    graph: UncertainGraph,
    u: int,
    v: int,
    d: int,
    limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT,
) -> float:
    """Exact probability that u is within <= d hops of v in a random world."""
    if not (1 <= d < graph.n):
        raise ValueError(f"hop limit {d} outside [1, n-1]")
    if u == v:
        return 1.0
    return float(_d_cumulative_matrices(graph, limit)[u, v, d])


# ---------------------------------------------------------------------------
# Monte Carlo estimation


def mc_estimate(pool: WorldSamplePool, u: int, v: int) -> ProbEstimate:
    """Fraction of pool worlds in which u and v share a component."""
    r = pool.r
    if r < 1:
        raise ValueError("pool is empty")
    if u == v:
        return ProbEstimate(1.0, r)
    labels = pool.labels_matrix()
    return ProbEstimate(float(np.mean(labels[:, u] == labels[:, v])), r)


def mc_estimate_d(pool: WorldSamplePool, u: int, v: int, d: int) -> ProbEstimate:
    """Like mc_estimate, but using <= d-hop reachability per world."""
    r = pool.r
    if r < 1:
        raise ValueError("pool is empty")
    if not (1 <= d < pool.graph.n):
        raise ValueError(f"hop limit {d} outside [1, n-1]")
    if u == v:
        return ProbEstimate(1.0, r)
    hits = 0
    for i in range(r):
        indptr, nbrs = pool.masked_adjacency(i)
        if _bfs_limited(pool.graph.n, indptr, nbrs, u, d)[v]:
            hits += 1
    return ProbEstimate(hits / r, r)


# ---------------------------------------------------------------------------
# Sample-size formulas


def required_samples_pointwise(epsilon: float, delta: float, p: float) -> int:
    """Samples for relative error epsilon with failure probability delta,
    given a lower bound p on the probability being estimated."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon {epsilon} outside (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta {delta} outside (0, 1)")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"probability bound {p} outside (0, 1]")
    return math.ceil(3.0 * math.log(2.0 / delta) / (epsilon * epsilon * p))


def _validate_schedule_params(q, epsilon, gamma, p_low, n):
    if not 0.0 < q <= 1.0:
        raise ValueError(f"threshold guess {q} outside (0, 1]")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon {epsilon} outside (0, 1)")
    if gamma <= 0.0:
        raise ValueError(f"gamma {gamma} must be positive")
    if not 0.0 < p_low < 1.0:
        raise ValueError(f"probability floor {p_low} outside (0, 1)")
    if n < 2:
        raise ValueError(f"node count {n} must be at least 2")


def samples_mcp(q: float, epsilon: float, gamma: float, p_low: float, n: int) -> int:
    """Per-iteration sample count for the min-objective schedule, sized for
    a union bound over all pairs and all threshold guesses down to p_low."""
    _validate_schedule_params(q, epsilon, gamma, p_low, n)
    guesses = 1 + math.floor(math.log(1.0 / p_low) / math.log1p(gamma))
    return math.ceil(
        12.0 / (q * epsilon * epsilon) * math.log(2.0 * n**3 * guesses)
    )


def samples_acp(q: float, epsilon: float, gamma: float, p_low: float, n: int) -> int:
    """Per-iteration sample count for the avg-objective schedule; the
    coverage threshold is q^3 and the guess range extends to H(n)/p_low."""
    _validate_schedule_params(q, epsilon, gamma, p_low, n)
    guesses = 1 + math.floor(math.log(harmonic(n) / p_low) / math.log1p(gamma))
    return math.ceil(
        12.0 / (q**3 * epsilon * epsilon) * math.log(2.0 * n**3 * guesses)
    )


def harmonic(n: int) -> float:
    """The n-th harmonic number, by direct summation."""
    if n < 1:
        raise ValueError("harmonic number defined for n >= 1")
    return math.fsum(1.0 / i for i in range(1, n + 1))


# ---------------------------------------------------------------------------
# Estimator front-ends shared by the clustering algorithms


class ExactOracle:
    """Estimator backed by exact enumeration; rows are cached per depth."""

    def __init__(self, graph: UncertainGraph, limit: int = DEFAULT_UNCERTAIN_EDGE_LIMIT):
        self.graph = graph
        self.limit = limit
        self._matrices: dict[int | None, np.ndarray] = {}

    def _matrix(self, d: int | None) -> np.ndarray:
        mat = self._matrices.get(d)
        if mat is None:
            mat = exact_pairwise_matrix(self.graph, d=d, limit=self.limit)
            self._matrices[d] = mat
        return mat

    def probs_from(self, v: int, d: int | None = None) -> np.ndarray:
        return self._matrix(d)[v]

    def prob(self, u: int, v: int, d: int | None = None) -> float:
        return float(self._matrix(d)[u, v])


class PoolEstimator:
    """Estimator backed by a world pool; per-source rows are cached and the
    cache is dropped whenever the pool grows."""

    def __init__(self, pool: WorldSamplePool):
        self.pool = pool
        self._rows: dict[tuple[int, int | None], np.ndarray] = {}
        self._cached_r = pool.r

    def _check_cache(self):
        if self._cached_r != self.pool.r:
            self._rows.clear()
            self._cached_r = self.pool.r

    def probs_from(self, v: int, d: int | None = None) -> np.ndarray:
        self._check_cache()
        key = (v, d)
        row = self._rows.get(key)
        if row is not None:
            return row
        pool = self.pool
        if pool.r < 1:
            raise ValueError("pool is empty")
        if d is None:
            labels = pool.labels_matrix()
            row = np.mean(labels == labels[:, v][:, None], axis=0)
        else:
            n = pool.graph.n
            if not (1 <= d < n):
                raise ValueError(f"hop limit {d} outside [1, n-1]")
            counts = np.zeros(n)
            for i in range(pool.r):
                indptr, nbrs = pool.masked_adjacency(i)
                counts += _bfs_limited(n, indptr, nbrs, v, d)
            row = counts / pool.r
        row[v] = 1.0
        row.flags.writeable = False
        self._rows[key] = row
        return row

    def prob(self, u: int, v: int, d: int | None = None) -> float:
        return float(self.probs_from(v, d)[u])
