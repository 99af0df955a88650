"""Deterministic baseline: farthest-point k-center on -log probabilities.

Each edge gets weight ln(1/p); shortest-path distance under these weights
is the negative log of the most probable single path, so exp(-dist) lower
bounds the true connection probability.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .clustering import Clustering
from .graph import UncertainGraph


def _weight_matrix(graph: UncertainGraph):
    w = np.log(1.0 / graph.edge_p)
    return coo_matrix(
        (np.concatenate([w, w]),
         (np.concatenate([graph.edge_u, graph.edge_v]),
          np.concatenate([graph.edge_v, graph.edge_u]))),
        shape=(graph.n, graph.n),
    ).tocsr()


def gmm(graph: UncertainGraph, k: int) -> Clustering:
    """Farthest-point clustering: k centers, nearest-center assignment.

    The first center is node 0; each further center is the node farthest
    (by weighted shortest path) from the current center set, with
    unreachable nodes treated as infinitely far so every component gets a
    center before any component is subdivided.  Ties break to the smallest
    node id.  Per-node estimates are exp(-dist) for comparability with the
    probabilistic algorithms.
    """
    n = graph.n
    if not 1 <= k <= n:
        raise ValueError(f"cluster count {k} outside [1, n]")
    adj = _weight_matrix(graph)
    centers = [0]
    dist = dijkstra(adj, directed=False, indices=[0])  # (len(centers), n)
    while len(centers) < k:
        nearest = dist.min(axis=0)
        # argmax with +inf > everything: isolates get centers first
        far = int(np.argmax(nearest))
        centers.append(far)
        dist = np.vstack([dist, dijkstra(adj, directed=False, indices=[far])])

    idx = np.argmin(dist, axis=0)  # ties break to the smallest cluster index
    best = dist[idx, np.arange(n)]
    assignment = idx.astype(np.int64)
    estimates = np.where(np.isinf(best), 0.0, np.exp(-best))
    for i, c in enumerate(centers):
        assignment[c] = i
        estimates[c] = 1.0
    return Clustering(
        k=k,
        centers=centers,
        assignment=assignment,
        estimates=estimates,
        params={"algorithm": "gmm"},
    )
