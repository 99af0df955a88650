"""Shared helpers for the test suite: seeded random graph generators."""

from __future__ import annotations

import numpy as np

from ugclust import UncertainGraph


def random_graph(rng, n_min=3, n_max=8, max_edges=12, p_min=0.0):
    """Random uncertain graph: n in [n_min, n_max], up to max_edges edges,
    probabilities uniform in (p_min, 1]."""
    n = int(rng.integers(n_min, n_max + 1))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    m = int(rng.integers(1, min(max_edges, len(pairs)) + 1))
    chosen = rng.choice(len(pairs), size=m, replace=False)
    edges = []
    for idx in chosen.tolist():
        u, v = pairs[idx]
        p = p_min + (1.0 - p_min) * (1.0 - rng.random())  # in (p_min, 1]
        edges.append((u, v, p))
    return UncertainGraph(
        [str(i) for i in range(n)],
        [e[0] for e in edges],
        [e[1] for e in edges],
        [e[2] for e in edges],
    )


def random_connected_graph(rng, n_min=3, n_max=8, extra_edges=3, p_min=0.0):
    """Random connected uncertain graph: spanning tree plus a few extras."""
    n = int(rng.integers(n_min, n_max + 1))
    edges = {}
    order = rng.permutation(n)
    for i in range(1, n):
        a = int(order[i])
        b = int(order[int(rng.integers(0, i))])
        edges[(min(a, b), max(a, b))] = None
    for _ in range(int(rng.integers(0, extra_edges + 1))):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            edges[(min(int(a), int(b)), max(int(a), int(b)))] = None
    keys = sorted(edges)
    ps = [p_min + (1.0 - p_min) * (1.0 - rng.random()) for _ in keys]
    return UncertainGraph(
        [str(i) for i in range(n)],
        [k[0] for k in keys],
        [k[1] for k in keys],
        ps,
    )


def enumerate_connection_prob(graph, u, v):
    """Independent reference oracle: plain 2^m enumeration with BFS."""
    m = graph.m
    total = 0.0
    for bits in range(1 << m):
        w = 1.0
        adj = {i: [] for i in range(graph.n)}
        for e in range(m):
            p = float(graph.edge_p[e])
            if bits >> e & 1:
                w *= p
                adj[int(graph.edge_u[e])].append(int(graph.edge_v[e]))
                adj[int(graph.edge_v[e])].append(int(graph.edge_u[e]))
            else:
                w *= 1.0 - p
        if w == 0.0:
            continue
        seen = {u}
        stack = [u]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if v in seen:
            total += w
    return total
