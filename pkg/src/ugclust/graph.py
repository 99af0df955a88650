"""Uncertain graph representation, parsing, and possible-world sampling.

An uncertain graph is an undirected graph whose edges exist independently,
each with its own probability in (0, 1].  A *world* is one realization of
the edge set; worlds are sampled reproducibly from a (master seed, world
index) pair so that pools of worlds can be generated in parallel without
affecting the result.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

# Below this edge count a plain union-find beats the sparse-matrix setup cost.
_SCIPY_EDGE_THRESHOLD = 256

# Minimum number of worlds per extension before a process pool pays off.
_PARALLEL_MIN_WORLDS = 64


class GraphFormatError(ValueError):
    """Malformed or invalid edge-list input."""


class UncertainGraph:
    """Node set, probabilistic edge list, and label <-> dense-id mapping.

    Node ids are the contiguous range 0..n-1, assigned in order of first
    appearance of each label.  Edges are undirected, without self-loops or
    duplicates, and carry a probability in (0, 1].
    """

    def __init__(self, labels, edge_u, edge_v, edge_p):
        self.labels = [str(x) for x in labels]
        self.n = len(self.labels)
        self.edge_u = np.asarray(edge_u, dtype=np.int64)
        self.edge_v = np.asarray(edge_v, dtype=np.int64)
        self.edge_p = np.asarray(edge_p, dtype=np.float64)
        self.m = int(self.edge_u.shape[0])

        self.label_to_id = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.label_to_id) != self.n:
            raise GraphFormatError("duplicate node labels")
        if self.edge_v.shape != (self.m,) or self.edge_p.shape != (self.m,):
            raise GraphFormatError("edge arrays have mismatched lengths")
        if self.m:
            if self.edge_u.min(initial=0) < 0 or max(
                self.edge_u.max(initial=0), self.edge_v.max(initial=0)
            ) >= self.n:
                raise GraphFormatError("edge endpoint out of range")
            if np.any(self.edge_u == self.edge_v):
                raise GraphFormatError("self-loop")
            if np.any((self.edge_p <= 0.0) | (self.edge_p > 1.0)):
                raise GraphFormatError("edge probability outside (0, 1]")
        self._pair_index: dict[tuple[int, int], int] = {}
        for i in range(self.m):
            key = _edge_key(int(self.edge_u[i]), int(self.edge_v[i]))
            if key in self._pair_index:
                raise GraphFormatError(f"duplicate edge {key}")
            self._pair_index[key] = i

    @classmethod
    def from_edge_list(cls, edges):
        """Build a graph from an iterable of (label_u, label_v, p) triples."""
        labels: list[str] = []
        seen: dict[str, int] = {}
        eu, ev, ep = [], [], []
        for a, b, p in edges:
            for lab in (str(a), str(b)):
                if lab not in seen:
                    seen[lab] = len(labels)
                    labels.append(lab)
            eu.append(seen[str(a)])
            ev.append(seen[str(b)])
            ep.append(float(p))
        return cls(labels, eu, ev, ep)

    def id_of(self, label) -> int:
        try:
            return self.label_to_id[str(label)]
        except KeyError:
            raise KeyError(f"unknown node label {label!r}") from None

    def edge_index(self, u: int, v: int) -> int:
        try:
            return self._pair_index[_edge_key(u, v)]
        except KeyError:
            raise KeyError(f"no edge between nodes {u} and {v}") from None

    def uncertain_edge_indices(self) -> np.ndarray:
        """Indices of edges with p < 1 (the genuinely random ones)."""
        return np.flatnonzero(self.edge_p < 1.0)

    def __repr__(self):
        return f"UncertainGraph(n={self.n}, m={self.m})"


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def load_graph(source) -> UncertainGraph:
    """Parse an edge list: one `<label_u> <label_v> <p>` per line.

    `source` is a file-like object (text or binary) or a path.  Lines that
    are blank or start with `#` are ignored.  Rejects self-loops, duplicate
    edges, and probabilities outside (0, 1], reporting the line number.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return load_graph(fh)

    edges = []
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise GraphFormatError(f"line {lineno}: not valid UTF-8") from exc
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise GraphFormatError(
                f"line {lineno}: expected 3 fields, got {len(fields)}"
            )
        a, b, ptxt = fields
        try:
            p = float(ptxt)
        except ValueError:
            raise GraphFormatError(
                f"line {lineno}: unparsable probability {ptxt!r}"
            ) from None
        if not (0.0 < p <= 1.0):
            raise GraphFormatError(f"line {lineno}: probability {p} outside (0, 1]")
        if a == b:
            raise GraphFormatError(f"line {lineno}: self-loop on {a!r}")
        edges.append((a, b, p, lineno))

    try:
        return UncertainGraph.from_edge_list((a, b, p) for a, b, p, _ in edges)
    except GraphFormatError as exc:
        if "duplicate edge" in str(exc):
            # recover the offending line for the error message
            seen = set()
            ids: dict[str, int] = {}
            for a, b, _, lineno in edges:
                for lab in (a, b):
                    ids.setdefault(lab, len(ids))
                key = _edge_key(ids[a], ids[b])
                if key in seen:
                    raise GraphFormatError(
                        f"line {lineno}: duplicate edge {a} {b}"
                    ) from None
                seen.add(key)
        raise


def collaboration_probability(x) -> float:
    """Edge probability for a pair with `x` joint observations: 1 - exp(-x/2).

    One observation maps to ~0.39, two to ~0.63, five to ~0.92.
    """
    x = float(x)
    if x < 0:
        raise ValueError("observation count must be nonnegative")
    return 1.0 - math.exp(-x / 2.0)


# ---------------------------------------------------------------------------
# World sampling


@dataclass(frozen=True)
class WorldSample:
    """One sampled world, stored as canonical per-node component labels.

    Two nodes share a label iff they are connected in this world.  Labels
    are canonical (each label is the smallest node id in its component), so
    equal worlds compare bitwise.  The edge realization itself is not kept;
    it can be re-derived from (master_seed, index).
    """

    master_seed: int
    index: int
    labels: np.ndarray


def _world_rng(master_seed: int, index: int) -> np.random.Generator:
    # One independent stream per (seed, index); edge i consumes draw i.
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def realized_edge_mask(graph: UncertainGraph, master_seed: int, index: int) -> np.ndarray:
    """Boolean mask over graph edges realized in world `index`."""
    if graph.m == 0:
        return np.zeros(0, dtype=bool)
    return _world_rng(master_seed, index).random(graph.m) < graph.edge_p


def _labels_union_find(n: int, us, vs) -> np.ndarray:
    parent = list(range(n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    # Union by smaller root id: the root is then the minimum id of its
    # component, which is exactly the canonical label.
    for a, b in zip(us.tolist(), vs.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    return np.array([find(x) for x in range(n)], dtype=np.int32)


def component_labels_for_mask(graph: UncertainGraph, mask: np.ndarray) -> np.ndarray:
    """Canonical component labels of the world realized by `mask`."""
    n = graph.n
    us = graph.edge_u[mask]
    vs = graph.edge_v[mask]
    if us.size <= _SCIPY_EDGE_THRESHOLD:
        return _labels_union_find(n, us, vs)
    adj = coo_matrix((np.ones(us.size, dtype=np.int8), (us, vs)), shape=(n, n))
    _, comp = connected_components(adj, directed=False)
    first = np.full(comp.max() + 1, n, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(n))
    return first[comp].astype(np.int32)


def sample_world(graph: UncertainGraph, master_seed: int, index: int) -> WorldSample:
    """Sample world `index`: each edge present independently with its p."""
    mask = realized_edge_mask(graph, master_seed, index)
    return WorldSample(int(master_seed), int(index), component_labels_for_mask(graph, mask))


def _masked_adjacency(graph: UncertainGraph, mask: np.ndarray):
    """CSR-style (indptr, neighbors) for the realized edges only."""
    n = graph.n
    us = graph.edge_u[mask]
    vs = graph.edge_v[mask]
    heads = np.concatenate([us, vs])
    tails = np.concatenate([vs, us])
    order = np.argsort(heads, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, heads + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, tails[order]


def _bfs_limited(n: int, indptr, nbrs, source: int, d: int) -> np.ndarray:
    """Nodes within <= d hops of source; returns a boolean reach mask."""
    reached = np.zeros(n, dtype=bool)
    reached[source] = True
    frontier = np.array([source], dtype=np.int64)
    for _ in range(d):
        if frontier.size == 0:
            break
        chunks = [nbrs[indptr[u]:indptr[u + 1]] for u in frontier.tolist()]
        if not chunks:
            break
        cand = np.concatenate(chunks)
        new = cand[~reached[cand]]
        if new.size == 0:
            break
        reached[new] = True
        frontier = np.unique(new)
    return reached


def d_reachable(world: WorldSample, graph: UncertainGraph, source: int, d: int) -> set[int]:
    """Nodes within <= d hops of `source` in the realized world.

    The edge realization is re-derived from (master_seed, index).
    """
    if not (1 <= d < graph.n):
        raise ValueError(f"hop limit {d} outside [1, n-1]")
    mask = realized_edge_mask(graph, world.master_seed, world.index)
    indptr, nbrs = _masked_adjacency(graph, mask)
    reach = _bfs_limited(graph.n, indptr, nbrs, source, d)
    return set(np.flatnonzero(reach).tolist())


def _sample_labels_chunk(args):
    graph, master_seed, start, count = args
    return [
        component_labels_for_mask(graph, realized_edge_mask(graph, master_seed, i))
        for i in range(start, start + count)
    ]


class WorldSamplePool:
    """A growable pool of sampled worlds over one graph.

    Worlds are keyed by index, so the pool content is a pure function of
    (graph, master seed, size): extending never changes existing worlds and
    the result is independent of the worker count.
    """

    def __init__(self, graph: UncertainGraph, master_seed: int, workers: int = 1):
        self.graph = graph
        self.master_seed = int(master_seed)
        self.workers = max(1, int(workers))
        self._labels: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None
        self._masks: dict[int, np.ndarray] = {}
        self._adjacency: dict[int, tuple] = {}

    @property
    def r(self) -> int:
        return len(self._labels)

    def labels_matrix(self) -> np.ndarray:
        """All component labels stacked as an (r, n) array."""
        if self._matrix is None or self._matrix.shape[0] != self.r:
            self._matrix = (
                np.vstack(self._labels)
                if self._labels
                else np.zeros((0, self.graph.n), dtype=np.int32)
            )
        return self._matrix

    def extend(self, target_r: int) -> "WorldSamplePool":
        """Grow the pool to target_r worlds; a no-op if already that large."""
        target_r = int(target_r)
        start = self.r
        count = target_r - start
        if count <= 0:
            return self
        if self.workers > 1 and count >= _PARALLEL_MIN_WORLDS:
            per = -(-count // self.workers)
            chunks = [
                (self.graph, self.master_seed, start + i * per,
                 min(per, count - i * per))
                for i in range(self.workers)
                if i * per < count
            ]
            with ProcessPoolExecutor(max_workers=self.workers) as ex:
                for part in ex.map(_sample_labels_chunk, chunks):
                    self._labels.extend(part)
        else:
            self._labels.extend(
                _sample_labels_chunk((self.graph, self.master_seed, start, count))
            )
        self._matrix = None
        return self

    def world(self, index: int) -> WorldSample:
        return WorldSample(self.master_seed, index, self._labels[index])

    def edge_mask(self, index: int) -> np.ndarray:
        """Realized edge mask of world `index` (re-derived, then cached)."""
        mask = self._masks.get(index)
        if mask is None:
            mask = realized_edge_mask(self.graph, self.master_seed, index)
            self._masks[index] = mask
        return mask

    def masked_adjacency(self, index: int):
        adj = self._adjacency.get(index)
        if adj is None:
            adj = _masked_adjacency(self.graph, self.edge_mask(index))
            self._adjacency[index] = adj
        return adj


def extend_pool(pool: WorldSamplePool, target_r: int) -> WorldSamplePool:
    """Module-level alias for WorldSamplePool.extend."""
    return pool.extend(target_r)
