"""Clustering quality metrics and predictive evaluation.

Quality metrics: the min/avg connection probability of nodes to their
cluster centers, and the inner/outer average vertex pairwise reliability
(AVPR) estimated from a world pool.  Predictive evaluation compares
co-clustered pairs against a ground-truth complex file.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import GraphFormatError, WorldSamplePool


@dataclass
class QualityReport:
    """Metrics and run statistics for one clustering run.

    `inner_avpr` / `outer_avpr` are None when undefined (all-singleton
    clusters, or k=1); None serializes as null, never 0.
    """

    algorithm: str | None = None
    k: int | None = None
    outcome: str = "ok"
    min_prob: float | None = None
    avg_prob: float | None = None
    inner_avpr: float | None = None
    outer_avpr: float | None = None
    cluster_sizes: list[int] = field(default_factory=list)
    q_final: float | None = None
    phi: float | None = None
    iterations: int | None = None
    r: int | None = None
    seed: int | None = None
    durations: dict[str, float] | None = None

    def to_dict(self) -> dict:
        doc = {
            "algorithm": self.algorithm,
            "k": self.k,
            "outcome": self.outcome,
            "min_prob": self.min_prob,
            "avg_prob": self.avg_prob,
            "inner_avpr": self.inner_avpr,
            "outer_avpr": self.outer_avpr,
            "cluster_sizes": list(self.cluster_sizes),
            "q_final": self.q_final,
            "phi": self.phi,
            "iterations": self.iterations,
            "r": self.r,
            "seed": self.seed,
        }
        if self.durations is not None:
            doc["durations"] = dict(self.durations)
        return doc


def score_clustering(clustering, estimator, depth: int | None = None):
    """(min_prob, avg_prob) of a full clustering under `estimator`.

    Probabilities are re-derived from the estimator (not read back from the
    clustering's stored estimates), one row per center.
    """
    assignment = np.asarray(clustering.assignment)
    if np.any(assignment < 0):
        raise ValueError("clustering is not full")
    n = assignment.shape[0]
    est = np.zeros(n)
    for ci, center in enumerate(clustering.centers):
        members = np.flatnonzero(assignment == ci)
        if members.size:
            est[members] = estimator.probs_from(center, depth)[members]
    est[np.asarray(clustering.centers)] = 1.0
    return float(est.min()), float(est.mean())


def min_prob(clustering, estimator, depth: int | None = None) -> float:
    return score_clustering(clustering, estimator, depth)[0]


def avg_prob(clustering, estimator, depth: int | None = None) -> float:
    return score_clustering(clustering, estimator, depth)[1]


def _avpr_counts(clustering, pool: WorldSamplePool):
    """Per-world counts behind both AVPR metrics.

    Returns (inner pair-hits summed over worlds, connected pair count
    summed over worlds, r).  A pair counts as a hit when it is in the same
    component of that world; "inner" restricts to same-cluster pairs.
    """
    assignment = np.asarray(clustering.assignment, dtype=np.int64)
    if np.any(assignment < 0):
        raise ValueError("clustering is not full")
    labels = pool.labels_matrix()
    r, n = labels.shape
    if r < 1:
        raise ValueError("pool is empty")
    inner_hits = 0.0
    connected_pairs = 0.0
    base = assignment * n
    for i in range(r):
        lab = labels[i]
        # same-cluster AND same-component pairs, grouped in one bincount
        g = np.bincount(base + lab)
        inner_hits += float(np.sum(g * (g - 1))) / 2.0
        c = np.bincount(lab)
        connected_pairs += float(np.sum(c * (c - 1))) / 2.0
    return inner_hits, connected_pairs, r


def inner_avpr(clustering, pool: WorldSamplePool) -> float | None:
    """Average connection probability over same-cluster node pairs.

    None when every cluster is a singleton (no pairs to average).
    """
    sizes = np.asarray(clustering.cluster_sizes(), dtype=np.float64)
    denom = float(np.sum(sizes * (sizes - 1)) / 2.0)
    if denom == 0.0:
        return None
    hits, _, r = _avpr_counts(clustering, pool)
    return hits / (r * denom)


def outer_avpr(clustering, pool: WorldSamplePool) -> float | None:
    """Average connection probability over cross-cluster pairs; None at k=1."""
    sizes = np.asarray(clustering.cluster_sizes(), dtype=np.float64)
    n = float(sizes.sum())
    denom = (n * n - float(np.sum(sizes * sizes))) / 2.0
    if denom == 0.0:
        return None
    hits, connected, r = _avpr_counts(clustering, pool)
    return (connected - hits) / (r * denom)


def naive_inner_avpr(clustering, pool: WorldSamplePool) -> float | None:
    """Reference all-pairs implementation of inner_avpr (test oracle)."""
    assignment = np.asarray(clustering.assignment)
    labels = pool.labels_matrix()
    r, n = labels.shape
    num = 0.0
    denom = 0
    for u in range(n):
        for v in range(u + 1, n):
            if assignment[u] != assignment[v]:
                continue
            denom += 1
            num += float(np.mean(labels[:, u] == labels[:, v]))
    return num / denom if denom else None


def naive_outer_avpr(clustering, pool: WorldSamplePool) -> float | None:
    """Reference all-pairs implementation of outer_avpr (test oracle)."""
    assignment = np.asarray(clustering.assignment)
    labels = pool.labels_matrix()
    r, n = labels.shape
    num = 0.0
    denom = 0
    for u in range(n):
        for v in range(u + 1, n):
            if assignment[u] == assignment[v]:
                continue
            denom += 1
            num += float(np.mean(labels[:, u] == labels[:, v]))
    return num / denom if denom else None


# ---------------------------------------------------------------------------
# Predictive evaluation against ground-truth complexes


@dataclass(frozen=True)
class GroundTruth:
    """Named complexes (sets of member labels) from a ground-truth file."""

    complexes: tuple[frozenset[str], ...]
    names: tuple[str, ...]

    def member_labels(self) -> set[str]:
        out: set[str] = set()
        for c in self.complexes:
            out |= c
        return out

    def positive_pairs(self) -> set[frozenset[str]]:
        """Unordered pairs co-occurring in at least one complex."""
        pairs: set[frozenset[str]] = set()
        for c in self.complexes:
            members = sorted(c)
            for i, a in enumerate(members):
                for b in members[i + 1:]:
                    pairs.add(frozenset((a, b)))
        return pairs


def load_ground_truth(source) -> GroundTruth:
    """Parse a complex file: one `<complex_id> <member> <member> ...` per line.

    Blank lines and `#` comments are ignored.
    """
    import os

    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_ground_truth(fh)
    names: list[str] = []
    complexes: list[frozenset[str]] = []
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 2:
            raise GraphFormatError(
                f"line {lineno}: complex needs an id and at least one member"
            )
        names.append(fields[0])
        complexes.append(frozenset(fields[1:]))
    return GroundTruth(tuple(complexes), tuple(names))


@dataclass(frozen=True)
class ConfusionReport:
    tp: int
    fp: int
    tpr: float
    fpr: float
    positives: int
    negatives: int
    universe_size: int

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tpr": self.tpr,
            "fpr": self.fpr,
            "positives": self.positives,
            "negatives": self.negatives,
            "universe_size": self.universe_size,
        }


def evaluate_predictions(clusters, truth: GroundTruth) -> ConfusionReport:
    """Confusion metrics over unordered pairs of shared-universe nodes.

    `clusters` is an iterable of label collections (one per cluster).  The
    universe is the set of labels appearing both in some cluster and in
    some complex; a co-clustered universe pair is a true positive if it
    co-occurs in a complex, a false positive otherwise.  FPR's denominator
    is all universe pairs that are not positive.
    """
    cluster_sets = [set(map(str, c)) for c in clusters]
    clustered: set[str] = set()
    for c in cluster_sets:
        clustered |= c
    universe = clustered & truth.member_labels()
    if not universe:
        raise ValueError("clustering and ground truth share no labels")

    positives = {p for p in truth.positive_pairs() if p <= universe}
    u = len(universe)
    total_pairs = u * (u - 1) // 2
    negatives = total_pairs - len(positives)

    predicted: set[frozenset[str]] = set()
    for c in cluster_sets:
        members = sorted(c & universe)
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                predicted.add(frozenset((a, b)))

    tp = len(predicted & positives)
    fp = len(predicted) - tp
    tpr = tp / len(positives) if positives else 0.0
    fpr = fp / negatives if negatives else 0.0
    return ConfusionReport(tp, fp, tpr, fpr, len(positives), negatives, u)
