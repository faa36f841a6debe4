"""Cluster-quality evaluation in the original data spaces.

Distances are Euclidean for static rows and dynamic time warping for series.
For a cluster pair (k, l):

* cohesion      a_k  = mean distance over ordered within-cluster pairs
* separation    b_kl = min cross-cluster distance (single linkage)
* silhouette    S_kl = ((b_kl - a_k)/max(a_k, b_kl) + (b_kl - a_l)/max(a_l, b_kl)) / 2

Each pair gets one silhouette per modality; the (static, dynamic) score pairs
are then summarized by quadrant around 0 (top-right = well separated in both).
Degenerate rules: singleton cohesion is 0, and a silhouette term with
max(a, b) = 0 is 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit, prange

from .data import Dataset

QUADRANTS = ("TR", "TL", "BR", "BL")


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

def dist_euclidean(x, y) -> float:
    """L2 distance between equal-length vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch {x.shape} vs {y.shape}")
    return float(np.sqrt(((x - y) ** 2).sum()))


@njit(cache=True)
def _dtw_core(a, b):
    n, m = a.shape[0], b.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    acc = 0.0
    for j in range(m):
        acc += abs(a[0] - b[j])
        prev[j] = acc
    for i in range(1, n):
        cur[0] = prev[0] + abs(a[i] - b[0])
        for j in range(1, m):
            best = prev[j]
            if prev[j - 1] < best:
                best = prev[j - 1]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = abs(a[i] - b[j]) + best
        prev, cur = cur, prev
    return prev[m - 1]


@njit(cache=True, parallel=True)
def _dtw_pairwise(series):
    n = series.shape[0]
    out = np.zeros((n, n))
    for i in prange(n):
        for j in range(i + 1, n):
            d = _dtw_core(series[i], series[j])
            out[i, j] = d
            out[j, i] = d
    return out


def dist_dtw(a, b) -> float:
    """Classic DTW with absolute-difference local cost and steps {down, right, diag}."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("empty series")
    return float(_dtw_core(a, b))


def pairwise_euclidean(points: np.ndarray) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64)
    sq = (x**2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(d2)

def pairwise_dtw(series: np.ndarray) -> np.ndarray:
    s = np.ascontiguousarray(series, dtype=np.float64)
    if s.ndim != 2 or s.shape[1] == 0:
        raise ValueError("series matrix must be (n, T) with T >= 1")
    return _dtw_pairwise(s)


# ---------------------------------------------------------------------------
# Cohesion / separation / pairwise silhouette
# ---------------------------------------------------------------------------

def cohesion(members, dist: Callable = dist_euclidean) -> float:
    """Mean distance over ordered pairs of a cluster; singleton -> 0."""
    m = len(members)
    if m == 0:
        raise ValueError("empty cluster")
    if m == 1:
        return 0.0
    total = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            total += dist(members[i], members[j])
    return 2.0 * total / (m * (m - 1))


def separation(members_a, members_b, dist: Callable = dist_euclidean) -> float:
    """Single-linkage minimum over the cross product."""
    if len(members_a) == 0 or len(members_b) == 0:
        raise ValueError("empty cluster")
    return min(dist(x, y) for x in members_a for y in members_b)


def _silhouette_terms(a_k: float, a_l: float, b_kl: float) -> float:
    def term(a: float) -> float:
        denom = max(a, b_kl)
        if denom == 0.0:
            return 0.0
        return (b_kl - a) / denom

    return 0.5 * (term(a_k) + term(a_l))


def silhouette_pair(members_a, members_b, dist: Callable = dist_euclidean) -> float:
    """Symmetric pairwise cluster-separation score in [-1, 1]."""
    a_k = cohesion(members_a, dist)
    a_l = cohesion(members_b, dist)
    b_kl = separation(members_a, members_b, dist)
    return _silhouette_terms(a_k, a_l, b_kl)


def _cohesion_from_matrix(dists: np.ndarray, idx: np.ndarray) -> float:
    m = len(idx)
    if m <= 1:
        return 0.0
    sub = dists[np.ix_(idx, idx)]
    return float(sub.sum() / (m * (m - 1)))


def _separation_from_matrix(dists: np.ndarray, idx_a: np.ndarray, idx_b: np.ndarray) -> float:
    return float(dists[np.ix_(idx_a, idx_b)].min())


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

@dataclass
class ClusterAssignment:
    labels: np.ndarray         # (n,) int64 in [0, k)
    k: int
    seed: int
    inertia: float
    centers: np.ndarray        # (k, d)
    inertia_trace: list[float] = field(default_factory=list)  # winning restart


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centers[0] = x[first]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))  # all points coincide with a center
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = x[idx]
        np.minimum(d2, ((x - centers[c]) ** 2).sum(axis=1), out=d2)
    return centers


def _center_dists2(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = ((x**2).sum(axis=1)[:, None] + (centers**2).sum(axis=1)[None, :]
          - 2.0 * (x @ centers.T))
    np.maximum(d2, 0.0, out=d2)
    return d2


def kmeans(
    points,
    k: int,
    seed: int,
    n_init: int = 10,
    max_iter: int = 300,
) -> ClusterAssignment:
    """Lloyd's algorithm with k-means++ init; best of ``n_init`` restarts.

    Iterates to an assignment fixpoint (or ``max_iter``). A cluster emptied
    during iteration is repaired by re-seeding its center on the point farthest
    from its current center, so every returned cluster is occupied.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        x = x.reshape(len(x), -1)
    n = x.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds number of points {n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    best: Optional[ClusterAssignment] = None
    for _ in range(n_init):
        centers = _kmeanspp_init(x, k, rng)
        labels = np.full(n, -1, dtype=np.int64)
        trace: list[float] = []
        for _it in range(max_iter):
            d2 = _center_dists2(x, centers)
            new_labels = d2.argmin(axis=1)
            # repair empties by re-seeding on the farthest point; repeat in case
            # a repair empties another cluster
            repairs = 0
            while True:
                counts = np.bincount(new_labels, minlength=k)
                if counts.min() > 0:
                    break
                if repairs > k:
                    raise RuntimeError(
                        "k-means could not occupy every cluster (too few distinct points)"
                    )
                c = int(counts.argmin())
                far = int(d2[np.arange(n), new_labels].argmax())
                centers[c] = x[far]
                d2[:, c] = ((x - centers[c]) ** 2).sum(axis=1)
                new_labels = d2.argmin(axis=1)
                repairs += 1
            inertia = float(d2[np.arange(n), new_labels].sum())
            trace.append(inertia)
            if (new_labels == labels).all():
                break
            labels = new_labels
            for c in range(k):
                centers[c] = x[labels == c].mean(axis=0)
        if best is None or inertia < best.inertia:
            best = ClusterAssignment(
                labels=labels, k=k, seed=seed, inertia=inertia,
                centers=centers.copy(), inertia_trace=trace,
            )
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Dual-modality evaluation
# ---------------------------------------------------------------------------

@dataclass
class SilhouettePair:
    cluster_a: int
    cluster_b: int
    s_static: float
    s_dynamic: float


@dataclass
class QuadrantSummary:
    counts: dict[str, int]
    fractions: dict[str, float]
    n_pairs: int


@dataclass
class ClusterEvaluation:
    assignment: Optional[ClusterAssignment]
    pairs: list[SilhouettePair]
    quadrants: QuadrantSummary


def quadrant_summary(pairs: Sequence[SilhouettePair]) -> QuadrantSummary:
    """Sign partition of (s_static, s_dynamic) points; 0 counts as non-positive."""
    counts = {q: 0 for q in QUADRANTS}
    for p in pairs:
        right = p.s_static > 0
        top = p.s_dynamic > 0
        counts["TR" if top and right else "TL" if top else "BR" if right else "BL"] += 1
    n = len(pairs)
    fractions = {q: (counts[q] / n if n else 0.0) for q in QUADRANTS}
    return QuadrantSummary(counts=counts, fractions=fractions, n_pairs=n)


def _subsample_clusters(
    members: list[np.ndarray], cap: Optional[int], seed: int
) -> list[np.ndarray]:
    if cap is None:
        return members
    if cap < 1:
        raise ValueError("subsample_cap must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for idx in members:
        if len(idx) > cap:
            pick = rng.choice(len(idx), size=cap, replace=False)
            idx = idx[np.sort(pick)]
        out.append(idx)
    return out


def full_distance_matrices(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Original-space distance matrices over all nodes (Euclidean, DTW).

    Precompute once per dataset when evaluating several embeddings; the
    matrices do not depend on any model.
    """
    return (
        pairwise_euclidean(dataset.original_static()),
        pairwise_dtw(dataset.original_dynamic()),
    )


def evaluate_with_labels(
    dataset: Dataset,
    labels: np.ndarray,
    subsample_cap: Optional[int] = None,
    seed: int = 0,
    dist_static: Optional[np.ndarray] = None,
    dist_dynamic: Optional[np.ndarray] = None,
) -> tuple[list[SilhouettePair], QuadrantSummary]:
    """Silhouette pairs in the original static (Euclidean) and dynamic (DTW) spaces.

    ``labels`` may come from latent-space k-means or be injected directly;
    every cluster id in [0, max(labels)] must be occupied. Full precomputed
    distance matrices may be supplied to amortize DTW cost across models.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (dataset.n,):
        raise ValueError("labels length does not match dataset")
    k = int(labels.max()) + 1
    members = [np.flatnonzero(labels == c) for c in range(k)]
    for c, idx in enumerate(members):
        if len(idx) == 0:
            raise ValueError(f"cluster {c} is empty")
    members = _subsample_clusters(members, subsample_cap, seed)

    kept = np.concatenate(members)
    if dist_static is not None and dist_dynamic is not None:
        d_static = dist_static[np.ix_(kept, kept)]
        d_dynamic = dist_dynamic[np.ix_(kept, kept)]
    else:
        d_static = pairwise_euclidean(dataset.original_static()[kept])
        d_dynamic = pairwise_dtw(dataset.original_dynamic()[kept])

    # positions of each cluster inside the sampled concatenation
    pos: list[np.ndarray] = []
    off = 0
    for idx in members:
        pos.append(np.arange(off, off + len(idx)))
        off += len(idx)

    a_static = [_cohesion_from_matrix(d_static, p) for p in pos]
    a_dynamic = [_cohesion_from_matrix(d_dynamic, p) for p in pos]

    pairs: list[SilhouettePair] = []
    for a in range(k):
        for b in range(a + 1, k):
            b_s = _separation_from_matrix(d_static, pos[a], pos[b])
            b_d = _separation_from_matrix(d_dynamic, pos[a], pos[b])
            pairs.append(
                SilhouettePair(
                    cluster_a=a,
                    cluster_b=b,
                    s_static=_silhouette_terms(a_static[a], a_static[b], b_s),
                    s_dynamic=_silhouette_terms(a_dynamic[a], a_dynamic[b], b_d),
                )
            )
    return pairs, quadrant_summary(pairs)


def evaluate_embedding(
    dataset: Dataset,
    embedding: np.ndarray,
    k: int,
    seed: int,
    subsample_cap: Optional[int] = None,
    dist_static: Optional[np.ndarray] = None,
    dist_dynamic: Optional[np.ndarray] = None,
) -> ClusterEvaluation:
    """k-means in the latent space, silhouettes in the original spaces."""
    embedding = np.asarray(embedding, dtype=np.float64)
    if embedding.shape[0] != dataset.n:
        raise ValueError(
            f"embedding rows {embedding.shape[0]} do not align with dataset nodes {dataset.n}"
        )
    assignment = kmeans(embedding, k, seed)
    pairs, quadrants = evaluate_with_labels(
        dataset,
        assignment.labels,
        subsample_cap=subsample_cap,
        seed=seed,
        dist_static=dist_static,
        dist_dynamic=dist_dynamic,
    )
    return ClusterEvaluation(assignment=assignment, pairs=pairs, quadrants=quadrants)
