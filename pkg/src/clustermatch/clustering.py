"""Clustering algorithms, silhouette scoring, and the unknown-K search strategy.

Three candidate algorithms are provided: k-means, affinity propagation, and
agglomerative clustering with the Ward criterion. When the number of clusters
is unknown, ``estimate_clustering`` sweeps k upward, keeping the configuration
with the best silhouette score, and falls back to a single cluster when even
the best score indicates overlap.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import as_matrix, pairwise_distances

DEFAULT_PATIENCE = 5
DEFAULT_MIN_SILHOUETTE = 0.2


@dataclass(frozen=True)
class Clustering:
    """A partition of a dataset: one 0-based cluster index per point."""

    assignments: tuple[int, ...]
    num_clusters: int
    converged: bool = True
    exemplars: tuple[int, ...] | None = None  # per-cluster exemplar point, when the algorithm has one

    def __post_init__(self) -> None:
        if self.num_clusters < 1:
            raise ValueError("num_clusters must be positive")
        seen = set(self.assignments)
        expected = set(range(self.num_clusters))
        if seen != expected:
            raise ValueError(
                f"assignments must cover exactly clusters 0..{self.num_clusters - 1}, got {sorted(seen)}"
            )

    @property
    def n_points(self) -> int:
        return len(self.assignments)

    def members(self, cluster: int) -> list[int]:
        return [i for i, a in enumerate(self.assignments) if a == cluster]


@dataclass(frozen=True)
class KSearchConfig:
    """Parameters for the silhouette-driven search over the number of clusters."""

    patience: int = DEFAULT_PATIENCE
    min_silhouette: float = DEFAULT_MIN_SILHOUETTE
    max_clusters: int | None = None

    def __post_init__(self) -> None:
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 <= self.min_silhouette <= 1.0:
            raise ValueError("min_silhouette must be in [0, 1]")
        if self.max_clusters is not None and self.max_clusters < 1:
            raise ValueError("max_clusters must be positive")


@dataclass(frozen=True)
class SilhouetteReport:
    """Per-sample silhouette coefficients and their mean."""

    coefficients: tuple[float, ...]
    intra: tuple[float, ...]
    nearest: tuple[float, ...]
    score: float


def _relabel(labels: np.ndarray) -> tuple[tuple[int, ...], int]:
    """Map arbitrary cluster labels to dense 0-based indices in order of first appearance."""
    mapping: dict[int, int] = {}
    out = []
    for lab in labels:
        lab = int(lab)
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out.append(mapping[lab])
    return tuple(out), len(mapping)


# ---------------------------------------------------------------------------
# k-means


def _kmeans_pp_init(mat: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = mat.shape[0]
    centers = np.empty((k, mat.shape[1]))
    centers[0] = mat[rng.integers(n)]
    d2 = np.sum((mat - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = mat[idx]
        d2 = np.minimum(d2, np.sum((mat - centers[j]) ** 2, axis=1))
    return centers


def kmeans(
    data,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    init: str = "k-means++",
) -> Clustering:
    """Lloyd's algorithm with k-means++ seeding (or plain random init).

    Always returns exactly k non-empty clusters: an emptied cluster is reseeded
    with the point farthest from its current centroid. The within-cluster
    sum-of-squares objective is checked to be non-increasing every iteration.
    """
    mat = as_matrix(data)
    n = mat.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds number of points n={n}")
    rng = np.random.default_rng(seed)
    if init == "k-means++":
        centers = _kmeans_pp_init(mat, k, rng)
    elif init == "random":
        centers = mat[rng.choice(n, size=k, replace=False)]
    else:
        raise ValueError(f"unknown init {init!r}")

    prev_obj = np.inf
    assign = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = (
            np.sum(mat**2, axis=1)[:, None]
            - 2.0 * (mat @ centers.T)
            + np.sum(centers**2, axis=1)[None, :]
        )
        new_assign = np.argmin(d2, axis=1)

        # repair empty clusters with the globally farthest point
        counts = np.bincount(new_assign, minlength=k)
        while np.any(counts == 0):
            empty = int(np.argmin(counts))
            nearest_d2 = d2[np.arange(n), new_assign]
            # only points in clusters with >1 member are eligible to move
            eligible = counts[new_assign] > 1
            nearest_d2 = np.where(eligible, nearest_d2, -np.inf)
            far = int(np.argmax(nearest_d2))
            counts[new_assign[far]] -= 1
            new_assign[far] = empty
            counts[empty] += 1
            centers[empty] = mat[far]
            d2[:, empty] = np.sum((mat - centers[empty]) ** 2, axis=1)

        obj = float(np.sum(d2[np.arange(n), new_assign].clip(min=0.0)))
        if obj > prev_obj * (1 + 1e-12) + 1e-12:
            raise RuntimeError("k-means objective increased; internal invariant violated")
        converged_now = np.array_equal(new_assign, assign) and prev_obj < np.inf
        assign = new_assign
        prev_obj = obj
        for j in range(k):
            members = mat[assign == j]
            centers[j] = members.mean(axis=0)
        if converged_now:
            break

    labels, m = _relabel(assign)
    assert m == k
    return Clustering(assignments=labels, num_clusters=k)


# ---------------------------------------------------------------------------
# affinity propagation


def affinity_propagation(
    data,
    damping: float = 0.5,
    max_iter: int = 200,
    convergence_iter: int = 15,
) -> Clustering:
    """Responsibility/availability message passing over negative squared distances.

    Preference is the median of the off-diagonal similarities. If the exemplar
    set never stabilizes, the current assignment is returned with
    ``converged=False``; if no exemplar emerges at all, every point collapses
    into one cluster.
    """
    mat = as_matrix(data)
    n = mat.shape[0]
    if n < 2:
        raise ValueError("affinity propagation requires at least 2 points")
    if not 0.5 <= damping < 1.0:
        raise ValueError("damping must be in [0.5, 1)")

    sq = np.sum(mat**2, axis=1)
    S = -(sq[:, None] + sq[None, :] - 2.0 * (mat @ mat.T))
    np.fill_diagonal(S, 0.0)
    off = S[~np.eye(n, dtype=bool)]
    preference = float(np.median(off))
    np.fill_diagonal(S, preference)

    R = np.zeros((n, n))
    A = np.zeros((n, n))
    idx = np.arange(n)
    stable = 0
    exemplars: np.ndarray | None = None
    converged = False

    for _ in range(max_iter):
        # responsibilities
        AS = A + S
        first = np.max(AS, axis=1)
        first_idx = np.argmax(AS, axis=1)
        AS[idx, first_idx] = -np.inf
        second = np.max(AS, axis=1)
        Rnew = S - first[:, None]
        Rnew[idx, first_idx] = S[idx, first_idx] - second
        R = damping * R + (1.0 - damping) * Rnew

        # availabilities
        Rp = np.maximum(R, 0.0)
        np.fill_diagonal(Rp, R.diagonal())
        col = Rp.sum(axis=0)
        Anew = col[None, :] - Rp
        diag = Anew.diagonal().copy()
        Anew = np.minimum(Anew, 0.0)
        np.fill_diagonal(Anew, diag)
        A = damping * A + (1.0 - damping) * Anew

        ex = np.flatnonzero((R.diagonal() + A.diagonal()) > 0)
        if exemplars is not None and np.array_equal(ex, exemplars):
            stable += 1
            if stable >= convergence_iter and ex.size > 0:
                converged = True
                exemplars = ex
                break
        else:
            stable = 0
        exemplars = ex

    if exemplars is None or exemplars.size == 0:
        # no consensus: everything collapses into one cluster
        fallback = int(np.argmax(R.diagonal() + A.diagonal()))
        labels = np.zeros(n, dtype=int)
        dense, m = _relabel(labels)
        return Clustering(assignments=dense, num_clusters=m, converged=False, exemplars=(fallback,))

    assign = exemplars[np.argmax(S[:, exemplars], axis=1)]
    assign[exemplars] = exemplars
    dense, m = _relabel(assign)
    # exemplar list ordered by dense cluster index
    order: dict[int, int] = {}
    for raw in assign:
        if int(raw) not in order:
            order[int(raw)] = len(order)
    ex_by_cluster = sorted(order.items(), key=lambda kv: kv[1])
    return Clustering(
        assignments=dense,
        num_clusters=m,
        converged=converged,
        exemplars=tuple(raw for raw, _ in ex_by_cluster),
    )


# ---------------------------------------------------------------------------
# agglomerative clustering, Ward criterion


@dataclass(frozen=True)
class WardMerge:
    """One merge step: the two cluster representatives joined and the variance increase."""

    rep_a: int
    rep_b: int
    cost: float


@dataclass
class WardTree:
    """Full agglomerative merge sequence; can be cut at any k without re-clustering."""

    n_points: int
    merges: list[WardMerge] = field(default_factory=list)
    _merge_members: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)

    def cut(self, k: int) -> Clustering:
        if not 1 <= k <= self.n_points:
            raise ValueError(f"k={k} out of range [1, {self.n_points}]")
        parent = list(range(self.n_points))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for merge in self.merges[: self.n_points - k]:
            ra, rb = find(merge.rep_a), find(merge.rep_b)
            keep, drop = min(ra, rb), max(ra, rb)
            parent[drop] = keep
        roots = [find(i) for i in range(self.n_points)]
        labels, m = _relabel(np.asarray(roots))
        assert m == k
        return Clustering(assignments=labels, num_clusters=k)


def ward_tree(data) -> WardTree:
    """Build the full Ward dendrogram: greedily merge the pair with the
    minimum increase in total within-cluster variance, updating inter-cluster
    costs with the Lance-Williams recurrence.

    Ties break on the lexicographically smallest (min rep, max rep) pair,
    where a cluster's representative is its smallest original point index.
    """
    mat = as_matrix(data)
    n = mat.shape[0]
    tree = WardTree(n_points=n)
    if n == 1:
        return tree

    # D[i, j] = Ward merge cost between active clusters i and j
    d2 = pairwise_distances(mat).entries ** 2
    D = d2 * 0.5  # size-1 clusters: (1*1)/(1+1) * ||ci-cj||^2
    np.fill_diagonal(D, np.inf)
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    reps = np.arange(n)
    members: list[tuple[int, ...]] = [(i,) for i in range(n)]

    # per-row nearest-neighbor cache so each step avoids a full-matrix scan
    rowmin = D.min(axis=1)
    rowarg = D.argmin(axis=1)

    for _ in range(n - 1):
        mincost = rowmin.min()
        best = None
        for r in np.flatnonzero(rowmin == mincost):
            for c in np.flatnonzero(D[r] == mincost):
                a, b = (int(r), int(c)) if r < c else (int(c), int(r))
                key = (min(reps[a], reps[b]), max(reps[a], reps[b]))
                if best is None or key < best[0]:
                    best = (key, a, b)
        assert best is not None
        _, i, j = best

        tree.merges.append(
            WardMerge(rep_a=int(min(reps[i], reps[j])), rep_b=int(max(reps[i], reps[j])), cost=float(D[i, j]))
        )
        tree._merge_members.append((members[i], members[j]))

        ni, nj = sizes[i], sizes[j]
        # Lance-Williams update for Ward: cost(ij, k)
        others = active.copy()
        others[i] = others[j] = False
        nk = sizes[others]
        Dnew = ((ni + nk) * D[i, others] + (nj + nk) * D[j, others] - nk * D[i, j]) / (ni + nj + nk)
        D[i, others] = Dnew
        D[others, i] = Dnew
        sizes[i] = ni + nj
        reps[i] = min(reps[i], reps[j])
        members[i] = tuple(sorted(members[i] + members[j]))
        active[j] = False
        D[j, :] = np.inf
        D[:, j] = np.inf

        # refresh the nearest-neighbor cache where the merge invalidated it
        rowmin[j] = np.inf
        rowmin[i] = D[i].min()
        rowarg[i] = D[i].argmin()
        rows = np.flatnonzero(active)
        rows = rows[rows != i]
        improved = D[rows, i] <= rowmin[rows]
        took = rows[improved]
        rowmin[took] = D[took, i]
        rowarg[took] = i
        stale = rows[~improved]
        stale = stale[(rowarg[stale] == i) | (rowarg[stale] == j)]
        for r in stale:
            rowmin[r] = D[r].min()
            rowarg[r] = D[r].argmin()

    return tree


def agglomerative_ward(data, k: int) -> Clustering:
    """Agglomerative clustering with the Ward minimum-variance criterion, cut at k clusters."""
    mat = as_matrix(data)
    n = mat.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    return ward_tree(mat).cut(k)


# ---------------------------------------------------------------------------
# silhouette


def silhouette(data, clustering: Clustering, dist: np.ndarray | None = None) -> SilhouetteReport:
    """Per-sample silhouette coefficients S = (b - a) / max(a, b) and their mean.

    a: mean distance to other members of the sample's own cluster (0 by
    convention for singletons, which get S = 0); b: smallest mean distance to
    the members of any other cluster.
    """
    mat = as_matrix(data)
    n = mat.shape[0]
    k = clustering.num_clusters
    if k < 2:
        raise ValueError("silhouette requires at least two clusters")
    if clustering.n_points != n:
        raise ValueError("clustering does not match dataset size")
    if dist is None:
        dist = pairwise_distances(mat).entries

    assign = np.asarray(clustering.assignments)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), assign] = 1.0
    sums = dist @ onehot  # sums[i, c] = total distance from i to cluster c
    counts = onehot.sum(axis=0)

    own_count = counts[assign]
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(own_count > 1, sums[np.arange(n), assign] / np.maximum(own_count - 1, 1), 0.0)
        mean_to = sums / counts[None, :]
    mean_to[np.arange(n), assign] = np.inf
    b = mean_to.min(axis=1)

    denom = np.maximum(a, b)
    s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    s = np.where(own_count > 1, s, 0.0)  # singleton convention
    return SilhouetteReport(
        coefficients=tuple(float(x) for x in s),
        intra=tuple(float(x) for x in a),
        nearest=tuple(float(x) for x in b),
        score=float(s.mean()),
    )


# ---------------------------------------------------------------------------
# unknown-K search


def _single_cluster(n: int) -> Clustering:
    return Clustering(assignments=tuple([0] * n), num_clusters=1)


def estimate_clustering(
    data,
    algorithm: str = "ward",
    config: KSearchConfig = KSearchConfig(),
    seed: int = 0,
) -> Clustering:
    """Pick the number of clusters by silhouette score.

    Starting from k = 2, k is increased by 1 until the running-maximum
    silhouette score fails to improve ``patience`` times in a row or k reaches
    the number of points. If even the best score is below ``min_silhouette``
    (overlapping clusters), all points are placed in a single cluster.
    """
    mat = as_matrix(data)
    n = mat.shape[0]
    if n == 1:
        return _single_cluster(1)
    if algorithm not in ("ward", "kmeans"):
        raise ValueError(f"unsupported algorithm for K search: {algorithm!r}")

    kmax = n if config.max_clusters is None else min(config.max_clusters, n)
    dist = pairwise_distances(mat).entries
    tree = ward_tree(mat) if algorithm == "ward" else None

    best_score = -np.inf
    best: Clustering | None = None
    misses = 0
    for k in range(2, kmax + 1):
        if tree is not None:
            candidate = tree.cut(k)
        else:
            candidate = kmeans(mat, k, seed=seed)
        score = silhouette(mat, candidate, dist=dist).score
        if score > best_score:
            best_score = score
            best = candidate
            misses = 0
        else:
            misses += 1
            if misses >= config.patience:
                break

    if best is None or best_score < config.min_silhouette:
        return _single_cluster(n)
    return best
