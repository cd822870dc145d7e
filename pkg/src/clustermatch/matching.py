"""Cluster matching: similarity, top-alpha truncation, softmax, and the match decision.

A query cluster is summarized by a single vector (its centroid, or the member
with the best silhouette coefficient), compared against every labeled cluster
with the inverse-RMSE similarity, and either matched to the most probable
labeled cluster or declared non-registered when no probability exceeds the
threshold.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .clustering import Clustering, silhouette
from .geometry import as_matrix, rmse

CENTROID = "centroid"
BEST_SILHOUETTE = "best_silhouette_sample"

DEFAULT_ALPHA = 5
DEFAULT_THRESHOLD = 0.5
DEFAULT_RMSE_EPSILON = 1e-12


@dataclass(frozen=True)
class ClusterEmbedding:
    """A single vector standing in for a whole cluster."""

    vector: tuple[float, ...]
    method: str
    cluster_id: str | None = None


@dataclass(frozen=True)
class LabeledCluster:
    """One reference entry: a label, its member ids, and both cluster-embedding variants."""

    label: str
    member_ids: tuple[str, ...]
    centroid: tuple[float, ...]
    best_silhouette_id: str
    best_silhouette_vector: tuple[float, ...]
    label_histogram: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("cluster label must be non-empty")
        if len(self.centroid) != len(self.best_silhouette_vector):
            raise ValueError("cluster embedding dimensions disagree")

    @property
    def label_set(self) -> frozenset[str]:
        """All distinct member labels present in the cluster."""
        if self.label_histogram:
            return frozenset(self.label_histogram)
        return frozenset({self.label})

    def embedding_for(self, method: str) -> tuple[float, ...]:
        if method == CENTROID:
            return self.centroid
        if method == BEST_SILHOUETTE:
            return self.best_silhouette_vector
        raise ValueError(f"unknown cluster embedding method {method!r}")


@dataclass(frozen=True)
class LabeledClusterSet:
    """The reference store of labeled clusters; entry order is fixed and load-bearing."""

    entries: tuple[LabeledCluster, ...]
    dimension: int

    def __post_init__(self) -> None:
        seen_ids: set[str] = set()
        for e in self.entries:
            if len(e.centroid) != self.dimension:
                raise ValueError(
                    f"cluster {e.label!r} has dimension {len(e.centroid)}, store has {self.dimension}"
                )
            for mid in e.member_ids:
                if mid in seen_ids:
                    raise ValueError(f"duplicate member id {mid!r} across store entries")
                seen_ids.add(mid)

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> list[str]:
        return [e.label for e in self.entries]


@dataclass(frozen=True)
class MatchConfig:
    """Knobs for the matching chain; defaults follow the evaluated operating point."""

    alpha: int = DEFAULT_ALPHA
    probability_threshold: float = DEFAULT_THRESHOLD
    cluster_embedding_method: str = CENTROID
    rmse_epsilon: float = DEFAULT_RMSE_EPSILON

    def __post_init__(self) -> None:
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if not 0.0 < self.probability_threshold < 1.0:
            raise ValueError("probability_threshold must be in (0, 1)")
        if self.cluster_embedding_method not in (CENTROID, BEST_SILHOUETTE):
            raise ValueError(f"unknown method {self.cluster_embedding_method!r}")
        if self.rmse_epsilon <= 0:
            raise ValueError("rmse_epsilon must be positive")


@dataclass(frozen=True)
class MatchDecision:
    """Outcome of matching one query cluster against the labeled set."""

    matched: bool
    label: str | None
    cluster_index: int | None
    probability: float | None
    probabilities: tuple[float, ...]
    similarities: tuple[float, ...]
    truncated: tuple[float, ...]

    def __post_init__(self) -> None:
        total = sum(self.probabilities)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probability vector sums to {total}, expected 1")


def make_cluster_embedding(
    members,
    method: str = CENTROID,
    *,
    data=None,
    clustering: Clustering | None = None,
    cluster_index: int | None = None,
    cluster_id: str | None = None,
) -> ClusterEmbedding:
    """Summarize a cluster as one vector.

    ``centroid`` takes the component-wise mean. ``best_silhouette_sample``
    returns the member with the highest silhouette coefficient, which needs the
    full clustering context (``data``, ``clustering``, ``cluster_index``); with
    fewer than two clusters the silhouette is undefined and the centroid is
    used instead.
    """
    mat = as_matrix(members)
    if mat.shape[0] == 0:
        raise ValueError("cannot embed an empty cluster")

    if method == CENTROID or mat.shape[0] == 1:
        vec = mat[0] if mat.shape[0] == 1 and method == BEST_SILHOUETTE else mat.mean(axis=0)
        return ClusterEmbedding(vector=tuple(float(x) for x in vec), method=method, cluster_id=cluster_id)

    if method != BEST_SILHOUETTE:
        raise ValueError(f"unknown cluster embedding method {method!r}")

    if clustering is None or data is None or cluster_index is None or clustering.num_clusters < 2:
        # silhouette undefined without a >=2-cluster context
        return ClusterEmbedding(
            vector=tuple(float(x) for x in mat.mean(axis=0)), method=CENTROID, cluster_id=cluster_id
        )

    full = as_matrix(data)
    report = silhouette(full, clustering)
    member_idx = clustering.members(cluster_index)
    coeffs = [report.coefficients[i] for i in member_idx]
    best_local = int(np.argmax(coeffs))
    vec = full[member_idx[best_local]]
    return ClusterEmbedding(vector=tuple(float(x) for x in vec), method=method, cluster_id=cluster_id)


def similarity(q, c, rmse_epsilon: float = DEFAULT_RMSE_EPSILON) -> float:
    """Inverse-RMSE similarity; the RMSE is clamped below by ``rmse_epsilon``."""
    qv = q.vector if isinstance(q, ClusterEmbedding) else q
    cv = c.vector if isinstance(c, ClusterEmbedding) else c
    return 1.0 / max(rmse(qv, cv), rmse_epsilon)


def truncate_top_alpha(similarities, alpha: int) -> np.ndarray:
    """Keep the alpha largest entries, zero the rest; boundary ties keep the earliest index."""
    s = np.asarray(similarities, dtype=np.float64)
    if s.size == 0:
        raise ValueError("empty similarity vector")
    if alpha >= s.size:
        return s.copy()
    order = np.argsort(-s, kind="stable")  # equal values: earliest index first
    out = np.zeros_like(s)
    keep = order[:alpha]
    out[keep] = s[keep]
    return out


def match_probabilities(truncated) -> np.ndarray:
    """Softmax over the truncated similarities.

    Zeroed entries still contribute e^0 = 1 to the denominator; the max-shift
    changes nothing mathematically but keeps the exponentials bounded.
    """
    s = np.asarray(truncated, dtype=np.float64)
    if s.size == 0:
        raise ValueError("empty similarity vector")
    shifted = s - s.max()
    e = np.exp(shifted)
    return e / e.sum()


def sigma(
    probabilities,
    store: LabeledClusterSet,
    threshold: float = DEFAULT_THRESHOLD,
    similarities=None,
    truncated=None,
) -> MatchDecision:
    """Decide: the argmax labeled cluster when its probability strictly exceeds
    the threshold, otherwise no match."""
    p = np.asarray(probabilities, dtype=np.float64)
    if len(store) == 0:
        raise ValueError("labeled cluster set is empty")
    if p.size != len(store):
        raise ValueError(f"probability vector length {p.size} != store size {len(store)}")
    sims = tuple(float(x) for x in (similarities if similarities is not None else np.zeros_like(p)))
    trunc = tuple(float(x) for x in (truncated if truncated is not None else np.zeros_like(p)))
    best = int(np.argmax(p))
    if p[best] > threshold:
        return MatchDecision(
            matched=True,
            label=store.entries[best].label,
            cluster_index=best,
            probability=float(p[best]),
            probabilities=tuple(float(x) for x in p),
            similarities=sims,
            truncated=trunc,
        )
    return MatchDecision(
        matched=False,
        label=None,
        cluster_index=None,
        probability=None,
        probabilities=tuple(float(x) for x in p),
        similarities=sims,
        truncated=trunc,
    )


def match_cluster(
    query_members,
    store: LabeledClusterSet,
    config: MatchConfig = MatchConfig(),
    *,
    query_data=None,
    query_clustering: Clustering | None = None,
    query_cluster_index: int | None = None,
) -> MatchDecision:
    """Full matching chain for one query cluster.

    Builds the query's cluster embedding, computes inverse-RMSE similarities to
    every labeled cluster, truncates to the top alpha, applies the softmax, and
    returns the decision.
    """
    if len(store) == 0:
        raise ValueError("labeled cluster set is empty")
    q = make_cluster_embedding(
        query_members,
        config.cluster_embedding_method,
        data=query_data,
        clustering=query_clustering,
        cluster_index=query_cluster_index,
    )
    if len(q.vector) != store.dimension:
        raise ValueError(f"query dimension {len(q.vector)} != store dimension {store.dimension}")
    sims = np.array(
        [similarity(q.vector, e.embedding_for(config.cluster_embedding_method), config.rmse_epsilon) for e in store.entries]
    )
    trunc = truncate_top_alpha(sims, config.alpha)
    probs = match_probabilities(trunc)
    return sigma(probs, store, config.probability_threshold, similarities=sims, truncated=trunc)


def majority_label(labels) -> tuple[str, frozenset[str]]:
    """Most frequent label (lexicographically smallest on ties) and the distinct label set."""
    labels = list(labels)
    if not labels:
        raise ValueError("cannot take the majority of an empty label multiset")
    counts = Counter(labels)
    best_count = max(counts.values())
    winner = min(lab for lab, cnt in counts.items() if cnt == best_count)
    return winner, frozenset(counts)
