"""End-to-end wiring: build a labeled store from embeddings, then recognize
the faces of a frame-tagged embedding set against it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import (
    Clustering,
    KSearchConfig,
    affinity_propagation,
    agglomerative_ward,
    estimate_clustering,
    kmeans,
    silhouette,
)
from .geometry import Embedding, as_matrix
from .matching import (
    LabeledCluster,
    LabeledClusterSet,
    MatchConfig,
    MatchDecision,
    majority_label,
    match_cluster,
)

NON_REGISTERED = "non-registered"


def run_clustering(
    embeddings,
    algorithm: str = "ward",
    k: int | None = None,
    ksearch: KSearchConfig = KSearchConfig(),
    seed: int = 0,
) -> Clustering:
    """Cluster an embedding set with a fixed k, or search for k when k is None."""
    mat = as_matrix(embeddings)
    if algorithm == "affinity_propagation":
        return affinity_propagation(mat)
    if k is None:
        return estimate_clustering(mat, algorithm=algorithm, config=ksearch, seed=seed)
    if algorithm == "ward":
        return agglomerative_ward(mat, k)
    if algorithm == "kmeans":
        return kmeans(mat, k, seed=seed)
    raise ValueError(f"unknown clustering algorithm {algorithm!r}")


def _representatives(embeddings: list[Embedding], mat: np.ndarray, clustering: Clustering) -> list[int]:
    """Per cluster, the index of the member used as the silhouette-based representative.

    With >= 2 clusters this is the member with the highest silhouette
    coefficient; with a single cluster (silhouette undefined) the member
    closest to the centroid. Ties break on the lowest point index.
    """
    if clustering.num_clusters >= 2:
        report = silhouette(mat, clustering)
        reps = []
        for c in range(clustering.num_clusters):
            members = clustering.members(c)
            best = max(members, key=lambda i: (report.coefficients[i], -i))
            reps.append(best)
        return reps
    members = clustering.members(0)
    center = mat.mean(axis=0)
    dists = np.linalg.norm(mat - center, axis=1)
    return [min(members, key=lambda i: (dists[i], i))]


def build_labeled_store(
    embeddings,
    algorithm: str = "ward",
    k: int | None = None,
    ksearch: KSearchConfig = KSearchConfig(),
    seed: int = 0,
    cluster_labels: list[str] | None = None,
) -> LabeledClusterSet:
    """Cluster the embeddings and label every cluster.

    Labels come from the embeddings' true_label fields by majority vote, or
    from ``cluster_labels`` (one label per cluster index) when supplied.
    Both cluster-embedding variants are precomputed for each entry.
    """
    embeddings = list(embeddings)
    if not embeddings:
        raise ValueError("cannot build a store from an empty embedding set")
    mat = as_matrix(embeddings)
    clustering = run_clustering(embeddings, algorithm=algorithm, k=k, ksearch=ksearch, seed=seed)
    reps = _representatives(embeddings, mat, clustering)

    entries = []
    for c in range(clustering.num_clusters):
        members = clustering.members(c)
        member_labels = [embeddings[i].true_label for i in members]
        if cluster_labels is not None:
            if len(cluster_labels) != clustering.num_clusters:
                raise ValueError(
                    f"got {len(cluster_labels)} labels for {clustering.num_clusters} clusters"
                )
            label = cluster_labels[c]
            histogram = {label: len(members)}
        else:
            if any(lab is None for lab in member_labels):
                raise ValueError(
                    "embeddings lack true labels; pass cluster_labels to label the clusters"
                )
            label, _ = majority_label(member_labels)
            histogram = {}
            for lab in member_labels:
                histogram[lab] = histogram.get(lab, 0) + 1
        rep = reps[c]
        entries.append(
            LabeledCluster(
                label=label,
                member_ids=tuple(embeddings[i].id for i in members),
                centroid=tuple(float(x) for x in mat[members].mean(axis=0)),
                best_silhouette_id=embeddings[rep].id,
                best_silhouette_vector=tuple(float(x) for x in mat[rep]),
                label_histogram=histogram,
            )
        )
    return LabeledClusterSet(entries=tuple(entries), dimension=mat.shape[1])


@dataclass(frozen=True)
class ClusterOutcome:
    """One video cluster and what it matched."""

    cluster_index: int
    member_ids: tuple[str, ...]
    decision: MatchDecision
    label: str  # decision label, or the non-registered marker


@dataclass(frozen=True)
class RecognitionResult:
    clustering: Clustering
    outcomes: tuple[ClusterOutcome, ...]
    face_labels: tuple[tuple[str, int | None, str], ...]  # (embedding id, frame_index, label)


def recognize(
    video_embeddings,
    store: LabeledClusterSet,
    match_config: MatchConfig = MatchConfig(),
    ksearch: KSearchConfig = KSearchConfig(),
    algorithm: str = "ward",
    seed: int = 0,
) -> RecognitionResult:
    """Cluster a video's faces (K unknown), match each cluster against the store,
    and propagate every cluster's decision to its member faces."""
    embeddings = list(video_embeddings)
    if not embeddings:
        raise ValueError("empty video embedding set")
    mat = as_matrix(embeddings)
    if mat.shape[1] != store.dimension:
        raise ValueError(f"video dimension {mat.shape[1]} != store dimension {store.dimension}")

    clustering = estimate_clustering(mat, algorithm=algorithm, config=ksearch, seed=seed)
    outcomes = []
    for c in range(clustering.num_clusters):
        members = clustering.members(c)
        decision = match_cluster(
            mat[members],
            store,
            match_config,
            query_data=mat,
            query_clustering=clustering,
            query_cluster_index=c,
        )
        outcomes.append(
            ClusterOutcome(
                cluster_index=c,
                member_ids=tuple(embeddings[i].id for i in members),
                decision=decision,
                label=decision.label if decision.matched else NON_REGISTERED,
            )
        )

    by_cluster = {o.cluster_index: o.label for o in outcomes}
    face_labels = tuple(
        (e.id, e.frame_index, by_cluster[clustering.assignments[i]])
        for i, e in enumerate(embeddings)
    )
    return RecognitionResult(
        clustering=clustering,
        outcomes=tuple(outcomes),
        face_labels=face_labels,
    )
