"""Open-set identity recognition over embedding vectors via cluster matching."""

from .clustering import (
    Clustering,
    KSearchConfig,
    SilhouetteReport,
    affinity_propagation,
    agglomerative_ward,
    estimate_clustering,
    kmeans,
    silhouette,
)
from .evaluation import (
    ContingencyTable,
    MatchMetrics,
    VideoScore,
    VMeasureReport,
    contingency,
    match_metrics,
    score_video,
    v_measure,
)
from .geometry import DistanceMatrix, Embedding, centroid, euclidean_distance, pairwise_distances, rmse
from .matching import (
    BEST_SILHOUETTE,
    CENTROID,
    ClusterEmbedding,
    LabeledCluster,
    LabeledClusterSet,
    MatchConfig,
    MatchDecision,
    majority_label,
    make_cluster_embedding,
    match_cluster,
    match_probabilities,
    sigma,
    similarity,
    truncate_top_alpha,
)
from .pipeline import NON_REGISTERED, RecognitionResult, build_labeled_store, recognize
from .synth import SynthConfig, SyntheticDataset, generate_synthetic, sample_more
from .timeline import TimelineSegment, emit_timeline, expand_segments

__version__ = "0.1.0"

__all__ = [
    "BEST_SILHOUETTE",
    "CENTROID",
    "Clustering",
    "ClusterEmbedding",
    "ContingencyTable",
    "DistanceMatrix",
    "Embedding",
    "KSearchConfig",
    "LabeledCluster",
    "LabeledClusterSet",
    "MatchConfig",
    "MatchDecision",
    "MatchMetrics",
    "NON_REGISTERED",
    "RecognitionResult",
    "SilhouetteReport",
    "SynthConfig",
    "SyntheticDataset",
    "TimelineSegment",
    "VideoScore",
    "VMeasureReport",
    "affinity_propagation",
    "agglomerative_ward",
    "build_labeled_store",
    "centroid",
    "contingency",
    "emit_timeline",
    "estimate_clustering",
    "euclidean_distance",
    "expand_segments",
    "generate_synthetic",
    "kmeans",
    "majority_label",
    "make_cluster_embedding",
    "match_cluster",
    "match_metrics",
    "match_probabilities",
    "pairwise_distances",
    "recognize",
    "rmse",
    "sample_more",
    "score_video",
    "sigma",
    "silhouette",
    "similarity",
    "truncate_top_alpha",
    "v_measure",
]
