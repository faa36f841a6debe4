"""Street-graph fusion embeddings: training, evaluation, projection, serving."""

from .data import (
    Dataset,
    IncidentRecord,
    Normalization,
    SchemaError,
    assign_incidents,
    load_dataset,
    load_dataset_dir,
    normalize_features,
    save_dataset,
)
from .fusion import (
    EmbeddingSet,
    FusionModelKind,
    FusionSpecs,
    default_fusion_specs,
    train_m1,
    train_m2,
    train_m3,
    train_m4,
)
from .gae import AutoencoderSpec, TrainReport, grid_search, train
from .graph import StreetGraph, random_geometric_graph
from .metrics import (
    ClusterAssignment,
    SilhouettePair,
    QuadrantSummary,
    cohesion,
    dist_dtw,
    dist_euclidean,
    evaluate_embedding,
    evaluate_with_labels,
    kmeans,
    separation,
    silhouette_pair,
)
from .session import Report, Session, report
from .synth import SynthConfig, generate, spatial_clusters
from .tsne import TsneConfig, project

__version__ = "0.1.0"
