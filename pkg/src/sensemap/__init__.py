"""Sense-level orthogonal mapping between contextual embedding spaces."""
from .clustering import AnchorPairSet, ClusteringConfig, derive_sense_anchors, kmeans, select_k_elbow
from .errors import *  # noqa: F401,F403
from .evaluation import evaluate_artifact, map_recovery_error, precision_at, retrieval_precision
from .ingest import (
    AlignmentSet,
    SentenceRecord,
    TypeCollection,
    collect_type_pairs,
    filter_one_to_one,
    read_alignments,
    read_corpus,
    write_alignments,
    write_corpus,
)
from .isotropy import INTransform, anisotropy_score, apply_in, fit_iterative_normalization
from .linalg import (
    EmbeddingMatrix,
    OrthogonalMap,
    apply_map,
    frobenius_norm,
    solve_procrustes,
    unit_normalize_columns,
)
from .pipeline import (
    MappingArtifact,
    PipelineConfig,
    build_anchor_matrices,
    fit_mapping,
    load_artifact,
    save_artifact,
    train_mapping,
    transfer_matrix,
    transfer_vector,
)
from .synth import GroundTruth, SynthConfig, generate_synthetic, load_ground_truth

__version__ = "0.1.0"
