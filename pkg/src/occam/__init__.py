"""Transferability scoring for pretrained-model embeddings.

Scores how well a model's embedding separates a labeled target task
(interclass-distance and concept-variation metrics), ranks model zoos,
evaluates rankings against ground truth with (weighted) Kendall's tau,
verifies the nearest-center reading of softmax heads, and generates seeded
synthetic datasets.
"""

from .centers import (
    ArgmaxReport,
    CenterSet,
    ConfidenceReport,
    SoftmaxHead,
    compute_centers,
    verify_argmax_equivalence,
    verify_confidence_equality,
)
from .conceptvar import (
    CvConfig,
    CvResult,
    Normalization,
    concept_variation,
    cv_score,
    normalize_min_max,
    weight_function,
)
from .data import (
    EmbeddingMatrix,
    LabeledDataset,
    LabelVector,
    ScoreReport,
    load_dataset,
    load_embeddings,
    load_ground_truth,
    load_labels,
    load_score_map,
    load_vector,
    save_embeddings,
    save_labels,
)
from .distances import (
    DEFAULT_BLOCK_ROWS,
    DEFAULT_MEMORY_CAP,
    DistanceMatrix,
    DistanceMetric,
    cross_group_mean_distance,
    pairwise_distances,
)
from .errors import (
    CapacityExceeded,
    EmptyGroup,
    InvalidSpec,
    KeyMismatch,
    LengthMismatch,
    MalformedFile,
    NegativeLabel,
    NonFinite,
    NoSolution,
    OccamError,
    OutOfRange,
    RankDeficient,
    TooFewModels,
    UndefinedScore,
    WrongRank,
)
from .interclass import (
    Aggregation,
    IntScoreConfig,
    int_score,
    interclass_mean_distances,
)
from .ranking import RankedEntry, ZooEntry, ZooRanking, load_manifest, rank_zoo
from .ranktau import EvalReport, evaluate_ranking, kendall_tau, weighted_kendall_tau
from .synth import BlobSpec, SubsampleDeficitWarning, generate_blobs, stratified_subsample

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # data
    "EmbeddingMatrix",
    "LabelVector",
    "LabeledDataset",
    "ScoreReport",
    "load_embeddings",
    "load_labels",
    "load_dataset",
    "load_vector",
    "load_score_map",
    "load_ground_truth",
    "save_embeddings",
    "save_labels",
    # distances
    "DistanceMetric",
    "DistanceMatrix",
    "pairwise_distances",
    "cross_group_mean_distance",
    "DEFAULT_BLOCK_ROWS",
    "DEFAULT_MEMORY_CAP",
    # metrics
    "IntScoreConfig",
    "Aggregation",
    "int_score",
    "interclass_mean_distances",
    "CvConfig",
    "CvResult",
    "Normalization",
    "concept_variation",
    "cv_score",
    "normalize_min_max",
    "weight_function",
    # ranking and evaluation
    "ZooEntry",
    "RankedEntry",
    "ZooRanking",
    "load_manifest",
    "rank_zoo",
    "EvalReport",
    "kendall_tau",
    "weighted_kendall_tau",
    "evaluate_ranking",
    # nearest-center verification
    "SoftmaxHead",
    "CenterSet",
    "ArgmaxReport",
    "ConfidenceReport",
    "compute_centers",
    "verify_argmax_equivalence",
    "verify_confidence_equality",
    # synthetic data
    "BlobSpec",
    "generate_blobs",
    "stratified_subsample",
    "SubsampleDeficitWarning",
    # errors
    "OccamError",
    "MalformedFile",
    "NonFinite",
    "WrongRank",
    "LengthMismatch",
    "NegativeLabel",
    "OutOfRange",
    "CapacityExceeded",
    "EmptyGroup",
    "UndefinedScore",
    "KeyMismatch",
    "TooFewModels",
    "RankDeficient",
    "NoSolution",
    "InvalidSpec",
]
