"""Feature-hierarchy trees over high-dimensional embeddings."""

from .analysis import (
    ColdStartResult,
    ConsistencyReport,
    DiagnosisError,
    InferenceError,
    cold_start_embed,
    diagnose_leaf,
)
from .dataset import (
    BinaryFeatureMatrix,
    BinningSpec,
    DatasetError,
    EmbeddingMatrix,
    FeatureDescriptor,
    RawFeatureTable,
    bin_numeric,
    binarize,
    fingerprint,
    load_dataset,
)
from .projection import PrincipalProjection, project
from .split import SplitEvaluation, best_split, embedding_bic
from .tree import (
    EmbeddingTree,
    StoppingCriteria,
    TreeFormatError,
    TreeNode,
    build_tree,
    deserialize_tree,
    serialize_tree,
)

__all__ = [
    "BinaryFeatureMatrix",
    "BinningSpec",
    "ColdStartResult",
    "ConsistencyReport",
    "DatasetError",
    "DiagnosisError",
    "EmbeddingMatrix",
    "EmbeddingTree",
    "FeatureDescriptor",
    "InferenceError",
    "PrincipalProjection",
    "RawFeatureTable",
    "SplitEvaluation",
    "StoppingCriteria",
    "TreeFormatError",
    "TreeNode",
    "best_split",
    "bin_numeric",
    "binarize",
    "build_tree",
    "cold_start_embed",
    "deserialize_tree",
    "diagnose_leaf",
    "embedding_bic",
    "fingerprint",
    "load_dataset",
    "project",
    "serialize_tree",
]

__version__ = "0.1.0"
