"""Sparse subspace clustering with active orthogonal matching pursuit."""

from .datagen import LabeledDataset, SubspaceModel, generate, load_matrix, save_matrix
from .pipeline import AlgorithmParams, ClusteringResult, Variant, run

__all__ = [
    "AlgorithmParams",
    "ClusteringResult",
    "LabeledDataset",
    "SubspaceModel",
    "Variant",
    "generate",
    "load_matrix",
    "run",
    "save_matrix",
]
