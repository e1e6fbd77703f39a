"""Sparse clustering by alternating feature selection and clustering."""

from .backend import ClustererConfig, kmeans, kmedoids
from .dissim import (
    DissimilarityStack,
    euclidean_stack,
    hamming_stack,
    normalize,
    wcd,
    wcd_per_feature,
)
from .estimator import SASClustering
from .exceptions import InputError, ParseError, SASError
from .metrics import classification_error, rand_index, symmetric_difference
from .sas import SasResult, sas_cluster
from .simgen import SimulationSpec, generate, standardize
from .tuning import GapProfile, golden_section_search, grid_search

__version__ = "0.1.0"

__all__ = [
    "ClustererConfig",
    "DissimilarityStack",
    "GapProfile",
    "InputError",
    "ParseError",
    "SASClustering",
    "SASError",
    "SasResult",
    "SimulationSpec",
    "classification_error",
    "euclidean_stack",
    "generate",
    "golden_section_search",
    "grid_search",
    "hamming_stack",
    "kmeans",
    "kmedoids",
    "normalize",
    "rand_index",
    "sas_cluster",
    "standardize",
    "symmetric_difference",
    "wcd",
    "wcd_per_feature",
]
