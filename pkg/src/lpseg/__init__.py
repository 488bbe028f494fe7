"""Interactive image segmentation by label propagation on kNN pixel graphs."""

from .features import FEATURE_NAMES, N_FEATURES, extract_features
from .ga import GaConfig, Genome, optimize
from .graph import PixelGraph, build_knn_graph
from .pipeline import SegParams, SegmentationResult, encode_mask, error_rate, segment
from .propagation import (
    ConvergenceMonitor,
    convergence_statistic,
    decode_labels,
    init_domination,
    propagation_step,
    run_propagation,
)
from .seeds import SeedMap, decode_ground_truth, decode_scribbles, decode_trimap

__version__ = "0.1.0"

__all__ = [
    "FEATURE_NAMES",
    "N_FEATURES",
    "extract_features",
    "GaConfig",
    "Genome",
    "optimize",
    "PixelGraph",
    "build_knn_graph",
    "SegParams",
    "SegmentationResult",
    "encode_mask",
    "error_rate",
    "segment",
    "ConvergenceMonitor",
    "convergence_statistic",
    "decode_labels",
    "init_domination",
    "propagation_step",
    "run_propagation",
    "SeedMap",
    "decode_ground_truth",
    "decode_scribbles",
    "decode_trimap",
]
