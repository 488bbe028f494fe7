"""End-to-end segmentation: seeds + image -> per-pixel classes.

Ignored-background pixels never enter the graph; features are extracted and
normalized over the participating pixels, the kNN graph is built in the
weighted feature space, seeds are propagated, and labels are decoded. The
whole path is deterministic: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import features as features_mod
from . import graph as graph_mod
from . import propagation
from .graph import PixelGraph
from .seeds import BACKGROUND, FOREGROUND, GT_UNCERTAIN, IGNORED, UNLABELED, SeedMap


@dataclass
class SegParams:
    k: int = 10
    lam: np.ndarray = field(default_factory=lambda: np.ones(features_mod.N_FEATURES))

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        self.k = int(self.k)
        self.lam = features_mod.validate_weights(self.lam)


@dataclass
class SegmentationResult:
    classes: np.ndarray  # int32 (h, w); 0 where ignored
    ignored: np.ndarray  # bool (h, w)
    class_count: int
    iterations: int
    converged: bool
    wall_ms: float
    n_nodes: int
    checkpoints: list[tuple[int, float]] = field(default_factory=list)
    degree_zero_nodes: int = 0


def prepare_graph(
    image: np.ndarray,
    params: SegParams,
    include: np.ndarray | None = None,
    workers: int = 1,
) -> tuple[np.ndarray, PixelGraph]:
    """Feature matrix and kNN graph for the included pixels.

    Split out of :func:`segment` so callers that re-seed the same image with
    unchanged (k, weights) can reuse the expensive graph build.
    """
    feats = features_mod.extract_features(image, params.lam, include=include)
    g = graph_mod.build_knn_graph(feats, params.k, workers=workers)
    if include is not None:
        g.node_to_pixel = np.flatnonzero(np.asarray(include, dtype=bool).ravel())
    else:
        g.node_to_pixel = np.arange(feats.shape[0], dtype=np.int64)
    return feats, g


def segment(
    image: np.ndarray,
    seeds: SeedMap,
    params: SegParams,
    workers: int = 1,
    trace=None,
    monitor: propagation.ConvergenceMonitor | None = None,
    prepared: tuple[np.ndarray, PixelGraph] | None = None,
) -> SegmentationResult:
    """Propagate seed labels to every unlabeled pixel.

    ``prepared`` optionally injects a (features, graph) pair from
    :func:`prepare_graph` for the same image/params/participation.
    """
    t0 = time.perf_counter()
    image = features_mod.validate_image(image)
    if seeds.codes.shape != image.shape[:2]:
        raise ValueError(
            f"seed map shape {seeds.codes.shape} does not match image {image.shape[:2]}"
        )
    present = seeds.classes_present()
    if len(present) < 2:
        raise ValueError(f"need seeds from at least 2 classes, found {present}")

    participating = seeds.participating()
    node_to_pixel = np.flatnonzero(participating.ravel())
    n_nodes = len(node_to_pixel)
    classes = np.zeros(seeds.codes.shape, dtype=np.int32)
    ignored = ~participating

    if seeds.unlabeled_count() == 0:
        classes[participating] = seeds.codes[participating]
        wall_ms = (time.perf_counter() - t0) * 1000.0
        return SegmentationResult(
            classes=classes,
            ignored=ignored,
            class_count=seeds.class_count,
            iterations=0,
            converged=True,
            wall_ms=wall_ms,
            n_nodes=n_nodes,
            checkpoints=[(0, 1.0)],
        )

    if prepared is not None:
        feats, g = prepared
        if g.n_nodes != n_nodes:
            raise ValueError(
                f"prepared graph has {g.n_nodes} nodes, participation implies {n_nodes}"
            )
    else:
        feats, g = prepare_graph(image, params, include=participating, workers=workers)

    node_labels = seeds.codes.ravel()[node_to_pixel].astype(np.int64)
    dom0 = propagation.init_domination(node_labels, seeds.class_count)
    result = propagation.run_propagation(
        dom0, g, node_labels, monitor=monitor, workers=workers, trace=trace
    )
    decoded = propagation.decode_labels(result.domination)
    decoded[node_labels > 0] = node_labels[node_labels > 0]
    classes.ravel()[node_to_pixel] = decoded

    wall_ms = (time.perf_counter() - t0) * 1000.0
    return SegmentationResult(
        classes=classes,
        ignored=ignored,
        class_count=seeds.class_count,
        iterations=result.iterations,
        converged=result.converged,
        wall_ms=wall_ms,
        n_nodes=n_nodes,
        checkpoints=result.checkpoints,
        degree_zero_nodes=result.degree_zero_nodes,
    )


def error_rate(result: SegmentationResult, gt_codes: np.ndarray, seeds: SeedMap) -> float:
    """Fraction of unlabeled pixels classified differently from ground truth.

    Ground-truth-uncertain pixels are excluded from both numerator and
    denominator.
    """
    gt_codes = np.asarray(gt_codes)
    if gt_codes.shape != result.classes.shape or seeds.codes.shape != result.classes.shape:
        raise ValueError("result, ground truth, and seeds must share one shape")
    scored = (seeds.codes == UNLABELED) & (gt_codes != GT_UNCERTAIN)
    denom = int(scored.sum())
    if denom == 0:
        raise ValueError("no scorable pixels: every unlabeled pixel is ground-truth-uncertain")
    wrong = int((result.classes[scored] != gt_codes[scored]).sum())
    return wrong / denom


def encode_mask(result: SegmentationResult) -> np.ndarray:
    """8-bit mask image: binary gives foreground 255 / background 0.

    With more than two classes, class c maps to level
    floor(255 * (c - 1) / (C - 1)); pair with :func:`mask_legend`.
    Ignored-background pixels always render as background (0).
    """
    if result.class_count == 2:
        return np.where(result.classes == FOREGROUND, 255, 0).astype(np.uint8)
    levels = np.zeros(result.classes.shape, dtype=np.uint8)
    seen = result.classes >= 1
    levels[seen] = (255 * (result.classes[seen] - 1)) // (result.class_count - 1)
    return levels


def mask_legend(class_count: int) -> list[tuple[int, int]]:
    """(gray level, class id) pairs for multi-class masks."""
    if class_count == 2:
        return [(0, BACKGROUND), (255, FOREGROUND)]
    return [((255 * (c - 1)) // (class_count - 1), c) for c in range(1, class_count + 1)]
