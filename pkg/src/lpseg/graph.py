"""Undirected, unweighted kNN graph over feature vectors.

Node i and node j are connected when either is among the other's k nearest
neighbors (Euclidean distance in the weighted feature space). Adjacency is
CSR-style with neighbor lists sorted ascending; the edge set equals an
exhaustive-scan construction under the fixed (distance, id) tie rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kdtree


@dataclass
class PixelGraph:
    indptr: np.ndarray  # int64, length n_nodes + 1
    indices: np.ndarray  # int64, sorted ascending within each node
    node_to_pixel: np.ndarray | None = field(default=None)

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node] : self.indptr[node + 1]]


def build_knn_graph(features: np.ndarray, k: int, workers: int = 1) -> PixelGraph:
    """Symmetric closure of the directed kNN relation (the OR rule)."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError(f"expected (n, d) feature matrix, got shape {features.shape}")
    n = features.shape[0]
    if n < 2:
        raise ValueError("need at least 2 nodes to build a graph")
    if k < 1 or k >= n:
        raise ValueError(f"k={k} outside [1, {n - 1}] for {n} nodes")

    tree = kdtree.build(features)
    nn = kdtree.query_members(tree, k, workers=workers)

    src = np.repeat(np.arange(n, dtype=np.int64), k)
    dst = nn.ravel()
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    uniq = np.unique(lo * n + hi)
    lo = uniq // n
    hi = uniq % n

    heads = np.concatenate([lo, hi])
    tails = np.concatenate([hi, lo])
    order = np.lexsort((tails, heads))
    indices = tails[order]
    counts = np.bincount(heads, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return PixelGraph(indptr=indptr, indices=indices)


def dump_edges(graph: PixelGraph, fp) -> None:
    """Write the edge list as text lines "i j" with i < j."""
    for i in range(graph.n_nodes):
        for j in graph.neighbors(i):
            if i < j:
                fp.write(f"{i} {j}\n")
