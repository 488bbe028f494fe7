"""Exact k-d tree nearest-neighbor search.

The tree is a bucketed k-d tree: splitting dimensions cycle with depth, each
internal node splits its points at the median index of a stable sort (so
builds are deterministic and balanced even with duplicate coordinates), and
leaves hold up to ``leaf_size`` point indices. Queries are exact; distance
ties are broken by the lower point id. Under the numpy backend, queries run
as an exhaustive vectorized scan instead of a tree walk; results obey the
same tie rule.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels

DEFAULT_LEAF_SIZE = 16


@dataclass
class KdTree:
    points: np.ndarray  # (n, d) float64, row id == point id
    split_dim: np.ndarray  # int64 per node; valid for internal nodes
    split_val: np.ndarray  # float64 per node
    left: np.ndarray  # int64 child index, -1 marks a leaf
    right: np.ndarray
    start: np.ndarray  # leaf range [start, end) into perm
    end: np.ndarray
    perm: np.ndarray  # int64 permutation of point ids
    leaf_size: int

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def build(points: np.ndarray, leaf_size: int = DEFAULT_LEAF_SIZE) -> KdTree:
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError(f"expected (n, d) point matrix, got shape {points.shape}")
    if leaf_size < 1:
        raise ValueError("leaf_size must be >= 1")
    n, d = points.shape
    perm = np.arange(n, dtype=np.int64)
    split_dim: list[int] = []
    split_val: list[float] = []
    left: list[int] = []
    right: list[int] = []
    start: list[int] = []
    end: list[int] = []

    def make_node(lo: int, hi: int, depth: int) -> int:
        node = len(left)
        split_dim.append(0)
        split_val.append(0.0)
        left.append(-1)
        right.append(-1)
        start.append(lo)
        end.append(hi)
        if hi - lo <= leaf_size:
            return node
        dim = depth % d
        vals = points[perm[lo:hi], dim]
        order = np.argsort(vals, kind="stable")
        perm[lo:hi] = perm[lo:hi][order]
        mid = (hi - lo) // 2
        split_dim[node] = dim
        split_val[node] = points[perm[lo + mid], dim]
        lc = make_node(lo, lo + mid, depth + 1)
        rc = make_node(lo + mid, hi, depth + 1)
        left[node] = lc
        right[node] = rc
        return node

    make_node(0, n, 0)
    return KdTree(
        points=points,
        split_dim=np.asarray(split_dim, dtype=np.int64),
        split_val=np.asarray(split_val, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        start=np.asarray(start, dtype=np.int64),
        end=np.asarray(end, dtype=np.int64),
        perm=perm,
        leaf_size=leaf_size,
    )


def _query_batch(tree: KdTree, queries: np.ndarray, k: int, exclude: np.ndarray, lo: int, hi: int, out: np.ndarray) -> None:
    kernels.kd_query_range(
        tree.points,
        tree.split_dim,
        tree.split_val,
        tree.left,
        tree.right,
        tree.start,
        tree.end,
        tree.perm,
        queries,
        k,
        exclude,
        out,
        lo,
        hi,
    )


def query(tree: KdTree, point, k: int, exclude: int = -1) -> np.ndarray:
    """Ids of the k nearest points, ascending by (distance, id).

    ``exclude`` removes one point id from consideration (pass the query's own
    id when querying a tree member).
    """
    q = np.ascontiguousarray(point, dtype=np.float64).reshape(1, -1)
    if q.shape[1] != tree.points.shape[1]:
        raise ValueError(
            f"query has {q.shape[1]} dimensions, tree has {tree.points.shape[1]}"
        )
    available = tree.n_points - (1 if 0 <= exclude < tree.n_points else 0)
    if k < 1 or k > available:
        raise ValueError(f"k={k} outside [1, {available}] available points")
    out = np.empty((1, k), dtype=np.int64)
    _query_batch(tree, q, k, np.asarray([exclude], dtype=np.int64), 0, 1, out)
    return out[0]


def query_members(tree: KdTree, k: int, workers: int = 1) -> np.ndarray:
    """For every tree point: ids of its k nearest other points, (n, k).

    Queries are read-only and partition cleanly; ``workers`` > 1 splits the
    point range across a thread pool (kernels release the GIL). Results are
    identical for any worker count.
    """
    n = tree.n_points
    if k < 1 or k > n - 1:
        raise ValueError(f"k={k} outside [1, {n - 1}] for {n} member points")
    out = np.empty((n, k), dtype=np.int64)
    exclude = np.arange(n, dtype=np.int64)
    if workers <= 1:
        _query_batch(tree, tree.points, k, exclude, 0, n, out)
        return out
    bounds = np.linspace(0, n, workers + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_query_batch, tree, tree.points, k, exclude, int(bounds[i]), int(bounds[i + 1]), out)
            for i in range(workers)
            if bounds[i] < bounds[i + 1]
        ]
        for fut in futures:
            fut.result()
    return out
