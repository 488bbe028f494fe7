"""Iterative label propagation over the pixel graph.

Every node carries a per-class domination vector summing to 1. Seeded nodes
are one-hot and immutable; unlabeled nodes start uniform and are replaced,
synchronously, by the arithmetic mean of their neighbors' vectors from the
previous iteration. Convergence is monitored through the mean (over
unlabeled nodes) of each node's maximum domination entry, checked every 10
iterations; the run stops once that statistic rises by less than 0.001
between checkpoints.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from . import backend
from .graph import PixelGraph

UNLABELED = 0


@dataclass
class ConvergenceMonitor:
    check_interval: int = 10
    epsilon: float = 0.001
    max_iterations: int = 10_000

    def __post_init__(self):
        if self.check_interval < 1:
            raise ValueError("check_interval must be >= 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


@dataclass
class PropagationResult:
    domination: np.ndarray
    iterations: int
    converged: bool
    checkpoints: list[tuple[int, float]] = field(default_factory=list)
    degree_zero_nodes: int = 0


def init_domination(node_labels: np.ndarray, class_count: int) -> np.ndarray:
    """Initial domination matrix: one-hot for seeds, uniform 1/C otherwise.

    ``node_labels`` holds 0 for unlabeled nodes and the class id (1..C) for
    seeds. Classes with no seeds trigger a warning, not an error.
    """
    node_labels = np.asarray(node_labels)
    if class_count < 2:
        raise ValueError("need at least 2 classes")
    if node_labels.min(initial=0) < 0 or node_labels.max(initial=0) > class_count:
        bad = node_labels[(node_labels < 0) | (node_labels > class_count)][0]
        raise ValueError(f"label {bad} outside {{0..{class_count}}}")
    seeded = np.unique(node_labels[node_labels > 0])
    missing = sorted(set(range(1, class_count + 1)) - set(int(c) for c in seeded))
    if missing:
        warnings.warn(f"classes without seeds: {missing}", stacklevel=2)
    n = len(node_labels)
    dom = np.full((n, class_count), 1.0 / class_count, dtype=np.float64)
    labeled = node_labels > 0
    dom[labeled] = 0.0
    dom[labeled, node_labels[labeled] - 1] = 1.0
    return dom


def convergence_statistic(dom: np.ndarray, unlabeled_ids: np.ndarray) -> float:
    """Mean over unlabeled nodes of the max domination entry; 1.0 if none."""
    if len(unlabeled_ids) == 0:
        return 1.0
    return float(dom[unlabeled_ids].max(axis=1).mean())


def decode_labels(dom: np.ndarray) -> np.ndarray:
    """Argmax class per node (1-based); ties go to the lowest class index."""
    return np.argmax(dom, axis=1).astype(np.int64) + 1


class _Stepper:
    """Per-run update engine: computes unlabeled rows of the next buffer.

    The unlabeled range is split into ``workers`` contiguous slices. Each
    slice's rows depend only on the previous buffer, so results are
    bit-identical for every worker count; threads only matter for speed
    (numba kernels release the GIL).
    """

    def __init__(self, graph: PixelGraph, unlabeled: np.ndarray, workers: int):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.unlabeled = unlabeled
        self.workers = workers
        degs = graph.degrees()[unlabeled]
        self.degree_zero = unlabeled[degs == 0]
        if len(self.degree_zero):
            warnings.warn(
                f"{len(self.degree_zero)} unlabeled node(s) have no neighbors; "
                "their rows stay fixed",
                stacklevel=3,
            )
        u = len(unlabeled)
        bounds = np.linspace(0, u, workers + 1).astype(np.int64)
        self.slices = [
            (int(bounds[i]), int(bounds[i + 1]))
            for i in range(workers)
            if bounds[i] < bounds[i + 1]
        ]
        self.use_numba = backend.use_numba()
        if self.use_numba:
            from .kernels import numba_impl

            self._kernel = numba_impl.propagate_range
            self.indptr = graph.indptr
            self.indices = graph.indices
        else:
            from .kernels import numpy_impl

            self._block = numpy_impl.propagate_block
            n = graph.n_nodes
            self.plans = []
            for lo, hi in self.slices:
                ids = unlabeled[lo:hi]
                counts = graph.indptr[ids + 1] - graph.indptr[ids]
                indptr = np.zeros(len(ids) + 1, dtype=np.int64)
                np.cumsum(counts, out=indptr[1:])
                cols = np.concatenate(
                    [graph.indices[graph.indptr[i] : graph.indptr[i + 1]] for i in ids]
                ) if len(ids) else np.empty(0, dtype=np.int64)
                adj = sparse.csr_matrix(
                    (np.ones(len(cols)), cols, indptr), shape=(len(ids), n)
                )
                safe = np.maximum(counts, 1).astype(np.float64)
                self.plans.append((ids, adj, safe, counts == 0))

    def step(self, cur: np.ndarray, nxt: np.ndarray, pool: ThreadPoolExecutor | None) -> None:
        if self.use_numba:
            if pool is None or len(self.slices) == 1:
                for lo, hi in self.slices:
                    self._kernel(cur, self.indptr, self.indices, self.unlabeled, lo, hi, nxt)
            else:
                futures = [
                    pool.submit(
                        self._kernel, cur, self.indptr, self.indices, self.unlabeled, lo, hi, nxt
                    )
                    for lo, hi in self.slices
                ]
                for fut in futures:
                    fut.result()
        else:
            for ids, adj, safe, zero in self.plans:
                rows = self._block(adj, safe, cur)
                if zero.any():
                    rows[zero] = cur[ids[zero]]
                nxt[ids] = rows


def propagation_step(
    dom: np.ndarray,
    graph: PixelGraph,
    node_labels: np.ndarray,
    workers: int = 1,
) -> np.ndarray:
    """One synchronous update; labeled rows are copied through unchanged."""
    node_labels = np.asarray(node_labels)
    if dom.shape[0] != graph.n_nodes or dom.shape[0] != len(node_labels):
        raise ValueError("domination matrix, graph, and labels disagree on node count")
    unlabeled = np.flatnonzero(node_labels == UNLABELED).astype(np.int64)
    nxt = dom.copy()
    stepper = _Stepper(graph, unlabeled, workers)
    if stepper.use_numba and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stepper.step(dom, nxt, pool)
    else:
        stepper.step(dom, nxt, None)
    return nxt


def run_propagation(
    dom0: np.ndarray,
    graph: PixelGraph,
    node_labels: np.ndarray,
    monitor: ConvergenceMonitor | None = None,
    workers: int = 1,
    trace=None,
) -> PropagationResult:
    """Iterate updates until the checkpoint statistic stalls or the cap hits.

    The statistic after initialization is the first checkpoint baseline.
    A checkpoint stops the run when ``stat_now - stat_prev < epsilon``
    (any non-increase stops too). ``trace`` is an optional callable
    receiving (iteration, statistic) at every checkpoint.
    """
    monitor = monitor or ConvergenceMonitor()
    node_labels = np.asarray(node_labels)
    if dom0.shape[0] != graph.n_nodes or dom0.shape[0] != len(node_labels):
        raise ValueError("domination matrix, graph, and labels disagree on node count")
    unlabeled = np.flatnonzero(node_labels == UNLABELED).astype(np.int64)
    checkpoints: list[tuple[int, float]] = []

    def record(iteration: int, stat: float) -> None:
        checkpoints.append((iteration, stat))
        if trace is not None:
            trace(iteration, stat)

    if len(unlabeled) == 0:
        record(0, 1.0)
        return PropagationResult(dom0.copy(), 0, True, checkpoints)

    stepper = _Stepper(graph, unlabeled, workers)
    cur = dom0.copy()
    nxt = dom0.copy()
    stat_prev = convergence_statistic(cur, unlabeled)
    record(0, stat_prev)

    pool = None
    if stepper.use_numba and len(stepper.slices) > 1:
        pool = ThreadPoolExecutor(max_workers=workers)
    converged = False
    iteration = 0
    try:
        while iteration < monitor.max_iterations:
            iteration += 1
            stepper.step(cur, nxt, pool)
            cur, nxt = nxt, cur
            if iteration % monitor.check_interval == 0:
                stat = convergence_statistic(cur, unlabeled)
                record(iteration, stat)
                if stat - stat_prev < monitor.epsilon:
                    converged = True
                    break
                stat_prev = stat
    finally:
        if pool is not None:
            pool.shutdown()
    if not converged and iteration >= monitor.max_iterations:
        warnings.warn(
            f"propagation hit the {monitor.max_iterations}-iteration cap without "
            "satisfying the stop rule",
            stacklevel=2,
        )
    return PropagationResult(cur, iteration, converged, checkpoints, len(stepper.degree_zero))
