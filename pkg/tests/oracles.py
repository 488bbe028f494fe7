"""Independent reference implementations used to check the library.

Everything here is deliberately naive: exhaustive scans, dense matrices,
per-pixel loops. Nothing imports the library's kernels, graph builder, or
propagation engine.
"""

import numpy as np


def brute_knn_ids(points: np.ndarray, k: int) -> np.ndarray:
    """Each point's k nearest other points via a full distance scan."""
    n = len(points)
    out = np.empty((n, k), dtype=np.int64)
    ids = np.arange(n)
    for i in range(n):
        d2 = ((points - points[i]) ** 2).sum(axis=1)
        order = np.lexsort((ids, d2))
        order = order[order != i]
        out[i] = order[:k]
    return out


def brute_knn_edges(points: np.ndarray, k: int) -> set[tuple[int, int]]:
    """OR-rule symmetric closure as a set of (i, j) pairs with i < j."""
    nn = brute_knn_ids(points, k)
    edges = set()
    for i in range(len(points)):
        for j in nn[i]:
            edges.add((min(i, int(j)), max(i, int(j))))
    return edges


def graph_edge_set(graph) -> set[tuple[int, int]]:
    edges = set()
    for i in range(graph.n_nodes):
        for j in graph.neighbors(i):
            edges.add((min(i, int(j)), max(i, int(j))))
    return edges


def dense_update_matrix(graph, node_labels: np.ndarray) -> np.ndarray:
    """Row-stochastic dense matrix P with dom(t+1) = P @ dom(t)."""
    n = graph.n_nodes
    P = np.zeros((n, n))
    for i in range(n):
        nbrs = graph.neighbors(i)
        if node_labels[i] != 0 or len(nbrs) == 0:
            P[i, i] = 1.0
        else:
            P[i, nbrs] = 1.0 / len(nbrs)
    return P


def window_stats_loop(plane: np.ndarray, row: int, col: int) -> tuple[float, float]:
    """Scan-order two-pass loop over the shrinking 8-connected window."""
    h, w = plane.shape
    values = []
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            rr, cc = row + dr, col + dc
            if 0 <= rr < h and 0 <= cc < w:
                values.append(float(plane[rr, cc]))
    s = 0.0
    for v in values:
        s += v
    m = s / len(values)
    ss = 0.0
    for v in values:
        d = v - m
        ss += d * d
    return m, (ss / len(values)) ** 0.5


def hsv_to_rgb(h: float, s: float, v: float) -> tuple[float, float, float]:
    """Inverse hexcone, for round-trip checks."""
    h6 = (h % 1.0) * 6.0
    sector = int(h6) % 6
    f = h6 - int(h6)
    p = v * (1 - s)
    q = v * (1 - s * f)
    t = v * (1 - s * (1 - f))
    return [
        (v, t, p),
        (q, v, p),
        (p, v, t),
        (p, q, v),
        (t, p, v),
        (v, p, q),
    ][sector]


def reference_segmentation(image, seeds, lam, k, check_interval=10, epsilon=1e-3, max_iterations=10_000):
    """Full pipeline re-derived from scratch: per-pixel feature loops,
    exhaustive kNN, dense matrix recurrence, argmax decode.

    Returns (classes image, iterations). Small inputs only.
    """
    h, w = image.shape[:2]
    participating = seeds.codes != -1
    pixel_ids = np.flatnonzero(participating.ravel())
    feats_full = _reference_features(image)
    feats = feats_full[pixel_ids]
    keep = feats.max(axis=0) != feats.min(axis=0)
    centered = feats - feats.mean(axis=0)
    sigma = np.sqrt((centered**2).mean(axis=0))
    z = np.zeros_like(feats)
    z[:, keep] = centered[:, keep] / sigma[keep]
    z = z * np.asarray(lam)

    edges = brute_knn_edges(z, k)
    n = len(pixel_ids)
    A = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        A[i, j] = True
        A[j, i] = True

    labels = seeds.codes.ravel()[pixel_ids]
    C = seeds.class_count
    dom = np.full((n, C), 1.0 / C)
    for i in range(n):
        if labels[i] > 0:
            dom[i] = 0.0
            dom[i, labels[i] - 1] = 1.0

    unlabeled = np.flatnonzero(labels == 0)

    def stat(d):
        return d[unlabeled].max(axis=1).mean() if len(unlabeled) else 1.0

    P = np.zeros((n, n))
    for i in range(n):
        nbrs = np.flatnonzero(A[i])
        if labels[i] != 0 or len(nbrs) == 0:
            P[i, i] = 1.0
        else:
            P[i, nbrs] = 1.0 / len(nbrs)

    prev = stat(dom)
    iterations = 0
    if len(unlabeled):
        while iterations < max_iterations:
            iterations += 1
            dom = P @ dom
            if iterations % check_interval == 0:
                s = stat(dom)
                if s - prev < epsilon:
                    break
                prev = s

    classes = np.zeros((h, w), dtype=np.int64)
    decoded = np.argmax(dom, axis=1) + 1
    decoded[labels > 0] = labels[labels > 0]
    classes.ravel()[pixel_ids] = decoded
    return classes, iterations


def _reference_features(image):
    """Raw per-pixel features via python loops (row-major pixel order)."""
    import colorsys

    h, w = image.shape[:2]
    hsv = np.zeros_like(image)
    for r in range(h):
        for c in range(w):
            red, grn, blu = image[r, c]
            hh, ss, vv = colorsys.rgb_to_hsv(red, grn, blu)
            hsv[r, c] = (hh, ss, vv)
    feats = np.zeros((h * w, 23))
    planes = {
        "r": image[..., 0],
        "g": image[..., 1],
        "b": image[..., 2],
        "h": hsv[..., 0],
        "s": hsv[..., 1],
        "v": hsv[..., 2],
    }
    idx = 0
    for r in range(h):
        for c in range(w):
            red, grn, blu = image[r, c]
            row = [r, c, red, grn, blu, hsv[r, c, 0], hsv[r, c, 1], hsv[r, c, 2],
                   2 * red - grn - blu, 2 * grn - red - blu, 2 * blu - red - grn]
            stats = {}
            for name in ("r", "g", "b", "h", "s", "v"):
                stats[name] = window_stats_loop(planes[name], r, c)
            row.extend([stats["r"][0], stats["g"][0], stats["b"][0]])
            row.extend([stats["r"][1], stats["g"][1], stats["b"][1]])
            row.extend([stats["h"][0], stats["s"][0], stats["v"][0]])
            row.extend([stats["h"][1], stats["s"][1], stats["v"][1]])
            feats[idx] = row
            idx += 1
    return feats
