"""numba @njit kernels.

Arithmetic here is kept expression-for-expression identical to
``numpy_impl`` (same operations, same accumulation order) so the two
backends return bit-identical arrays. fastmath stays off: reassociation
would break that contract.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def hsv_planes(rgb):
    h_px, w_px = rgb.shape[0], rgb.shape[1]
    out = np.empty((h_px, w_px, 3), np.float64)
    for r in range(h_px):
        for c in range(w_px):
            red = rgb[r, c, 0]
            grn = rgb[r, c, 1]
            blu = rgb[r, c, 2]
            mx = red if red >= grn else grn
            if blu > mx:
                mx = blu
            mn = red if red <= grn else grn
            if blu < mn:
                mn = blu
            delta = mx - mn
            if mx > 0.0:
                sat = delta / mx
            else:
                sat = 0.0
            if delta > 0.0:
                if mx == red:
                    h6 = ((grn - blu) / delta) % 6.0
                elif mx == grn:
                    h6 = (blu - red) / delta + 2.0
                else:
                    h6 = (red - grn) / delta + 4.0
                if h6 >= 6.0:
                    h6 = h6 - 6.0
                hue = h6 / 6.0
            else:
                hue = 0.0
            out[r, c, 0] = hue
            out[r, c, 1] = sat
            out[r, c, 2] = mx
    return out


@njit(cache=True, nogil=True)
def window_mean_std(plane):
    h_px, w_px = plane.shape
    mean = np.empty((h_px, w_px), np.float64)
    std = np.empty((h_px, w_px), np.float64)
    for r in range(h_px):
        for c in range(w_px):
            s = 0.0
            n = 0.0
            for dr in range(-1, 2):
                for dc in range(-1, 2):
                    rr = r + dr
                    cc = c + dc
                    if 0 <= rr < h_px and 0 <= cc < w_px:
                        s += plane[rr, cc]
                        n += 1.0
            m = s / n
            ss = 0.0
            for dr in range(-1, 2):
                for dc in range(-1, 2):
                    rr = r + dr
                    cc = c + dc
                    if 0 <= rr < h_px and 0 <= cc < w_px:
                        d = plane[rr, cc] - m
                        ss += d * d
            mean[r, c] = m
            std[r, c] = np.sqrt(ss / n)
    return mean, std


@njit(cache=True, nogil=True)
def kd_query_range(
    points,
    split_dim,
    split_val,
    left,
    right,
    start,
    end,
    perm,
    queries,
    k,
    exclude,
    out,
    lo,
    hi,
):
    """Exact k nearest for queries[lo:hi], ties broken by lower point id.

    Candidates are kept sorted ascending by (distance^2, id). Subtrees are
    skipped only when their plane distance strictly exceeds the current
    worst candidate, so equal-distance lower ids are never lost.
    """
    d = points.shape[1]
    cand_d = np.empty(k, np.float64)
    cand_i = np.empty(k, np.int64)
    node_stack = np.empty(512, np.int64)
    dist_stack = np.empty(512, np.float64)
    for qi in range(lo, hi):
        excl = exclude[qi]
        count = 0
        top = 0
        node_stack[0] = 0
        dist_stack[0] = 0.0
        top = 1
        while top > 0:
            top -= 1
            node = node_stack[top]
            min_d = dist_stack[top]
            if count == k and min_d > cand_d[k - 1]:
                continue
            while left[node] >= 0:
                dim = split_dim[node]
                diff = queries[qi, dim] - split_val[node]
                plane = diff * diff
                if diff < 0.0:
                    near = left[node]
                    far = right[node]
                else:
                    near = right[node]
                    far = left[node]
                if count < k or plane <= cand_d[k - 1]:
                    node_stack[top] = far
                    dist_stack[top] = plane
                    top += 1
                node = near
            for t in range(start[node], end[node]):
                pid = perm[t]
                if pid == excl:
                    continue
                d2 = 0.0
                reject = False
                for j in range(d):
                    diff = points[pid, j] - queries[qi, j]
                    d2 += diff * diff
                    if count == k and d2 > cand_d[k - 1]:
                        reject = True
                        break
                if reject:
                    continue
                if count == k:
                    wd = cand_d[k - 1]
                    wi = cand_i[k - 1]
                    if d2 > wd or (d2 == wd and pid > wi):
                        continue
                    pos = k - 1
                else:
                    pos = count
                    count += 1
                while pos > 0 and (
                    cand_d[pos - 1] > d2
                    or (cand_d[pos - 1] == d2 and cand_i[pos - 1] > pid)
                ):
                    cand_d[pos] = cand_d[pos - 1]
                    cand_i[pos] = cand_i[pos - 1]
                    pos -= 1
                cand_d[pos] = d2
                cand_i[pos] = pid
        for t in range(k):
            out[qi, t] = cand_i[t]


@njit(cache=True, nogil=True)
def propagate_range(cur, indptr, indices, unlabeled, lo, hi, out):
    """One synchronous update of unlabeled[lo:hi]; reads cur only.

    Neighbor rows are accumulated in adjacency order, then divided by the
    degree. Degree-0 nodes keep their current row.
    """
    n_classes = cur.shape[1]
    for t in range(lo, hi):
        i = unlabeled[t]
        s = indptr[i]
        e = indptr[i + 1]
        deg = e - s
        if deg == 0:
            for c in range(n_classes):
                out[i, c] = cur[i, c]
            continue
        for c in range(n_classes):
            out[i, c] = 0.0
        for jj in range(s, e):
            j = indices[jj]
            for c in range(n_classes):
                out[i, c] += cur[j, c]
        for c in range(n_classes):
            out[i, c] /= deg
