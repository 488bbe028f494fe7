"""Pure-numpy fallback kernels.

Mirrors ``numba_impl`` bit-for-bit: window statistics accumulate shifted
planes in the same offset order (adding masked 0.0 terms, which is exact),
HSV uses the same per-element expressions, and nearest-neighbor queries are
an exhaustive scan with the same (distance^2, id) tie rule.
"""

import numpy as np

# Keeps per-query scratch memory for the brute-force scan around 64 MB.
_SCAN_BUDGET = 8_000_000


def hsv_planes(rgb):
    red = rgb[..., 0]
    grn = rgb[..., 1]
    blu = rgb[..., 2]
    mx = np.maximum(np.maximum(red, grn), blu)
    mn = np.minimum(np.minimum(red, grn), blu)
    delta = mx - mn
    sat = np.where(mx > 0.0, delta / np.where(mx > 0.0, mx, 1.0), 0.0)
    dsafe = np.where(delta > 0.0, delta, 1.0)
    h_r = ((grn - blu) / dsafe) % 6.0
    h_g = (blu - red) / dsafe + 2.0
    h_b = (red - grn) / dsafe + 4.0
    h6 = np.where(mx == red, h_r, np.where(mx == grn, h_g, h_b))
    h6 = np.where(h6 >= 6.0, h6 - 6.0, h6)
    hue = np.where(delta > 0.0, h6 / 6.0, 0.0)
    return np.stack([hue, sat, mx], axis=-1)


def window_mean_std(plane):
    h_px, w_px = plane.shape
    padded = np.zeros((h_px + 2, w_px + 2), np.float64)
    padded[1:-1, 1:-1] = plane
    valid = np.zeros((h_px + 2, w_px + 2), np.float64)
    valid[1:-1, 1:-1] = 1.0
    total = np.zeros((h_px, w_px), np.float64)
    count = np.zeros((h_px, w_px), np.float64)
    for dr in range(-1, 2):
        for dc in range(-1, 2):
            total = total + padded[1 + dr : 1 + dr + h_px, 1 + dc : 1 + dc + w_px]
            count = count + valid[1 + dr : 1 + dr + h_px, 1 + dc : 1 + dc + w_px]
    mean = total / count
    sumsq = np.zeros((h_px, w_px), np.float64)
    for dr in range(-1, 2):
        for dc in range(-1, 2):
            win = padded[1 + dr : 1 + dr + h_px, 1 + dc : 1 + dc + w_px]
            msk = valid[1 + dr : 1 + dr + h_px, 1 + dc : 1 + dc + w_px]
            sumsq = sumsq + ((win - mean) ** 2) * msk
    return mean, np.sqrt(sumsq / count)


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
    # Tree arrays are ignored: the numpy path is an exhaustive scan. Exact
    # squared distances come from per-pair differences (not the expanded
    # |q|^2 + |p|^2 - 2qp form, which can perturb ties).
    n, d = points.shape
    block = max(1, _SCAN_BUDGET // max(1, n * d))
    ids = np.arange(n, dtype=np.int64)
    for bs in range(lo, hi, block):
        be = min(hi, bs + block)
        diff = queries[bs:be, None, :] - points[None, :, :]
        d2 = np.einsum("qnd,qnd->qn", diff, diff)
        for qi in range(bs, be):
            row = d2[qi - bs]
            order = np.lexsort((ids, row))
            if exclude[qi] >= 0:
                order = order[order != exclude[qi]]
            out[qi, :] = order[:k]


def propagate_block(adjacency, degrees, cur):
    """Averaged neighbor rows for one CSR row block.

    scipy's CSR matmul accumulates each row sequentially in index order with
    unit data, which matches the numba kernel's accumulation exactly.
    ``degrees`` must be >= 1 everywhere; the caller owns degree-0 rows.
    """
    sums = adjacency @ cur
    return sums / degrees[:, None]
