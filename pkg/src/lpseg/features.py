"""Per-pixel feature extraction.

Each pixel yields 23 features: its grid position, RGB and HSV channels,
excess color indices, and the mean / population standard deviation of each
color and HSV channel over the pixel's 8-connected window (shrunk at image
borders, no wraparound). Columns are z-score normalized over the included
pixels and then scaled by a 23-entry weight vector.
"""

from __future__ import annotations

import numpy as np

from . import kernels

FEATURE_NAMES = (
    "row",
    "col",
    "r",
    "g",
    "b",
    "h",
    "s",
    "v",
    "exr",
    "exg",
    "exb",
    "mr",
    "mg",
    "mb",
    "sdr",
    "sdg",
    "sdb",
    "mh",
    "ms",
    "mv",
    "sdh",
    "sds",
    "sdv",
)

N_FEATURES = len(FEATURE_NAMES)


def validate_image(image: np.ndarray) -> np.ndarray:
    """Check an RGB image array: (h, w, 3) float in [0, 1]."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) RGB array, got shape {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ValueError("image must have at least one pixel")
    if not np.isfinite(image).all():
        raise ValueError("image contains non-finite values")
    if image.min() < 0.0 or image.max() > 1.0:
        raise ValueError("channel values must lie in [0, 1]")
    return image


def validate_weights(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (N_FEATURES,):
        raise ValueError(f"weight vector must have {N_FEATURES} entries, got shape {lam.shape}")
    if not np.isfinite(lam).all() or lam.min() < 0.0:
        raise ValueError("weights must be finite and >= 0")
    return lam


def rgb_to_hsv(rgb) -> tuple[float, float, float]:
    """Hexcone RGB -> HSV for one pixel; H scaled to [0, 1).

    Achromatic inputs (max == min) give H = 0 and S = 0; V is the channel
    maximum.
    """
    red, grn, blu = (float(v) for v in rgb)
    mx = max(red, grn, blu)
    mn = min(red, grn, blu)
    delta = mx - mn
    sat = delta / mx if mx > 0.0 else 0.0
    if delta > 0.0:
        if mx == red:
            h6 = ((grn - blu) / delta) % 6.0
        elif mx == grn:
            h6 = (blu - red) / delta + 2.0
        else:
            h6 = (red - grn) / delta + 4.0
        if h6 >= 6.0:
            h6 -= 6.0
        hue = h6 / 6.0
    else:
        hue = 0.0
    return hue, sat, mx


def excess_components(rgb) -> tuple[float, float, float]:
    """Excess color indices: each channel doubled minus the other two."""
    red, grn, blu = (float(v) for v in rgb)
    return 2 * red - grn - blu, 2 * grn - red - blu, 2 * blu - red - grn


def neighborhood_stats(plane: np.ndarray, row: int, col: int) -> tuple[float, float]:
    """Mean and population std over a pixel plus its 8-connected neighbors.

    Border windows shrink (4, 6, or 9 samples); reference implementation
    used by tests, the batch path lives in the kernels.
    """
    plane = np.asarray(plane, dtype=np.float64)
    h_px, w_px = plane.shape
    if not (0 <= row < h_px and 0 <= col < w_px):
        raise ValueError(f"pixel ({row}, {col}) outside {h_px}x{w_px} plane")
    s = 0.0
    n = 0.0
    for dr in range(-1, 2):
        for dc in range(-1, 2):
            rr, cc = row + dr, col + dc
            if 0 <= rr < h_px and 0 <= cc < w_px:
                s += plane[rr, cc]
                n += 1.0
    m = s / n
    ss = 0.0
    for dr in range(-1, 2):
        for dc in range(-1, 2):
            rr, cc = row + dr, col + dc
            if 0 <= rr < h_px and 0 <= cc < w_px:
                d = plane[rr, cc] - m
                ss += d * d
    return m, float(np.sqrt(ss / n))


def raw_features(image: np.ndarray) -> np.ndarray:
    """Unnormalized (n_pixels, 23) feature matrix in row-major pixel order."""
    image = validate_image(image)
    h_px, w_px = image.shape[:2]
    red = image[..., 0]
    grn = image[..., 1]
    blu = image[..., 2]
    hsv = kernels.hsv_planes(np.ascontiguousarray(image))
    hue, sat, val = hsv[..., 0], hsv[..., 1], hsv[..., 2]

    rows, cols = np.meshgrid(
        np.arange(h_px, dtype=np.float64),
        np.arange(w_px, dtype=np.float64),
        indexing="ij",
    )
    exr = 2 * red - grn - blu
    exg = 2 * grn - red - blu
    exb = 2 * blu - red - grn

    planes = [rows, cols, red, grn, blu, hue, sat, val, exr, exg, exb]
    means, stds = [], []
    for plane in (red, grn, blu, hue, sat, val):
        m, s = kernels.window_mean_std(np.ascontiguousarray(plane))
        means.append(m)
        stds.append(s)
    planes.extend(means[:3])
    planes.extend(stds[:3])
    planes.extend(means[3:])
    planes.extend(stds[3:])
    return np.stack([p.ravel() for p in planes], axis=1)


def extract_features(
    image: np.ndarray,
    lam,
    include: np.ndarray | None = None,
) -> np.ndarray:
    """Normalized, weighted feature matrix for the included pixels.

    ``include`` is an optional (h, w) boolean mask of participating pixels;
    normalization statistics are computed over those pixels only. Columns
    that are constant over the included pixels become all-zero instead of
    dividing by a zero standard deviation.
    """
    lam = validate_weights(lam)
    raw = raw_features(image)
    if include is not None:
        include = np.asarray(include, dtype=bool)
        if include.shape != image.shape[:2]:
            raise ValueError("mask shape does not match image")
        raw = raw[include.ravel()]
        if raw.shape[0] == 0:
            raise ValueError("mask excludes every pixel")
    constant = raw.max(axis=0) == raw.min(axis=0)
    centered = raw - raw.mean(axis=0)
    sigma = np.sqrt((centered**2).mean(axis=0))
    sigma[constant] = 1.0
    z = centered / sigma
    z[:, constant] = 0.0
    return z * lam


def load_lambda_file(path) -> np.ndarray:
    """Read a 23-line text file, one weight per line."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) != N_FEATURES:
        raise ValueError(f"{path}: expected {N_FEATURES} weight lines, found {len(lines)}")
    try:
        values = [float(ln) for ln in lines]
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return validate_weights(values)
