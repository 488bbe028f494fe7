"""Seed maps: where labels come from.

A seed map assigns every pixel one role: ignored background (excluded from
the graph entirely), labeled with a class in 1..C, or unlabeled (to be
estimated). Trimaps encode the binary problem as gray levels {0: ignored
background, 64: labeled background, 128: unlabeled, 255: labeled
foreground}; scribbles carry arbitrary class counts. Ground-truth masks
decode to foreground / background / uncertain, with uncertain pixels
excluded from scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

IGNORED = -1
UNLABELED = 0
FOREGROUND = 1
BACKGROUND = 2

TRIMAP_IGNORED = 0
TRIMAP_BACKGROUND = 64
TRIMAP_UNLABELED = 128
TRIMAP_FOREGROUND = 255

GT_UNCERTAIN = 0


@dataclass
class SeedMap:
    codes: np.ndarray  # int32 (h, w): -1 ignored, 0 unlabeled, >= 1 class id
    class_count: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.codes.shape

    def participating(self) -> np.ndarray:
        return self.codes != IGNORED

    def unlabeled_count(self) -> int:
        return int((self.codes == UNLABELED).sum())

    def classes_present(self) -> list[int]:
        return sorted(int(c) for c in np.unique(self.codes) if c > 0)


def decode_trimap(mask: np.ndarray) -> SeedMap:
    """Decode an 8-bit trimap into a two-class seed map.

    Any value outside {0, 64, 128, 255} raises, naming the value and the
    first pixel carrying it.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"expected single-channel mask, got shape {mask.shape}")
    known = np.isin(mask, (TRIMAP_IGNORED, TRIMAP_BACKGROUND, TRIMAP_UNLABELED, TRIMAP_FOREGROUND))
    if not known.all():
        r, c = np.argwhere(~known)[0]
        raise ValueError(
            f"invalid trimap value {int(mask[r, c])} at pixel (row={r}, col={c}); "
            "expected one of 0, 64, 128, 255"
        )
    codes = np.empty(mask.shape, dtype=np.int32)
    codes[mask == TRIMAP_IGNORED] = IGNORED
    codes[mask == TRIMAP_BACKGROUND] = BACKGROUND
    codes[mask == TRIMAP_UNLABELED] = UNLABELED
    codes[mask == TRIMAP_FOREGROUND] = FOREGROUND
    return SeedMap(codes=codes, class_count=2)


def decode_scribbles(
    strokes,
    height: int,
    width: int,
    class_count: int | None = None,
) -> tuple[SeedMap, int]:
    """Rasterized stroke list -> seed map (no ignored pixels).

    ``strokes`` is an iterable of (class_id, [(row, col), ...]). When two
    strokes of different classes hit one pixel the later stroke wins; the
    number of such conflicts is returned alongside the map.
    """
    codes = np.zeros((height, width), dtype=np.int32)
    max_class = 0
    conflicts = 0
    for class_id, points in strokes:
        class_id = int(class_id)
        if class_id < 1:
            raise ValueError(f"class id {class_id} must be >= 1")
        if class_count is not None and class_id > class_count:
            raise ValueError(f"class id {class_id} exceeds class count {class_count}")
        max_class = max(max_class, class_id)
        for row, col in points:
            if not (0 <= row < height and 0 <= col < width):
                raise ValueError(
                    f"stroke point (row={row}, col={col}) outside {height}x{width} image"
                )
            prev = codes[row, col]
            if prev != 0 and prev != class_id:
                conflicts += 1
            codes[row, col] = class_id
    return SeedMap(codes=codes, class_count=class_count or max(max_class, 1)), conflicts


def decode_ground_truth(mask: np.ndarray, fg_min: int = 224, bg_max: int = 31) -> np.ndarray:
    """8-bit ground truth -> codes: 1 foreground, 2 background, 0 uncertain.

    GrabCut-style masks are near-0 / near-255 with a gray uncertainty
    contour between; the thresholds bound the certain bands.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"expected single-channel mask, got shape {mask.shape}")
    codes = np.full(mask.shape, GT_UNCERTAIN, dtype=np.int32)
    codes[mask >= fg_min] = FOREGROUND
    codes[mask <= bg_max] = BACKGROUND
    return codes
