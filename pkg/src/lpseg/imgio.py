"""Image decode/encode (PNG, BMP, and whatever else Pillow handles)."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image


def load_image(path) -> np.ndarray:
    """8-bit RGB raster -> (h, w, 3) float64 in [0, 1]."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def decode_image_bytes(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def load_gray(path) -> np.ndarray:
    """8-bit single-channel raster -> (h, w) uint8."""
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


def save_mask(mask: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(mask, dtype=np.uint8), mode="L").save(path)


def encode_mask_png(mask: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(mask, dtype=np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()
