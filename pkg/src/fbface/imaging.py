"""Raster helpers shared by the polar sampler and the registration warp.

Images are 2-D float arrays indexed ``[row, col]`` = ``[y, x]``; pixel
centres sit on integer coordinates, so an image of width ``W`` covers
``x`` in ``[-0.5, W - 0.5]``.
"""

from __future__ import annotations

import numpy as np


def as_raster(image) -> np.ndarray:
    arr = np.asarray(image, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D raster, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("raster contains non-finite intensities")
    return arr


def bilinear(image: np.ndarray, x, y) -> np.ndarray:
    """Bilinear interpolation at fractional ``(x, y)``; coordinates clamp to the edge pixels."""
    h, w = image.shape
    x = np.clip(np.asarray(x, dtype=float), 0.0, w - 1.0)
    y = np.clip(np.asarray(y, dtype=float), 0.0, h - 1.0)
    x0 = np.minimum(np.floor(x).astype(int), max(w - 2, 0))
    y0 = np.minimum(np.floor(y).astype(int), max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    top = image[y0, x0] * (1.0 - fx) + image[y0, x1] * fx
    bottom = image[y1, x0] * (1.0 - fx) + image[y1, x1] * fx
    return top * (1.0 - fy) + bottom * fy
