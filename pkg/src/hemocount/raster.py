"""Raster primitives: rectangles, points, clamping and the 256-bin histogram.

Intensities are kept as real values in [0, 1]; quantization to 8 bits happens
only at file I/O and at the histogram boundary. Coordinates are (row, col)
with the origin at the top-left corner, everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_gray_image


@dataclass(frozen=True)
class Rect:
    """Inclusive pixel-index rectangle."""

    row_min: int
    row_max: int
    col_min: int
    col_max: int

    def __post_init__(self):
        if self.row_min > self.row_max or self.col_min > self.col_max:
            raise ValueError(f"degenerate rect: {self}")

    @property
    def height(self) -> int:
        return self.row_max - self.row_min + 1

    @property
    def width(self) -> int:
        return self.col_max - self.col_min + 1

    def clipped(self, bounds: "Rect") -> "Rect":
        return Rect(
            max(self.row_min, bounds.row_min),
            min(self.row_max, bounds.row_max),
            max(self.col_min, bounds.col_min),
            min(self.col_max, bounds.col_max),
        )

    def contains(self, row: float, col: float) -> bool:
        return self.row_min <= row <= self.row_max and self.col_min <= col <= self.col_max

    def inside(self, height: int, width: int) -> bool:
        return 0 <= self.row_min and self.row_max < height and 0 <= self.col_min and self.col_max < width


@dataclass(frozen=True)
class PointRC:
    """Real-valued (row, col) pixel coordinate."""

    row: float
    col: float

    def distance_to(self, other: "PointRC") -> float:
        return float(np.hypot(self.row - other.row, self.col - other.col))


def image_bounds(img: np.ndarray) -> Rect:
    return Rect(0, img.shape[0] - 1, 0, img.shape[1] - 1)


def clamp01(img) -> np.ndarray:
    """Clamp every intensity into [0, 1]; dimensions are preserved."""
    arr = as_gray_image(img)
    return np.clip(arr, 0.0, 1.0)


def quantize256(img) -> np.ndarray:
    """Map [0, 1] intensities to integer levels 0..255 (round-half-even)."""
    arr = as_gray_image(img)
    return np.rint(arr * 255.0).astype(np.int64)


def histogram256(img) -> np.ndarray:
    """256-bin histogram; bin k counts pixels with round(v * 255) == k."""
    levels = quantize256(img)
    if levels.min() < 0 or levels.max() > 255:
        raise ValueError("histogram256 expects intensities in [0, 1]")
    return np.bincount(levels.ravel(), minlength=256)
