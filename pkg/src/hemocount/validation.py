"""Input validation helpers shared by every stage.

All pipeline operations work on plain numpy arrays:

* gray image  -- 2-D float64 array, intensities in [0, 1]
* binary mask -- 2-D bool array
* label map   -- 2-D integer array, 0 = background
* rgb image   -- (H, W, 3) uint8 array
"""

from __future__ import annotations

import numpy as np


def as_gray_image(img, name: str = "img") -> np.ndarray:
    """Coerce to a 2-D float64 array and verify it is a usable gray image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one pixel, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_mask(mask, name: str = "mask") -> np.ndarray:
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        arr = arr.astype(bool)
    return arr


def as_rgb_image(img, name: str = "img") -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"{name} must be uint8, got {arr.dtype}")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "arrays") -> None:
    if a.shape[:2] != b.shape[:2]:
        raise ValueError(f"{what} must share dimensions: {a.shape[:2]} vs {b.shape[:2]}")


def check_level(level: int) -> int:
    level = int(level)
    if not 0 <= level <= 255:
        raise ValueError(f"gray level must be in 0..255, got {level}")
    return level
