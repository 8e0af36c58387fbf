"""Canny edge extraction.

Four stages: Gaussian smoothing, Sobel gradients, non-maximum suppression
quantized to four directions, and hysteresis. Thresholds adapt to the image:
the high threshold is a quantile of the nonzero gradient magnitudes and the
low threshold a fixed fraction of it, so the detector behaves consistently
across illumination levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .segmentation import label_8conn
from .validation import as_gray_image

_GRAD_EPS = 1e-12


@dataclass(frozen=True)
class CannyParams:
    gauss_sigma: float = 1.4
    high_quantile: float = 0.90
    low_ratio: float = 0.4

    def __post_init__(self):
        if self.gauss_sigma <= 0:
            raise ValueError(f"gauss_sigma must be > 0, got {self.gauss_sigma}")
        if not 0.0 < self.high_quantile < 1.0:
            raise ValueError(f"high_quantile must be in (0, 1), got {self.high_quantile}")
        if not 0.0 < self.low_ratio < 1.0:
            raise ValueError(f"low_ratio must be in (0, 1), got {self.low_ratio}")


def _convolve_axis(img: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(img, pad, mode="reflect")
    out = np.zeros_like(img)
    h, w = img.shape
    for k, weight in enumerate(kernel):
        if axis == 0:
            out += weight * padded[k : k + h, :]
        else:
            out += weight * padded[:, k : k + w]
    return out


def gaussian_smooth(img: np.ndarray, sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(3.0 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    kernel /= kernel.sum()
    return _convolve_axis(_convolve_axis(img, kernel, 0), kernel, 1)


def sobel_gradients(img: np.ndarray):
    """Returns (gx, gy) = d/dcol, d/drow via the separable 3x3 Sobel kernels."""
    smooth = np.array([1.0, 2.0, 1.0])
    deriv = np.array([1.0, 0.0, -1.0])  # central difference, ahead minus behind
    gx = _convolve_axis(_convolve_axis(img, smooth, 0), -deriv, 1)
    gy = _convolve_axis(_convolve_axis(img, smooth, 1), -deriv, 0)
    return gx, gy


def _shifted(arr: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """arr shifted so result[r, c] = arr[r + dr, c + dc], zero outside."""
    h, w = arr.shape
    out = np.zeros_like(arr)
    rs = slice(max(dr, 0), h + min(dr, 0))
    cs = slice(max(dc, 0), w + min(dc, 0))
    rd = slice(max(-dr, 0), h + min(-dr, 0))
    cd = slice(max(-dc, 0), w + min(-dc, 0))
    out[rd, cd] = arr[rs, cs]
    return out


def _non_maximum_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    sector = np.floor((angle + np.pi / 8) / (np.pi / 4)).astype(np.int8) % 4
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (dr, dc) in offsets.items():
        ahead = _shifted(mag, dr, dc)
        behind = _shifted(mag, -dr, -dc)
        # strict on one side so a 2-px plateau thins to a single pixel
        keep |= (sector == s) & (mag > ahead) & (mag >= behind)
    return keep & (mag > _GRAD_EPS)


def canny(img, params: CannyParams = CannyParams()) -> np.ndarray:
    """Edge mask of ``img``. A constant image yields an empty mask."""
    arr = as_gray_image(img)
    smoothed = gaussian_smooth(arr, params.gauss_sigma)
    gx, gy = sobel_gradients(smoothed)
    mag = np.hypot(gx, gy)

    nonzero = mag[mag > _GRAD_EPS]
    if nonzero.size == 0:
        return np.zeros(arr.shape, dtype=bool)
    high = float(np.quantile(nonzero, params.high_quantile))
    low = params.low_ratio * high

    thinned = _non_maximum_suppression(mag, gx, gy)
    weak = thinned & (mag >= low)
    strong = thinned & (mag >= high)
    if not strong.any():
        return np.zeros(arr.shape, dtype=bool)

    labels, _ = label_8conn(weak, margin_px=0)
    kept = np.unique(labels[strong])
    kept = kept[kept > 0]
    return np.isin(labels, kept)
