"""Red-cell location and counting by template correlation.

The operator picks a handful of red cells as templates; each is slid over
the processed image with zero-mean normalized cross-correlation, the score
maps are combined as a weighted sum, and every resulting peak area is
shrunk (threshold, local-maximum plateau, relabel, mean position) to a
single representative pixel per red cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import PointRC, Rect
from .segmentation import label_8conn
from .validation import as_gray_image

_PLATEAU_TOL = 1e-9
_VAR_EPS = 1e-12


class DegenerateTemplateError(ValueError):
    """Template patch has zero variance; NCC is undefined for it."""


@dataclass(frozen=True)
class Template:
    id: str
    rect: Rect
    weight: float
    patch: np.ndarray

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError(f"template weight must be > 0, got {self.weight}")


@dataclass(frozen=True)
class PeakParams:
    threshold_quantile: float = 0.95
    min_peak_separation: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.threshold_quantile < 1.0:
            raise ValueError(f"threshold_quantile must be in (0, 1), got {self.threshold_quantile}")
        if self.min_peak_separation < 1:
            raise ValueError(f"min_peak_separation must be >= 1, got {self.min_peak_separation}")


def extract_templates(img, rects, weights, ids=None) -> list:
    """Copy template patches out of ``img``; every patch must have variance."""
    arr = as_gray_image(img)
    if len(rects) != len(weights):
        raise ValueError(f"{len(rects)} rects vs {len(weights)} weights")
    if ids is None:
        ids = [f"t{i + 1}" for i in range(len(rects))]
    elif len(ids) != len(rects):
        raise ValueError(f"{len(rects)} rects vs {len(ids)} ids")
    templates = []
    for tid, rect, weight in zip(ids, rects, weights):
        if not rect.inside(*arr.shape):
            raise ValueError(f"template rect {rect} exceeds image {arr.shape}")
        patch = arr[rect.row_min : rect.row_max + 1, rect.col_min : rect.col_max + 1].copy()
        if float(np.var(patch)) == 0.0:
            raise DegenerateTemplateError(f"template {tid!r} at {rect} is constant")
        templates.append(Template(id=str(tid), rect=rect, weight=float(weight), patch=patch))
    return templates


def _integral(arr: np.ndarray) -> np.ndarray:
    ii = np.zeros((arr.shape[0] + 1, arr.shape[1] + 1), dtype=np.float64)
    np.cumsum(np.cumsum(arr, axis=0), axis=1, out=ii[1:, 1:])
    return ii


def _window_sums(ii: np.ndarray, r0, r1, c0, c1) -> np.ndarray:
    return (
        ii[np.ix_(r1 + 1, c1 + 1)]
        - ii[np.ix_(r0, c1 + 1)]
        - ii[np.ix_(r1 + 1, c0)]
        + ii[np.ix_(r0, c0)]
    )


def ncc_map(img, template: Template) -> np.ndarray:
    """Zero-mean normalized cross-correlation map, same size as ``img``.

    The score at (r, c) correlates the template anchored by its center
    pixel at (r, c) with the overlapping image window; border positions are
    computed on the valid overlap only (both means taken over the overlap),
    so every score stays in [-1, 1]. Windows with zero intensity variance
    score 0.
    """
    image = as_gray_image(img)
    patch = template.patch
    hh, ww = image.shape
    th, tw = patch.shape
    if th >= hh or tw >= ww:
        raise ValueError(f"template {patch.shape} must be smaller than image {image.shape}")

    ar, ac = th // 2, tw // 2
    # cross sums via FFT convolution with the flipped template
    fh, fw = hh + th - 1, ww + tw - 1
    conv = np.fft.irfft2(
        np.fft.rfft2(image, (fh, fw)) * np.fft.rfft2(patch[::-1, ::-1], (fh, fw)), (fh, fw)
    )
    cross = conv[th - 1 - ar : th - 1 - ar + hh, tw - 1 - ac : tw - 1 - ac + ww]

    orow = np.arange(hh) - ar
    ocol = np.arange(ww) - ac
    ir0 = np.maximum(orow, 0)
    ir1 = np.minimum(orow + th - 1, hh - 1)
    ic0 = np.maximum(ocol, 0)
    ic1 = np.minimum(ocol + tw - 1, ww - 1)
    n = np.outer(ir1 - ir0 + 1, ic1 - ic0 + 1).astype(np.float64)

    ii1, ii2 = _integral(image), _integral(image * image)
    s1 = _window_sums(ii1, ir0, ir1, ic0, ic1)
    s2 = _window_sums(ii2, ir0, ir1, ic0, ic1)
    it1, it2 = _integral(patch), _integral(patch * patch)
    tr0, tr1 = ir0 - orow, ir1 - orow
    tc0, tc1 = ic0 - ocol, ic1 - ocol
    t1 = _window_sums(it1, tr0, tr1, tc0, tc1)
    t2 = _window_sums(it2, tr0, tr1, tc0, tc1)

    num = cross - s1 * t1 / n
    var_img = np.maximum(s2 - s1 * s1 / n, 0.0)
    var_tpl = np.maximum(t2 - t1 * t1 / n, 0.0)
    flat = (var_img <= _VAR_EPS * n) | (var_tpl <= _VAR_EPS * n)
    den = np.sqrt(var_img * var_tpl)
    return np.where(flat, 0.0, num / np.where(flat, 1.0, den))


def combine_maps(maps, weights) -> np.ndarray:
    """Pixelwise weighted sum of correlation maps."""
    if len(maps) == 0:
        raise ValueError("combine_maps: no maps")
    if len(maps) != len(weights):
        raise ValueError(f"{len(maps)} maps vs {len(weights)} weights")
    shape = maps[0].shape
    out = np.zeros(shape, dtype=np.float64)
    for m, w in zip(maps, weights):
        if m.shape != shape:
            raise ValueError(f"map shape {m.shape} differs from {shape}")
        out += float(w) * m
    return out


def peak_regions(corr_map, params: PeakParams):
    """Shrink peak areas of a correlation map to single representative points.

    Pixels at or above the threshold quantile survive; each 8-connected
    survivor region keeps only its regional-maximum plateau; plateaus are
    relabeled and each yields one peak at the arithmetic mean position of
    its pixels. Peaks closer than the minimum separation are merged into
    the higher-scoring one (positions averaged on exact score ties). A
    plateau whose thresholded region spans the entire map is degenerate and
    yields nothing.
    """
    arr = as_gray_image(corr_map)
    thr = float(np.quantile(arr, params.threshold_quantile))
    keep = arr >= thr
    labels, regions = label_8conn(keep, margin_px=0)
    if not regions:
        return []
    n_labels = len(regions) + 1
    region_max = np.full(n_labels, -np.inf)
    np.maximum.at(region_max, labels.ravel(), arr.ravel())
    plateau = keep & (arr >= region_max[labels] - _PLATEAU_TOL)

    sub_labels, sub_regions = label_8conn(plateau, margin_px=0)
    counts = np.bincount(sub_labels.ravel(), minlength=len(sub_regions) + 1).astype(np.float64)
    rows_idx, cols_idx = np.indices(arr.shape)
    row_sum = np.bincount(sub_labels.ravel(), weights=rows_idx.ravel(), minlength=len(sub_regions) + 1)
    col_sum = np.bincount(sub_labels.ravel(), weights=cols_idx.ravel(), minlength=len(sub_regions) + 1)

    candidates = []
    for sub in sub_regions:
        if sub.pixel_count == arr.size:
            continue  # plateau spans the whole map: degenerate, e.g. a constant map
        parent = labels[sub.bbox.row_min, sub.bbox.col_min]
        k = sub.label
        center = PointRC(row_sum[k] / counts[k], col_sum[k] / counts[k])
        candidates.append((center, float(region_max[parent])))

    candidates.sort(key=lambda p: (-p[1], p[0].row, p[0].col))
    kept: list[list] = []
    for center, score in candidates:
        nearest, nearest_d = None, None
        for entry in kept:
            d = center.distance_to(entry[0])
            if d < params.min_peak_separation and (nearest_d is None or d < nearest_d):
                nearest, nearest_d = entry, d
        if nearest is None:
            kept.append([center, score])
        elif nearest[1] == score:
            nearest[0] = PointRC((nearest[0].row + center.row) / 2.0, (nearest[0].col + center.col) / 2.0)
    return [(c, s) for c, s in kept]


def count_red_cells(img, templates, peak_params: PeakParams):
    """Full red-cell count: per-template NCC, weighted combination, peaks.

    Returns (count, centers).
    """
    if not templates:
        raise ValueError("count_red_cells: no templates")
    maps = [ncc_map(img, t) for t in templates]
    combined = combine_maps(maps, [t.weight for t in templates])
    peaks = peak_regions(combined, peak_params)
    return len(peaks), [c for c, _ in peaks]


def _unmatched_centers(detected, truth, match_radius: float = 10.0) -> int:
    pairs = []
    for i, d in enumerate(detected):
        for j, t in enumerate(truth):
            dist = d.distance_to(t)
            if dist <= match_radius:
                pairs.append((dist, i, j))
    pairs.sort()
    used_d, used_t = set(), set()
    for _, i, j in pairs:
        if i not in used_d and j not in used_t:
            used_d.add(i)
            used_t.add(j)
    return (len(detected) - len(used_d)) + (len(truth) - len(used_t))


def tune_weights(maps, truth_centers, grid, peak_params: PeakParams):
    """Grid-search combination weights against known red-cell centers.

    Minimizes |detected - truth| count error, then unmatched centers at a
    10 px matching radius, then grid order.
    """
    if len(grid) == 0:
        raise ValueError("tune_weights: empty grid")
    best, best_key = None, None
    for idx, weights in enumerate(grid):
        combined = combine_maps(maps, weights)
        peaks = peak_regions(combined, peak_params)
        centers = [c for c, _ in peaks]
        key = (abs(len(peaks) - len(truth_centers)), _unmatched_centers(centers, truth_centers), idx)
        if best_key is None or key < best_key:
            best, best_key = weights, key
    return best
