"""Nucleus extraction and grouping.

White-cell nuclei have much lower intensity than everything else in the
preprocessed smear, so a global Otsu threshold followed by dark-pixel
binarization isolates candidate nucleus material. Candidates are labeled
under 8-connectivity (excluding waste parts hugging the image margins),
reduced to bounding-box midpoints, and midpoints within a merge distance of
one another are fused into a single nucleus group, since one nucleus may
split into several thresholded parts. Each group finally yields a padded
rectangular search window for circle detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .raster import PointRC, Rect, quantize256
from .validation import as_gray_image, as_mask, check_level


@dataclass(frozen=True)
class Region:
    """One 8-connected foreground component."""

    label: int
    pixel_count: int
    bbox: Rect
    midpoint: PointRC


@dataclass
class NucleusGroup:
    """Regions whose midpoints chain together within the merge distance."""

    group_id: int
    member_labels: frozenset
    midpoints: list
    search_window: Rect | None = None


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller root wins, keeping representatives raster-ordered
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def otsu_level(hist) -> int:
    """Threshold maximizing between-class variance w0*w1*(mu0-mu1)^2.

    Class 0 holds bins <= t. Evaluated in exact integer arithmetic so ties
    are broken reproducibly by the smallest t; a single-occupied-bin
    histogram returns that bin's index.
    """
    hist = np.asarray(hist)
    if hist.shape != (256,):
        raise ValueError(f"expected a 256-bin histogram, got shape {hist.shape}")
    occupied = np.flatnonzero(hist)
    if len(occupied) == 0:
        raise ValueError("otsu_level: histogram is empty")
    if len(occupied) == 1:
        return int(occupied[0])

    counts = [int(c) for c in hist]
    total = sum(counts)
    total_mass = sum(k * c for k, c in enumerate(counts))
    best_t, best_num, best_den = 0, -1, 1
    w0 = s0 = 0
    for t in range(256):
        w0 += counts[t]
        s0 += t * counts[t]
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        # sigma_b^2(t) is proportional to (s0*w1 - s1*w0)^2 / (w0*w1)
        diff = s0 * w1 - (total_mass - s0) * w0
        num, den = diff * diff, w0 * w1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def binarize_dark(img, level: int) -> np.ndarray:
    """Foreground = dark pixels: round(v * 255) <= level."""
    arr = as_gray_image(img)
    return quantize256(arr) <= check_level(level)


def _row_runs(mask: np.ndarray):
    """Maximal horizontal foreground runs, in raster order.

    Returns (rows, starts, ends) with ends inclusive.
    """
    h, w = mask.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    diff = np.diff(padded, axis=1)
    rows, start_cols = np.nonzero(diff == 1)
    _, end_cols = np.nonzero(diff == -1)
    return rows, start_cols, end_cols - 1


def label_8conn(mask, margin_px: int = 0):
    """8-connected component labeling with margin exclusion.

    Components whose bounding box lies entirely within ``margin_px`` of one
    image border are discarded (waste at the margins); components merely
    touching a border but extending inward survive. Surviving components
    are renumbered 1..K in raster-scan order of their first pixel.

    Returns (label_map, regions).
    """
    mask = as_mask(mask)
    h, w = mask.shape
    margin_px = int(margin_px)
    if margin_px < 0 or margin_px >= min(h, w) / 2:
        raise ValueError(f"margin_px must be in [0, min(h, w)/2), got {margin_px}")

    rows, starts, ends = _row_runs(mask)
    n_runs = len(rows)
    label_map = np.zeros((h, w), dtype=np.int32)
    if n_runs == 0:
        return label_map, []

    # union runs of consecutive rows that overlap under 8-adjacency
    dsu = _DisjointSet(n_runs)
    row_first = np.searchsorted(rows, np.arange(h + 1))
    for r in range(1, h):
        i, i_end = row_first[r], row_first[r + 1]
        j, j_end = row_first[r - 1], row_first[r]
        while i < i_end and j < j_end:
            if starts[i] > ends[j] + 1:
                j += 1
            elif starts[j] > ends[i] + 1:
                i += 1
            else:
                dsu.union(i, j)
                if ends[i] <= ends[j]:
                    i += 1
                else:
                    j += 1

    roots = np.fromiter((dsu.find(k) for k in range(n_runs)), dtype=np.int64, count=n_runs)
    uniq, inverse = np.unique(roots, return_inverse=True)
    # roots are minimal run indices, so sorted root order == raster order
    n_comp = len(uniq)
    lengths = (ends - starts + 1).astype(np.int64)
    pixel_counts = np.bincount(inverse, weights=lengths).astype(np.int64)
    row_min = np.full(n_comp, h, dtype=np.int64)
    row_max = np.full(n_comp, -1, dtype=np.int64)
    col_min = np.full(n_comp, w, dtype=np.int64)
    col_max = np.full(n_comp, -1, dtype=np.int64)
    np.minimum.at(row_min, inverse, rows)
    np.maximum.at(row_max, inverse, rows)
    np.minimum.at(col_min, inverse, starts)
    np.maximum.at(col_max, inverse, ends)

    keep = ~(
        (row_max < margin_px)
        | (row_min >= h - margin_px)
        | (col_max < margin_px)
        | (col_min >= w - margin_px)
    )
    new_label = np.zeros(n_comp, dtype=np.int32)
    new_label[keep] = np.arange(1, int(keep.sum()) + 1, dtype=np.int32)
    run_labels = new_label[inverse]
    for k in range(n_runs):
        if run_labels[k]:
            label_map[rows[k], starts[k] : ends[k] + 1] = run_labels[k]

    regions = []
    for c in np.flatnonzero(keep):
        bbox = Rect(int(row_min[c]), int(row_max[c]), int(col_min[c]), int(col_max[c]))
        midpoint = PointRC((bbox.row_min + bbox.row_max) / 2.0, (bbox.col_min + bbox.col_max) / 2.0)
        regions.append(Region(int(new_label[c]), int(pixel_counts[c]), bbox, midpoint))
    return label_map, regions


def merge_nuclei(regions, merge_dist: float = 60.0):
    """Fuse regions whose midpoints chain within ``merge_dist`` (Euclidean).

    Connected components of the proximity graph become nucleus groups; the
    group count is the candidate white-cell count before circle validation.
    """
    if merge_dist <= 0:
        raise ValueError(f"merge_dist must be > 0, got {merge_dist}")
    n = len(regions)
    if n == 0:
        return []
    pts = np.array([(r.midpoint.row, r.midpoint.col) for r in regions], dtype=np.float64)
    dsu = _DisjointSet(n)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    for i, j in zip(*np.nonzero(d2 <= merge_dist * merge_dist)):
        if i < j:
            dsu.union(int(i), int(j))
    roots = [dsu.find(i) for i in range(n)]
    groups = []
    for gid, root in enumerate(sorted(set(roots)), start=1):
        members = [i for i in range(n) if roots[i] == root]
        groups.append(
            NucleusGroup(
                group_id=gid,
                member_labels=frozenset(regions[i].label for i in members),
                midpoints=[regions[i].midpoint for i in members],
            )
        )
    return groups


def search_window(group: NucleusGroup, pad: int, bounds: Rect) -> Rect:
    """Midpoint bounding box expanded by ``pad`` on every side, clipped to bounds."""
    if not group.midpoints:
        raise ValueError("search_window: group has no midpoints")
    rows = [p.row for p in group.midpoints]
    cols = [p.col for p in group.midpoints]
    window = Rect(
        math.floor(min(rows)) - pad,
        math.ceil(max(rows)) + pad,
        math.floor(min(cols)) - pad,
        math.ceil(max(cols)) + pad,
    )
    return window.clipped(bounds)
