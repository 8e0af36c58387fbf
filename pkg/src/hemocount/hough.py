"""White-cell localization via a fixed-radius circle Hough transform.

Every nucleus group proposes a rectangular search window. Edge pixels near
the window vote for candidate centers lying one cell radius away (with a
+-1 px annulus tolerance for edge-thinning jitter); a group whose best
candidate gathers too few votes is a fake region, not a white cell. Located
cells can then be wiped from the image so only red cells remain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import PointRC, Rect
from .validation import as_gray_image, as_mask

_VOTE_CHUNK = 4096


class DegenerateFillError(ValueError):
    """Cell discs cover the whole image; no background left to sample a fill value."""


@dataclass(frozen=True)
class HoughParams:
    radius: float = 60.0
    min_vote_fraction: float = 0.15

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"hough radius must be >= 1, got {self.radius}")
        if not 0.0 < self.min_vote_fraction <= 1.0:
            raise ValueError(f"min_vote_fraction must be in (0, 1], got {self.min_vote_fraction}")


@dataclass(frozen=True)
class WhiteCell:
    center: PointRC
    radius: float
    votes: int
    group_id: int


def _annulus_offsets(radius: float):
    reach = int(np.ceil(radius + 1.0))
    span = np.arange(-reach, reach + 1)
    dr, dc = np.meshgrid(span, span, indexing="ij")
    dist = np.hypot(dr, dc)
    ring = (dist >= radius - 1.0) & (dist <= radius + 1.0)
    return dr[ring], dc[ring]


def hough_circle_center(edges, window: Rect, params: HoughParams = HoughParams()):
    """Best circle-center candidate inside ``window``, or None for a fake region.

    Each edge pixel within radius+1 of the window votes for all centers in
    the window at distance radius +- 1 px from it. The argmax candidate is
    returned with its vote count when it reaches the acceptance floor
    ``min_vote_fraction * round(2*pi*radius)``; ties break in raster order.
    """
    edges = as_mask(edges)
    h, w = edges.shape
    if not window.inside(h, w):
        raise ValueError(f"search window {window} exceeds image {h}x{w}")

    reach = int(np.ceil(params.radius + 1.0))
    sub = Rect(
        max(window.row_min - reach, 0),
        min(window.row_max + reach, h - 1),
        max(window.col_min - reach, 0),
        min(window.col_max + reach, w - 1),
    )
    er, ec = np.nonzero(edges[sub.row_min : sub.row_max + 1, sub.col_min : sub.col_max + 1])
    if len(er) == 0:
        return None
    er = er + sub.row_min
    ec = ec + sub.col_min

    dr, dc = _annulus_offsets(params.radius)
    win_h, win_w = window.height, window.width
    votes = np.zeros(win_h * win_w, dtype=np.int64)
    for lo in range(0, len(er), _VOTE_CHUNK):
        rr = er[lo : lo + _VOTE_CHUNK, None] + dr[None, :]
        cc = ec[lo : lo + _VOTE_CHUNK, None] + dc[None, :]
        valid = (
            (rr >= window.row_min)
            & (rr <= window.row_max)
            & (cc >= window.col_min)
            & (cc <= window.col_max)
        )
        lin = (rr[valid] - window.row_min) * win_w + (cc[valid] - window.col_min)
        votes += np.bincount(lin, minlength=win_h * win_w)

    best = int(np.argmax(votes))
    best_votes = int(votes[best])
    floor = params.min_vote_fraction * round(2.0 * np.pi * params.radius)
    if best_votes <= 0 or best_votes < floor:
        return None
    center = PointRC(float(window.row_min + best // win_w), float(window.col_min + best % win_w))
    return center, best_votes


def detect_white_cells(nucleus_groups, edges, params: HoughParams = HoughParams()):
    """Validate every nucleus group with the circle Hough transform.

    Returns (accepted white cells, rejected fake-region group ids); together
    they account for every input group.
    """
    accepted, rejected = [], []
    for group in nucleus_groups:
        if group.search_window is None:
            raise ValueError(f"nucleus group {group.group_id} carries no search window")
        hit = hough_circle_center(edges, group.search_window, params)
        if hit is None:
            rejected.append(group.group_id)
        else:
            center, votes = hit
            accepted.append(WhiteCell(center=center, radius=float(params.radius), votes=votes, group_id=group.group_id))
    return accepted, rejected


def disc_mask(shape, cells) -> np.ndarray:
    """Union of the cells' discs (distance <= radius from each center)."""
    h, w = shape
    mask = np.zeros((h, w), dtype=bool)
    for cell in cells:
        r0 = max(int(np.floor(cell.center.row - cell.radius)), 0)
        r1 = min(int(np.ceil(cell.center.row + cell.radius)), h - 1)
        c0 = max(int(np.floor(cell.center.col - cell.radius)), 0)
        c1 = min(int(np.ceil(cell.center.col + cell.radius)), w - 1)
        if r0 > r1 or c0 > c1:
            continue
        rr = np.arange(r0, r1 + 1, dtype=np.float64)[:, None] - cell.center.row
        cc = np.arange(c0, c1 + 1, dtype=np.float64)[None, :] - cell.center.col
        mask[r0 : r1 + 1, c0 : c1 + 1] |= rr * rr + cc * cc <= cell.radius * cell.radius
    return mask


def cytoplasm_mask(cells, nucleus_mask) -> np.ndarray:
    """Disc pixels of accepted cells that were not recognized as nucleus."""
    nucleus_mask = as_mask(nucleus_mask)
    return disc_mask(nucleus_mask.shape, cells) & ~nucleus_mask


def remove_white_cells(img, cells) -> np.ndarray:
    """Replace accepted cell discs by the median intensity outside all discs.

    A median fill (rather than zero) avoids planting a strong artificial
    edge that would corrupt the red-cell correlation stage.
    """
    arr = as_gray_image(img)
    if not cells:
        return arr.copy()
    mask = disc_mask(arr.shape, cells)
    outside = ~mask
    if not outside.any():
        raise DegenerateFillError("cell discs cover the entire image")
    out = arr.copy()
    out[mask] = np.median(arr[outside])
    return out
