"""Synthetic blood-smear generator with known ground truth.

Scenes emulate the artifacts the pipeline is built to survive: low contrast
(deviations from mid-gray scaled down) and a single-frequency sinusoidal
line pattern across the columns. Red cells are flat discs slightly darker
than the background with a soft 2 px rim; white cells are larger cytoplasm
discs holding a much darker multi-part nucleus; optional smudges are
elongated dark blobs with no circular boundary, which the Hough stage must
reject as fake regions.

Placement is rejection-sampled from a seeded generator, so a spec with the
same seed always produces the identical image and truth. When overlap is
disallowed, cells additionally keep enough clearance that each white cell's
search window is unambiguous: no other blob's (or blob chain's) padded
window may contain a white-cell center.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .edges import gaussian_smooth
from .raster import PointRC, clamp01
from .segmentation import _DisjointSet

_MAX_ATTEMPTS = 20000
_MERGE_SLACK = 62.0  # conservative stand-in for the 60 px midpoint merge
_WINDOW_SLACK = 66
_OPTICAL_BLUR_SIGMA = 1.8


class PackingError(ValueError):
    """Cells cannot be placed without overlap under the requested spec."""


@dataclass(frozen=True)
class SynthSpec:
    width: int = 512
    height: int = 512
    n_red: int = 46
    red_radius: float = 16.0
    n_white: int = 2
    white_radius: float = 60.0
    n_smudges: int = 0
    overlap_allowed: bool = False
    noise_amplitude: float = 0.1
    noise_frequency: float = 0.45
    contrast_scale: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("canvas must be at least 1x1")
        if min(self.n_red, self.n_white, self.n_smudges) < 0:
            raise ValueError("cell counts must be >= 0")
        if self.red_radius < 1 or self.white_radius < 1:
            raise ValueError("cell radii must be >= 1")
        if not 0.0 < self.contrast_scale <= 1.0:
            raise ValueError(f"contrast_scale must be in (0, 1], got {self.contrast_scale}")
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be >= 0")


@dataclass
class SynthTruth:
    white_centers: list = field(default_factory=list)
    red_centers: list = field(default_factory=list)
    smudge_centers: list = field(default_factory=list)
    white_radius: float = 60.0
    red_radius: float = 20.0

    @property
    def white_count(self) -> int:
        return len(self.white_centers)

    @property
    def red_count(self) -> int:
        return len(self.red_centers)

    def to_dict(self) -> dict:
        return {
            "white_count": self.white_count,
            "red_count": self.red_count,
            "white_centers": [{"row": p.row, "col": p.col} for p in self.white_centers],
            "red_centers": [{"row": p.row, "col": p.col} for p in self.red_centers],
            "smudge_centers": [{"row": p.row, "col": p.col} for p in self.smudge_centers],
            "white_radius": self.white_radius,
            "red_radius": self.red_radius,
        }


def _paint_disc(canvas, center, radius, value, edge=1.6):
    h, w = canvas.shape
    r0 = max(int(np.floor(center[0] - radius - edge)), 0)
    r1 = min(int(np.ceil(center[0] + radius + edge)), h - 1)
    c0 = max(int(np.floor(center[1] - radius - edge)), 0)
    c1 = min(int(np.ceil(center[1] + radius + edge)), w - 1)
    if r0 > r1 or c0 > c1:
        return
    rr = np.arange(r0, r1 + 1, dtype=np.float64)[:, None] - center[0]
    cc = np.arange(c0, c1 + 1, dtype=np.float64)[None, :] - center[1]
    dist = np.hypot(rr, cc)
    alpha = np.clip((radius + edge / 2.0 - dist) / edge, 0.0, 1.0)
    sub = canvas[r0 : r1 + 1, c0 : c1 + 1]
    sub += alpha * (value - sub)


def _paint_capsule(canvas, a, b, half_width, value, edge=1.6):
    h, w = canvas.shape
    lo_r = max(int(min(a[0], b[0]) - half_width - edge - 1), 0)
    hi_r = min(int(max(a[0], b[0]) + half_width + edge + 1), h - 1)
    lo_c = max(int(min(a[1], b[1]) - half_width - edge - 1), 0)
    hi_c = min(int(max(a[1], b[1]) + half_width + edge + 1), w - 1)
    rr = np.arange(lo_r, hi_r + 1, dtype=np.float64)[:, None]
    cc = np.arange(lo_c, hi_c + 1, dtype=np.float64)[None, :]
    ab = np.array([b[0] - a[0], b[1] - a[1]])
    denom = float(ab @ ab)
    t = ((rr - a[0]) * ab[0] + (cc - a[1]) * ab[1]) / denom
    t = np.clip(t, 0.0, 1.0)
    dist = np.hypot(rr - (a[0] + t * ab[0]), cc - (a[1] + t * ab[1]))
    alpha = np.clip((half_width + edge / 2.0 - dist) / edge, 0.0, 1.0)
    sub = canvas[lo_r : hi_r + 1, lo_c : hi_c + 1]
    sub += alpha * (value - sub)


def _windows_avoid_whites(red_centers, white_centers) -> bool:
    """True when no chain of red blobs spans a window over a white center.

    Mirrors the pipeline's grouping (midpoints within the merge distance
    chain together, windows are midpoint bounding boxes padded by the cell
    radius) with a little slack for rasterization jitter.
    """
    n = len(red_centers)
    if n == 0 or len(white_centers) == 0:
        return True
    pts = np.asarray(red_centers, dtype=np.float64)
    dsu = _DisjointSet(n)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    for i, j in zip(*np.nonzero(d2 <= _MERGE_SLACK * _MERGE_SLACK)):
        if i < j:
            dsu.union(int(i), int(j))
    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(dsu.find(i), []).append(i)
    for members in clusters.values():
        sub = pts[members]
        r0, c0 = sub.min(axis=0) - _WINDOW_SLACK
        r1, c1 = sub.max(axis=0) + _WINDOW_SLACK
        for wc in white_centers:
            if r0 <= wc[0] <= r1 and c0 <= wc[1] <= c1:
                return False
    return True


def _sample_positions(rng, spec: SynthSpec):
    h, w = spec.height, spec.width
    whites: list[tuple[float, float]] = []
    reds: list[tuple[float, float]] = []
    smudges: list[tuple[float, float]] = []

    def draw(clearance):
        if h - 2 * clearance < 1 or w - 2 * clearance < 1:
            raise PackingError(f"canvas {w}x{h} too small for clearance {clearance}")
        return (rng.uniform(clearance, h - 1 - clearance), rng.uniform(clearance, w - 1 - clearance))

    def grid_scan(clearance, ok, out):
        # deterministic fallback for tight packings: first feasible spot on
        # a jittered coarse grid, in raster order
        step = 4.0
        jr, jc = rng.uniform(0.0, step, size=2)
        for row in np.arange(clearance + jr, h - 1 - clearance, step):
            for col in np.arange(clearance + jc, w - 1 - clearance, step):
                p = (float(row), float(col))
                if ok(p, out):
                    return p
        return None

    def place(count, clearance, ok):
        out = []
        for _ in range(count):
            for _ in range(_MAX_ATTEMPTS):
                p = draw(clearance)
                if spec.overlap_allowed or ok(p, out):
                    out.append(p)
                    break
            else:
                p = None if spec.overlap_allowed else grid_scan(clearance, ok, out)
                if p is None:
                    raise PackingError("cells cannot fit without overlap; relax the spec or allow overlap")
                out.append(p)
        return out

    def dist(a, b):
        return float(np.hypot(a[0] - b[0], a[1] - b[1]))

    def white_ok(p, placed):
        return all(dist(p, q) >= 2 * spec.white_radius + 12 for q in placed)

    whites = place(spec.n_white, spec.white_radius + 14, white_ok)

    smudge_extent = min(70.0, min(h, w) / 4.0)

    def smudge_ok(p, placed):
        if any(dist(p, q) < 80 for q in placed):
            return False
        return all(dist(p, q) >= spec.white_radius + smudge_extent / 2.0 + 40 for q in whites)

    smudges = place(spec.n_smudges, smudge_extent / 2.0 + 12, smudge_ok)

    white_gap = max(spec.white_radius + spec.red_radius + 6.0, 100.0)
    smudge_gap = max(75.0, spec.red_radius + smudge_extent / 2.0 + 8)
    loose = 2 * spec.red_radius + 10
    preferred = max(loose, _MERGE_SLACK + 4.0)

    def red_ok(p, placed, spacing):
        if any(dist(p, q) < spacing for q in placed):
            return False
        if any(dist(p, q) < white_gap for q in whites):
            return False
        if any(dist(p, q) < smudge_gap for q in smudges):
            return False
        return _windows_avoid_whites(placed + [p], whites)

    def place_reds():
        # prefer spacing beyond the merge distance (isolated blobs give the
        # cleanest search windows), then densify; greedy packing can wedge
        # itself, so the caller restarts with fresh draws
        out = []
        for _ in range(spec.n_red):
            pos = None
            for attempt in range(1500):
                q = draw(spec.red_radius + 10)
                if spec.overlap_allowed:
                    pos = q
                    break
                spacing = preferred if attempt < 600 else loose
                if red_ok(q, out, spacing):
                    pos = q
                    break
            if pos is None and not spec.overlap_allowed:
                pos = grid_scan(spec.red_radius + 10, lambda q, o: red_ok(q, o, loose), out)
            if pos is None:
                return None
            out.append(pos)
        return out

    reds = None
    for _ in range(50):
        reds = place_reds()
        if reds is not None:
            break
    if reds is None:
        raise PackingError("cells cannot fit without overlap; relax the spec or allow overlap")
    return whites, reds, smudges, smudge_extent


def _snap_level(nominal: float, contrast_scale: float) -> float:
    """Nudge an intensity so its contrast-scaled value sits exactly on an
    8-bit level; residual filter ringing then cannot split a flat area
    across two quantized levels."""
    post = 0.5 + (nominal - 0.5) * contrast_scale
    level = round(post * 255.0)
    return 0.5 + (level / 255.0 - 0.5) / contrast_scale


def synth_smear(spec: SynthSpec):
    """Render a synthetic smear; returns (image, SynthTruth)."""
    rng = np.random.default_rng(spec.rng_seed)
    whites, reds, smudges, smudge_extent = _sample_positions(rng, spec)

    cs = spec.contrast_scale
    v_bg, v_red, v_cyto, v_nuc, v_smudge = (
        _snap_level(v, cs) for v in (0.75, 0.55, 0.65, 0.15, 0.2)
    )
    canvas = np.full((spec.height, spec.width), v_bg, dtype=np.float64)
    for center in reds:
        _paint_disc(canvas, center, spec.red_radius, v_red, edge=2.0)
    for center in whites:
        _paint_disc(canvas, center, spec.white_radius, v_cyto, edge=2.0)
        n_blobs = int(rng.integers(2, 4))
        angle0 = rng.uniform(0.0, 2.0 * np.pi)
        for b in range(n_blobs):
            angle = angle0 + 2.0 * np.pi * b / n_blobs
            off = rng.uniform(0.15, 0.28) * spec.white_radius
            blob_r = rng.uniform(0.26, 0.36) * spec.white_radius
            blob_c = (center[0] + off * np.sin(angle), center[1] + off * np.cos(angle))
            _paint_disc(canvas, blob_c, blob_r, v_nuc, edge=2.0)
    for center in smudges:
        angle = rng.uniform(0.0, np.pi)
        half_len = smudge_extent / 2.0 - 8.0
        dr, dc = half_len * np.sin(angle), half_len * np.cos(angle)
        a = (center[0] - dr, center[1] - dc)
        b = (center[0] + dr, center[1] + dc)
        _paint_capsule(canvas, a, b, half_width=rng.uniform(6.0, 9.0), value=v_smudge)

    # microscope defocus: keeps the scene's spectral content inside the
    # pipeline's low-pass band, as real optics do
    canvas = gaussian_smooth(canvas, _OPTICAL_BLUR_SIGMA)

    canvas = 0.5 + (canvas - 0.5) * cs
    if spec.noise_amplitude > 0:
        cols = np.arange(spec.width, dtype=np.float64)
        canvas = canvas + spec.noise_amplitude * np.sin(2.0 * np.pi * spec.noise_frequency * cols)[None, :]

    truth = SynthTruth(
        white_centers=[PointRC(*p) for p in whites],
        red_centers=[PointRC(*p) for p in reds],
        smudge_centers=[PointRC(*p) for p in smudges],
        white_radius=spec.white_radius,
        red_radius=spec.red_radius,
    )
    return clamp01(canvas), truth
