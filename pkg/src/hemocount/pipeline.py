"""End-to-end analysis pipeline, configuration and reporting.

Stage order: Butterworth low-pass -> histogram equalization -> Otsu
dark-pixel threshold -> 8-connected labeling and nucleus grouping -> Canny
plus per-group circle Hough (fake regions rejected) -> white-cell removal
-> per-template NCC, weighted combination and peak shrinking -> class
overlay and report.

Config and report serialize as JSON with stable (alphabetical) key order so
fixtures diff cleanly. Stage timings are measured wall-clock and therefore
excluded from the canonical byte-comparison form of the report.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .edges import CannyParams, canny
from .hough import HoughParams, WhiteCell, detect_white_cells, disc_mask, remove_white_cells
from .matching import PeakParams, combine_maps, extract_templates, ncc_map, peak_regions
from .raster import PointRC, Rect, histogram256, image_bounds
from .segmentation import binarize_dark, label_8conn, merge_nuclei, otsu_level, search_window
from .spectral import ButterworthParams, equalize_histogram, lowpass_filter
from .validation import as_gray_image

BACKGROUND, RED_CELL, CYTOPLASM, NUCLEUS = 0, 1, 2, 3
CLASS_COLORS = {
    BACKGROUND: (0, 0, 255),
    RED_CELL: (255, 0, 0),
    CYTOPLASM: (255, 255, 0),
    NUCLEUS: (0, 255, 255),
}
STAGE_ARTIFACTS = ("filtered", "equalized", "binary", "edges", "res_combined", "overlay")


class ConfigError(ValueError):
    """Pipeline configuration violates its schema or invariants."""


class PipelineStageError(RuntimeError):
    """A stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class TemplateSpec:
    id: str
    rect: Rect
    weight: float


@dataclass(frozen=True)
class PipelineConfig:
    butterworth: ButterworthParams = ButterworthParams()
    canny: CannyParams = CannyParams()
    hough: HoughParams = HoughParams()
    merge_dist_px: float = 60.0
    margin_px: int = 8
    peak: PeakParams | None = None
    templates: tuple = ()
    stage_dump: bool = False

    def __post_init__(self):
        if self.merge_dist_px <= 0:
            raise ConfigError(f"merge_dist_px must be > 0, got {self.merge_dist_px}")
        if self.margin_px < 0:
            raise ConfigError(f"margin_px must be >= 0, got {self.margin_px}")

    def require_templates(self) -> None:
        if not self.templates:
            raise ConfigError("config needs at least one template for red-cell counting")

    def effective_peak_params(self) -> PeakParams:
        """Explicit peak params, or the default separation of half the
        narrowest template width."""
        if self.peak is not None:
            return self.peak
        self.require_templates()
        sep = max(1.0, min(t.rect.width for t in self.templates) / 2.0)
        return PeakParams(min_peak_separation=sep)

    def red_radius(self) -> float:
        """Display radius for red-cell overlay discs, from template extents."""
        self.require_templates()
        return max(1.0, min(min(t.rect.height, t.rect.width) for t in self.templates) / 2.0)

    def to_dict(self) -> dict:
        return {
            "butterworth": {"order": self.butterworth.order, "cutoff": self.butterworth.cutoff},
            "canny": {
                "sigma": self.canny.gauss_sigma,
                "high_quantile": self.canny.high_quantile,
                "low_ratio": self.canny.low_ratio,
            },
            "hough": {"radius_px": self.hough.radius, "min_vote_fraction": self.hough.min_vote_fraction},
            "merge_dist_px": self.merge_dist_px,
            "margin_px": self.margin_px,
            "peak": {
                "threshold_quantile": self.effective_peak_params().threshold_quantile,
                "min_peak_separation": self.effective_peak_params().min_peak_separation,
            }
            if (self.peak is not None or self.templates)
            else None,
            "templates": [
                {
                    "id": t.id,
                    "rect": {
                        "row_min": t.rect.row_min,
                        "row_max": t.rect.row_max,
                        "col_min": t.rect.col_min,
                        "col_max": t.rect.col_max,
                    },
                    "weight": t.weight,
                }
                for t in self.templates
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @staticmethod
    def from_dict(data: dict) -> "PipelineConfig":
        try:
            bw = data.get("butterworth", {})
            cn = data.get("canny", {})
            hg = data.get("hough", {})
            pk = data.get("peak")
            templates = []
            for entry in data.get("templates", []):
                r = entry["rect"]
                templates.append(
                    TemplateSpec(
                        id=str(entry.get("id", f"t{len(templates) + 1}")),
                        rect=Rect(int(r["row_min"]), int(r["row_max"]), int(r["col_min"]), int(r["col_max"])),
                        weight=float(entry.get("weight", 1.0)),
                    )
                )
            peak = None
            if pk is not None:
                peak = PeakParams(
                    threshold_quantile=float(pk.get("threshold_quantile", 0.95)),
                    min_peak_separation=float(pk.get("min_peak_separation", 1.0)),
                )
            return PipelineConfig(
                butterworth=ButterworthParams(
                    order=int(bw.get("order", 9)), cutoff=float(bw.get("cutoff", 0.25))
                ),
                canny=CannyParams(
                    gauss_sigma=float(cn.get("sigma", 1.4)),
                    high_quantile=float(cn.get("high_quantile", 0.90)),
                    low_ratio=float(cn.get("low_ratio", 0.4)),
                ),
                hough=HoughParams(
                    radius=float(hg.get("radius_px", 60.0)),
                    min_vote_fraction=float(hg.get("min_vote_fraction", 0.15)),
                ),
                merge_dist_px=float(data.get("merge_dist_px", 60.0)),
                margin_px=int(data.get("margin_px", 8)),
                peak=peak,
                templates=tuple(templates),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad config: {exc}") from exc

    @staticmethod
    def from_json(text: str) -> "PipelineConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        return PipelineConfig.from_dict(data)


@dataclass
class AnalysisReport:
    white_count: int
    red_count: int
    white_cells: list
    red_centers: list
    rejected_fake_regions: int
    stage_timings_ms: dict
    config_echo: PipelineConfig

    def to_dict(self, include_timings: bool = True) -> dict:
        out = {
            "white_count": self.white_count,
            "red_count": self.red_count,
            "white_cells": [
                {"row": c.center.row, "col": c.center.col, "radius": c.radius, "votes": c.votes}
                for c in self.white_cells
            ],
            "red_centers": [{"row": p.row, "col": p.col} for p in self.red_centers],
            "rejected_fake_regions": self.rejected_fake_regions,
        }
        if include_timings:
            out["stage_timings_ms"] = {k: round(v, 3) for k, v in self.stage_timings_ms.items()}
        return out

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), sort_keys=True, indent=2) + "\n"


@dataclass
class PipelineResult:
    report: AnalysisReport
    overlay: np.ndarray
    artifacts: dict


def _disc(center: PointRC, radius: float) -> WhiteCell:
    return WhiteCell(center=center, radius=radius, votes=0, group_id=0)


def classify_pixels(white_cells, nucleus_mask, red_centers, red_radius: float) -> np.ndarray:
    """Per-pixel class map; precedence nucleus > cytoplasm > red cell > background."""
    nucleus_mask = np.asarray(nucleus_mask, dtype=bool)
    overlay = np.full(nucleus_mask.shape, BACKGROUND, dtype=np.uint8)
    red_discs = disc_mask(nucleus_mask.shape, [_disc(p, red_radius) for p in red_centers])
    white_discs = disc_mask(nucleus_mask.shape, white_cells)
    overlay[red_discs & ~white_discs] = RED_CELL
    overlay[white_discs & ~nucleus_mask] = CYTOPLASM
    overlay[white_discs & nucleus_mask] = NUCLEUS
    return overlay


def render_overlay(overlay) -> np.ndarray:
    """Color-coded result: blue background, red cells, yellow cytoplasm, cyan nucleus."""
    overlay = np.asarray(overlay)
    palette = np.zeros((4, 3), dtype=np.uint8)
    for klass, color in CLASS_COLORS.items():
        palette[klass] = color
    return palette[overlay]


def _normalize_for_view(arr: np.ndarray) -> np.ndarray:
    lo, hi = float(arr.min()), float(arr.max())
    if hi <= lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def run_pipeline(img, cfg: PipelineConfig) -> PipelineResult:
    """Run every stage on ``img``; deterministic for fixed input and config."""
    image = as_gray_image(img)
    cfg.require_templates()
    for t in cfg.templates:
        if not t.rect.inside(*image.shape):
            raise ConfigError(f"template {t.id!r} rect {t.rect} exceeds image {image.shape}")

    timings: dict[str, float] = {}
    artifacts: dict[str, np.ndarray] = {}

    def stage(name: str, fn):
        start = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:  # noqa: BLE001 - every failure must name its stage
            raise PipelineStageError(name, exc) from exc
        timings[name] = (time.perf_counter() - start) * 1000.0
        return result

    filtered = stage("lowpass", lambda: lowpass_filter(image, cfg.butterworth))
    artifacts["filtered"] = filtered
    equalized = stage("equalize", lambda: equalize_histogram(filtered))
    artifacts["equalized"] = equalized

    def threshold():
        hist = histogram256(equalized)
        if np.count_nonzero(hist) <= 1:
            # a single-level image holds nothing darker than anything else
            return np.zeros(equalized.shape, dtype=bool)
        return binarize_dark(equalized, otsu_level(hist))

    binary = stage("threshold", threshold)
    artifacts["binary"] = binary

    def group():
        _, regions = label_8conn(binary, cfg.margin_px)
        groups = merge_nuclei(regions, cfg.merge_dist_px)
        bounds = image_bounds(image)
        pad = int(round(cfg.hough.radius))
        for g in groups:
            g.search_window = search_window(g, pad, bounds)
        return groups

    groups = stage("label_merge", group)
    edges = stage("canny", lambda: canny(equalized, cfg.canny))
    artifacts["edges"] = edges
    accepted, rejected = stage("hough", lambda: detect_white_cells(groups, edges, cfg.hough))
    red_image = stage("remove_white", lambda: remove_white_cells(equalized, accepted))

    def correlate():
        if float(np.var(red_image)) == 0.0:
            # empty scene: nothing to match against
            return None
        templates = extract_templates(
            red_image,
            [t.rect for t in cfg.templates],
            [t.weight for t in cfg.templates],
            ids=[t.id for t in cfg.templates],
        )
        maps = [ncc_map(red_image, t) for t in templates]
        return combine_maps(maps, [t.weight for t in templates])

    combined = stage("correlate", correlate)

    def find_peaks():
        if combined is None:
            return []
        peaks = peak_regions(combined, cfg.effective_peak_params())
        return sorted((c for c, _ in peaks), key=lambda p: (p.row, p.col))

    red_centers = stage("peaks", find_peaks)
    artifacts["res_combined"] = (
        _normalize_for_view(combined) if combined is not None else np.zeros(image.shape)
    )

    def classify():
        overlay = classify_pixels(accepted, binary, red_centers, cfg.red_radius())
        return overlay, render_overlay(overlay)

    overlay, overlay_rgb = stage("classify", classify)
    artifacts["overlay"] = overlay_rgb

    report = AnalysisReport(
        white_count=len(accepted),
        red_count=len(red_centers),
        white_cells=accepted,
        red_centers=red_centers,
        rejected_fake_regions=len(rejected),
        stage_timings_ms=timings,
        config_echo=cfg,
    )
    return PipelineResult(report=report, overlay=overlay, artifacts=artifacts)
