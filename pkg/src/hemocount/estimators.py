"""Scikit-learn style wrappers around the pipeline stages.

Each estimator takes flat scalar hyperparameters in ``__init__`` (so
``get_params`` / ``set_params`` / ``clone`` work for grid search and for
the interactive tuner), validates its input, and delegates to the
functional kernels. "X" is a single 2-D gray image in [0, 1].
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .edges import CannyParams, canny
from .hough import HoughParams, detect_white_cells, remove_white_cells
from .matching import PeakParams, combine_maps, extract_templates, ncc_map, peak_regions
from .pipeline import PipelineConfig, PipelineResult, TemplateSpec, run_pipeline
from .raster import Rect, histogram256, image_bounds
from .segmentation import binarize_dark, label_8conn, merge_nuclei, otsu_level, search_window
from .spectral import ButterworthParams, equalize_histogram, lowpass_filter
from .validation import as_gray_image


class ButterworthLowpass(BaseEstimator, TransformerMixin):
    """Frequency-domain Butterworth low-pass filter."""

    def __init__(self, order=9, cutoff=0.25):
        self.order = order
        self.cutoff = cutoff

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return lowpass_filter(as_gray_image(X), ButterworthParams(self.order, self.cutoff))


class HistogramEqualizer(BaseEstimator, TransformerMixin):
    """Global 256-level histogram equalization."""

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return equalize_histogram(as_gray_image(X))


class OtsuBinarizer(BaseEstimator, TransformerMixin):
    """Dark-pixel binarization at the Otsu threshold.

    After ``transform`` the chosen level is available as ``level_``.
    """

    def fit(self, X, y=None):
        self.level_ = otsu_level(histogram256(as_gray_image(X)))
        return self

    def transform(self, X):
        X = as_gray_image(X)
        if not hasattr(self, "level_"):
            self.fit(X)
        return binarize_dark(X, self.level_)


class CannyEdges(BaseEstimator, TransformerMixin):
    """Canny edge mask with quantile-adaptive hysteresis thresholds."""

    def __init__(self, gauss_sigma=1.4, high_quantile=0.90, low_ratio=0.4):
        self.gauss_sigma = gauss_sigma
        self.high_quantile = high_quantile
        self.low_ratio = low_ratio

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return canny(as_gray_image(X), CannyParams(self.gauss_sigma, self.high_quantile, self.low_ratio))


class WhiteCellDetector(BaseEstimator):
    """Locate white cells: threshold, group nuclei, validate with circle Hough.

    ``predict`` takes the preprocessed gray image and returns an (n, 2)
    array of (row, col) centers; the accepted cells and rejected fake-region
    group ids are kept as ``cells_`` and ``rejected_``.
    """

    def __init__(
        self,
        radius_px=60.0,
        min_vote_fraction=0.15,
        merge_dist_px=60.0,
        margin_px=8,
        gauss_sigma=1.4,
        high_quantile=0.90,
        low_ratio=0.4,
    ):
        self.radius_px = radius_px
        self.min_vote_fraction = min_vote_fraction
        self.merge_dist_px = merge_dist_px
        self.margin_px = margin_px
        self.gauss_sigma = gauss_sigma
        self.high_quantile = high_quantile
        self.low_ratio = low_ratio

    def fit(self, X, y=None):
        return self

    def predict(self, X):
        image = as_gray_image(X)
        hist = histogram256(image)
        if np.count_nonzero(hist) <= 1:
            mask = np.zeros(image.shape, dtype=bool)
        else:
            mask = binarize_dark(image, otsu_level(hist))
        _, regions = label_8conn(mask, self.margin_px)
        groups = merge_nuclei(regions, self.merge_dist_px)
        bounds = image_bounds(image)
        for g in groups:
            g.search_window = search_window(g, int(round(self.radius_px)), bounds)
        edges = canny(image, CannyParams(self.gauss_sigma, self.high_quantile, self.low_ratio))
        self.cells_, self.rejected_ = detect_white_cells(
            groups, edges, HoughParams(self.radius_px, self.min_vote_fraction)
        )
        self.nucleus_mask_ = mask
        return np.array([(c.center.row, c.center.col) for c in self.cells_]).reshape(-1, 2)

    def remove_from(self, X):
        """Wipe the detected cells out of ``X`` (median fill)."""
        return remove_white_cells(as_gray_image(X), getattr(self, "cells_", []))


class RedCellCounter(BaseEstimator):
    """Count red cells by weighted template correlation.

    ``fit(X, rects, weights)`` extracts templates from the processed image;
    ``predict`` returns the (n, 2) array of red-cell centers.
    """

    def __init__(self, threshold_quantile=0.95, min_peak_separation=None):
        self.threshold_quantile = threshold_quantile
        self.min_peak_separation = min_peak_separation

    def fit(self, X, rects, weights=None, ids=None):
        image = as_gray_image(X)
        if weights is None:
            weights = [1.0] * len(rects)
        self.templates_ = extract_templates(image, rects, weights, ids)
        return self

    def _peak_params(self):
        sep = self.min_peak_separation
        if sep is None:
            sep = max(1.0, min(t.rect.width for t in self.templates_) / 2.0)
        return PeakParams(self.threshold_quantile, sep)

    def predict(self, X):
        if not hasattr(self, "templates_"):
            raise RuntimeError("RedCellCounter.predict called before fit")
        image = as_gray_image(X)
        maps = [ncc_map(image, t) for t in self.templates_]
        self.combined_map_ = combine_maps(maps, [t.weight for t in self.templates_])
        peaks = peak_regions(self.combined_map_, self._peak_params())
        self.scores_ = [s for _, s in peaks]
        return np.array([(c.row, c.col) for c, _ in peaks]).reshape(-1, 2)


class BloodSmearAnalyzer(BaseEstimator):
    """Whole-pipeline estimator; ``predict`` returns the analysis report.

    ``templates`` is a list of (id, (row_min, row_max, col_min, col_max),
    weight) tuples mirroring the config schema. The full result (overlay
    and stage artifacts) is kept as ``result_``.
    """

    def __init__(
        self,
        butterworth_order=9,
        butterworth_cutoff=0.25,
        gauss_sigma=1.4,
        high_quantile=0.90,
        low_ratio=0.4,
        radius_px=60.0,
        min_vote_fraction=0.15,
        merge_dist_px=60.0,
        margin_px=8,
        threshold_quantile=0.95,
        min_peak_separation=None,
        templates=None,
    ):
        self.butterworth_order = butterworth_order
        self.butterworth_cutoff = butterworth_cutoff
        self.gauss_sigma = gauss_sigma
        self.high_quantile = high_quantile
        self.low_ratio = low_ratio
        self.radius_px = radius_px
        self.min_vote_fraction = min_vote_fraction
        self.merge_dist_px = merge_dist_px
        self.margin_px = margin_px
        self.threshold_quantile = threshold_quantile
        self.min_peak_separation = min_peak_separation
        self.templates = templates

    def to_config(self) -> PipelineConfig:
        specs = []
        for tid, rect, weight in self.templates or ():
            if not isinstance(rect, Rect):
                rect = Rect(*rect)
            specs.append(TemplateSpec(id=str(tid), rect=rect, weight=float(weight)))
        peak = None
        if self.min_peak_separation is not None:
            peak = PeakParams(self.threshold_quantile, self.min_peak_separation)
        elif self.threshold_quantile != 0.95:
            sep = max(1.0, min(s.rect.width for s in specs) / 2.0) if specs else 1.0
            peak = PeakParams(self.threshold_quantile, sep)
        return PipelineConfig(
            butterworth=ButterworthParams(self.butterworth_order, self.butterworth_cutoff),
            canny=CannyParams(self.gauss_sigma, self.high_quantile, self.low_ratio),
            hough=HoughParams(self.radius_px, self.min_vote_fraction),
            merge_dist_px=self.merge_dist_px,
            margin_px=self.margin_px,
            peak=peak,
            templates=tuple(specs),
        )

    def fit(self, X, y=None):
        return self

    def analyze(self, X) -> PipelineResult:
        self.result_ = run_pipeline(as_gray_image(X), self.to_config())
        return self.result_

    def predict(self, X):
        return self.analyze(X).report
