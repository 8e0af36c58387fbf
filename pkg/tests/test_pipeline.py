import json

import numpy as np
import pytest

import hemocount as hc
from hemocount.pipeline import (
    BACKGROUND,
    CLASS_COLORS,
    CYTOPLASM,
    NUCLEUS,
    RED_CELL,
    ConfigError,
    PipelineStageError,
    classify_pixels,
    render_overlay,
)
from hemocount.raster import PointRC, Rect


def _template_specs():
    return (hc.TemplateSpec(id="a", rect=Rect(10, 20, 10, 20), weight=1.0),)


def test_config_json_round_trip():
    cfg = hc.PipelineConfig(
        butterworth=hc.ButterworthParams(7, 0.3),
        canny=hc.CannyParams(1.1, 0.8, 0.5),
        hough=hc.HoughParams(45, 0.2),
        merge_dist_px=55,
        margin_px=4,
        peak=hc.PeakParams(0.9, 12),
        templates=_template_specs(),
    )
    back = hc.PipelineConfig.from_json(cfg.to_json())
    assert back == cfg
    data = json.loads(cfg.to_json())
    assert set(data) == {"butterworth", "canny", "hough", "merge_dist_px", "margin_px", "peak", "templates"}
    assert set(data["hough"]) == {"radius_px", "min_vote_fraction"}
    assert set(data["templates"][0]) == {"id", "rect", "weight"}


def test_config_defaults_and_validation():
    cfg = hc.PipelineConfig.from_json("{}")
    assert cfg.butterworth == hc.ButterworthParams(9, 0.25)
    assert cfg.hough.radius == 60.0
    assert cfg.merge_dist_px == 60.0 and cfg.margin_px == 8
    with pytest.raises(ConfigError):
        cfg.require_templates()
    with pytest.raises(ConfigError):
        hc.PipelineConfig.from_json("[1, 2]")
    with pytest.raises(ConfigError):
        hc.PipelineConfig.from_json("{nope")
    with pytest.raises(ConfigError):
        hc.PipelineConfig.from_json('{"butterworth": {"order": 0}}')


def test_default_peak_separation_from_templates():
    cfg = hc.PipelineConfig(templates=_template_specs())
    assert cfg.effective_peak_params().min_peak_separation == pytest.approx(5.5)
    assert cfg.red_radius() == pytest.approx(5.5)


def test_blank_image_reports_empty_scene():
    cfg = hc.PipelineConfig(templates=_template_specs())
    result = hc.run_pipeline(np.full((96, 96), 0.7), cfg)
    rep = result.report
    assert (rep.white_count, rep.red_count, rep.rejected_fake_regions) == (0, 0, 0)
    assert (result.overlay == BACKGROUND).all()


def test_template_rect_must_fit_image():
    cfg = hc.PipelineConfig(templates=(hc.TemplateSpec("x", Rect(0, 200, 0, 5), 1.0),))
    with pytest.raises(ConfigError):
        hc.run_pipeline(np.full((96, 96), 0.7), cfg)


def test_stage_error_names_stage():
    # margin_px must stay below half the image size; the labeling stage
    # rejects it and the pipeline reports the failing stage by name
    img = np.full((96, 96), 0.7)
    img[60:90, 60:90] = 0.2
    cfg = hc.PipelineConfig(
        margin_px=48, templates=(hc.TemplateSpec("x", Rect(5, 15, 5, 15), 1.0),)
    )
    with pytest.raises(PipelineStageError) as err:
        hc.run_pipeline(img, cfg)
    assert err.value.stage == "label_merge"
    assert "label_merge" in str(err.value)


def test_run_pipeline_deterministic_and_timed(small_smear):
    _, img, truth, cfg = small_smear
    res1 = hc.run_pipeline(img, cfg)
    res2 = hc.run_pipeline(img, cfg)
    assert res1.report.to_json(include_timings=False) == res2.report.to_json(include_timings=False)
    np.testing.assert_array_equal(res1.overlay, res2.overlay)
    expected_stages = {
        "lowpass", "equalize", "threshold", "label_merge", "canny",
        "hough", "remove_white", "correlate", "peaks", "classify",
    }
    assert set(res1.report.stage_timings_ms) == expected_stages
    assert all(v >= 0 for v in res1.report.stage_timings_ms.values())


def test_small_scene_counts(small_smear):
    _, img, truth, cfg = small_smear
    rep = hc.run_pipeline(img, cfg).report
    assert rep.white_count == truth.white_count == len(rep.white_cells)
    assert rep.red_count == truth.red_count == len(rep.red_centers)


def test_report_json_schema(small_smear):
    _, img, _, cfg = small_smear
    rep = hc.run_pipeline(img, cfg).report
    data = json.loads(rep.to_json())
    assert set(data) == {
        "white_count", "red_count", "white_cells", "red_centers",
        "rejected_fake_regions", "stage_timings_ms",
    }
    assert set(data["white_cells"][0]) == {"row", "col", "radius", "votes"}
    if data["red_centers"]:
        assert set(data["red_centers"][0]) == {"row", "col"}
    nots = json.loads(rep.to_json(include_timings=False))
    assert "stage_timings_ms" not in nots


def test_overlay_partition_and_rendering(small_smear):
    _, img, _, cfg = small_smear
    result = hc.run_pipeline(img, cfg)
    counts = np.bincount(result.overlay.ravel(), minlength=4)
    assert counts.sum() == result.overlay.size
    rgb = result.artifacts["overlay"]
    for klass, color in CLASS_COLORS.items():
        match = (rgb == np.array(color, dtype=np.uint8)).all(axis=2)
        assert match.sum() == counts[klass]


def test_classify_precedence():
    cell = hc.WhiteCell(center=PointRC(20, 20), radius=10, votes=50, group_id=1)
    nucleus_mask = np.zeros((40, 40), dtype=bool)
    nucleus_mask[15:20, 18:23] = True
    overlay = classify_pixels([cell], nucleus_mask, [PointRC(20, 20), PointRC(34, 34)], 4.0)
    assert overlay[17, 20] == NUCLEUS  # nucleus wins inside the disc
    assert overlay[26, 20] == CYTOPLASM
    assert overlay[34, 34] == RED_CELL
    assert overlay[5, 5] == BACKGROUND
    # a red center inside a white disc does not repaint disc pixels
    assert (overlay[disc_slice := slice(12, 29), disc_slice] != RED_CELL).all()
    # nucleus + cytoplasm partition the disc
    disc = hc.disc_mask((40, 40), [cell])
    assert ((overlay == NUCLEUS) | (overlay == CYTOPLASM)).sum() == disc.sum()


def test_render_overlay_examples():
    blank = np.zeros((5, 5), dtype=np.uint8)
    rgb = render_overlay(blank)
    assert (rgb == (0, 0, 255)).all()
    single = blank.copy()
    single[2, 3] = NUCLEUS
    rgb2 = render_overlay(single)
    assert tuple(rgb2[2, 3]) == (0, 255, 255)
    assert ((rgb2 == (0, 255, 255)).all(axis=2)).sum() == 1
