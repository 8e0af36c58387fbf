"""Command-line interface: analyze, synth, tune, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .matching import PeakParams, extract_templates, ncc_map, tune_weights
from .netpbm import load_pgm, save_pgm, save_ppm
from .pipeline import (
    ConfigError,
    PipelineConfig,
    PipelineStageError,
    run_pipeline,
)
from .raster import PointRC
from .synth import PackingError, SynthSpec, synth_smear


def _load_config(path: str) -> PipelineConfig:
    return PipelineConfig.from_json(Path(path).read_text())


def _load_gray(path: str) -> np.ndarray:
    return load_pgm(Path(path).read_bytes())


def _mask_to_gray(mask: np.ndarray) -> np.ndarray:
    return mask.astype(np.float64)


def dump_stage_files(artifacts: dict, out_dir: str) -> list:
    """Write stage artifacts as <stage>.pgm / overlay.ppm under ``out_dir``."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, arr in artifacts.items():
        if arr.ndim == 3:
            path = directory / f"{name}.ppm"
            path.write_bytes(save_ppm(arr))
        else:
            gray = _mask_to_gray(arr) if arr.dtype == np.bool_ else np.clip(arr, 0.0, 1.0)
            path = directory / f"{name}.pgm"
            path.write_bytes(save_pgm(gray))
        written.append(str(path))
    return written


@click.group()
def main():
    """Semi-automatic blood smear analysis toolkit."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True), help="input PGM image")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True), help="pipeline config JSON")
@click.option("--out-overlay", required=True, type=click.Path(), help="output overlay PPM")
@click.option("--out-report", required=True, type=click.Path(), help="output report JSON")
@click.option("--dump-stages", type=click.Path(), default=None, help="directory for stage images")
def analyze(input_path, config_path, out_overlay, out_report, dump_stages):
    """Run the full pipeline on one image."""
    try:
        img = _load_gray(input_path)
        cfg = _load_config(config_path)
        result = run_pipeline(img, cfg)
    except (ConfigError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    except PipelineStageError as exc:
        raise click.ClickException(str(exc)) from exc
    Path(out_overlay).write_bytes(save_ppm(result.artifacts["overlay"]))
    Path(out_report).write_text(result.report.to_json())
    if dump_stages:
        for path in dump_stage_files(result.artifacts, dump_stages):
            click.echo(f"wrote {path}")
    click.echo(
        f"white_count={result.report.white_count} red_count={result.report.red_count} "
        f"rejected_fake_regions={result.report.rejected_fake_regions}"
    )


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True), help="synthesis spec JSON")
@click.option("--out", "out_path", required=True, type=click.Path(), help="output PGM image")
@click.option("--truth", "truth_path", required=True, type=click.Path(), help="output ground-truth JSON")
def synth(spec_path, out_path, truth_path):
    """Generate a synthetic smear with ground truth."""
    data = json.loads(Path(spec_path).read_text())
    try:
        spec = SynthSpec(**data)
        img, truth = synth_smear(spec)
    except (TypeError, ValueError, PackingError) as exc:
        raise click.ClickException(str(exc)) from exc
    Path(out_path).write_bytes(save_pgm(img))
    Path(truth_path).write_text(json.dumps(truth.to_dict(), sort_keys=True, indent=2) + "\n")
    click.echo(f"synthesized {spec.width}x{spec.height}: {truth.white_count} white, {truth.red_count} red")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True), help="input PGM image")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True), help="pipeline config JSON")
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True), help="ground-truth JSON")
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True), help="JSON list of weight vectors")
def tune(input_path, config_path, truth_path, grid_path):
    """Grid-search template weights against known red-cell centers."""
    img = _load_gray(input_path)
    cfg = _load_config(config_path)
    cfg.require_templates()
    truth_data = json.loads(Path(truth_path).read_text())
    truth_centers = [PointRC(p["row"], p["col"]) for p in truth_data.get("red_centers", [])]
    grid_data = json.loads(Path(grid_path).read_text())
    grid = grid_data["weights"] if isinstance(grid_data, dict) else grid_data
    try:
        templates = extract_templates(
            img, [t.rect for t in cfg.templates], [t.weight for t in cfg.templates], ids=[t.id for t in cfg.templates]
        )
        maps = [ncc_map(img, t) for t in templates]
        best = tune_weights(maps, truth_centers, grid, cfg.effective_peak_params())
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps({"best_weights": list(best)}))


@main.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, host):
    """Run the HTTP tuning service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
