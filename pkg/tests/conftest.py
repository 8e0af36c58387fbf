"""Shared fixtures: the calibrated synthetic-smear suite.

The pipeline is semi-automatic: the operator picks templates and adjusts a
couple of parameters per image family. For the synthetic family they are:
five templates cut at known red-cell positions with the classic
[1, 1, 1.2, 1, 1.2] weighting, the Hough radius calibrated to the family's
edge locus (the equalization step pushes contours a few pixels outward, to
~63 px for the 60 px cells), and a vote floor of 0.45 of the circumference,
comfortably between the coincidence-vote ceiling of dense red fields and
the vote count of a true cell boundary.
"""

from __future__ import annotations

import pytest

import hemocount as hc

FAMILY_HOUGH_RADIUS = 63.0
FAMILY_VOTE_FLOOR = 0.45
EQ1_WEIGHTS = (1.0, 1.0, 1.2, 1.0, 1.2)


def family_config(truth: hc.SynthTruth, red_radius: float) -> hc.PipelineConfig:
    """Operator-style config for a synthetic smear with known truth."""
    r = int(red_radius) + 3
    templates = []
    for i, p in enumerate(truth.red_centers[: len(EQ1_WEIGHTS)]):
        pr, pc = int(round(p.row)), int(round(p.col))
        templates.append(
            hc.TemplateSpec(id=str(i + 1), rect=hc.Rect(pr - r, pr + r, pc - r, pc + r), weight=EQ1_WEIGHTS[i])
        )
    return hc.PipelineConfig(
        hough=hc.HoughParams(radius=FAMILY_HOUGH_RADIUS, min_vote_fraction=FAMILY_VOTE_FLOOR),
        templates=tuple(templates),
    )


def suite_spec(seed: int) -> hc.SynthSpec:
    """One of the 20 acceptance scenes: 1-3 white cells, 40-60 red cells."""
    return hc.SynthSpec(
        width=512,
        height=512,
        n_red=40 + (seed * 13) % 21,
        n_white=1 + seed % 3,
        white_radius=60.0,
        noise_amplitude=0.1,
        noise_frequency=0.45,
        contrast_scale=0.5,
        rng_seed=seed,
    )


@pytest.fixture(scope="session")
def smear_suite():
    """The 20 seeded synthetic smears with their configs, generated once."""
    suite = []
    for seed in range(20):
        spec = suite_spec(seed)
        img, truth = hc.synth_smear(spec)
        suite.append((spec, img, truth, family_config(truth, spec.red_radius)))
    return suite


@pytest.fixture(scope="session")
def small_smear():
    """A cheap 320x320 scene for unit-level end-to-end checks."""
    spec = hc.SynthSpec(width=320, height=320, n_red=10, n_white=1, rng_seed=3)
    img, truth = hc.synth_smear(spec)
    return spec, img, truth, family_config(truth, spec.red_radius)
