import numpy as np
import pytest

from hemocount.edges import CannyParams, canny, gaussian_smooth, sobel_gradients


def test_constant_image_has_no_edges():
    assert not canny(np.full((32, 32), 0.5)).any()


def test_params_validation():
    with pytest.raises(ValueError):
        CannyParams(gauss_sigma=0)
    with pytest.raises(ValueError):
        CannyParams(high_quantile=1.0)
    with pytest.raises(ValueError):
        CannyParams(low_ratio=0.0)


def test_vertical_step_gives_single_column():
    img = np.zeros((40, 40))
    img[:, 20:] = 0.8
    edges = canny(img)
    rows, cols = np.nonzero(edges)
    assert len(rows) >= 30  # essentially the full column
    assert np.abs(cols - 19.5).max() <= 1.0  # within +-1 px of the step
    # one pixel per row: the 2-px gradient plateau must thin to width 1
    assert len(set(rows)) == len(rows)


def test_disc_edges_lie_on_the_circle():
    h = w = 200
    rr, cc = np.mgrid[0:h, 0:w]
    d = np.hypot(rr - 99.0, cc - 101.0)
    img = np.where(d <= 60.0, 0.2, 0.8)
    edges = canny(img)
    er, ec = np.nonzero(edges)
    radii = np.hypot(er - 99.0, ec - 101.0)
    on_circle = np.abs(radii - 60.0) <= 2.0
    assert on_circle.mean() >= 0.8
    assert len(er) > 150


def test_edges_subset_of_nonzero_gradient_and_above_low_threshold():
    rng = np.random.default_rng(0)
    img = gaussian_smooth(rng.uniform(0, 1, (48, 48)), 2.0)
    p = CannyParams()
    edges = canny(img, p)
    gx, gy = sobel_gradients(gaussian_smooth(img, p.gauss_sigma))
    mag = np.hypot(gx, gy)
    assert (mag[edges] > 0).all()
    nonzero = mag[mag > 1e-12]
    high = np.quantile(nonzero, p.high_quantile)
    assert (mag[edges] >= p.low_ratio * high).all()


def test_gaussian_smooth_preserves_mean_and_constant():
    img = np.full((20, 20), 0.7)
    np.testing.assert_allclose(gaussian_smooth(img, 1.4), img, atol=1e-12)
    rng = np.random.default_rng(1)
    noisy = rng.uniform(0, 1, (64, 64))
    sm = gaussian_smooth(noisy, 1.4)
    assert abs(sm.mean() - noisy.mean()) < 1e-3
    assert sm.std() < noisy.std()
