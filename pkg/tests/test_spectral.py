import numpy as np
import pytest

from hemocount.spectral import (
    ButterworthParams,
    SpectralConsistencyError,
    Spectrum,
    butterworth_gain,
    dft2,
    equalize_histogram,
    idft2,
    lowpass_filter,
    spectrum_view,
)


def naive_dft2_centered(img):
    """Direct O(N^2)-per-output DFT with the DC term moved to the center."""
    h, w = img.shape
    out = np.zeros((h, w), dtype=complex)
    for u in range(h):
        for v in range(w):
            s = 0.0j
            for r in range(h):
                for c in range(w):
                    s += img[r, c] * np.exp(-2j * np.pi * (u * r / h + v * c / w))
            out[u, v] = s
    return np.roll(np.roll(out, h // 2, axis=0), w // 2, axis=1)


def test_dft2_matches_naive_oracle():
    rng = np.random.default_rng(0)
    img = rng.uniform(0.0, 1.0, (8, 8))
    spec = dft2(img)
    assert spec.dc_centered
    assert np.abs(spec.data - naive_dft2_centered(img)).max() < 1e-9


def test_dft2_constant_image_all_energy_at_dc():
    img = np.full((6, 9), 0.37)
    spec = dft2(img)
    center = (6 // 2, 9 // 2)
    assert abs(spec.data[center]) == pytest.approx(0.37 * img.size, abs=1e-9)
    rest = spec.data.copy()
    rest[center] = 0
    assert np.abs(rest).max() < 1e-9


def test_dft2_impulse_flat_magnitude():
    img = np.zeros((5, 7))
    img[0, 0] = 1.0
    assert np.abs(np.abs(dft2(img).data) - 1.0).max() < 1e-9


@pytest.mark.parametrize("shape", [(8, 8), (7, 9), (16, 5)])
def test_idft2_round_trip(shape):
    rng = np.random.default_rng(1)
    img = rng.uniform(0.0, 1.0, shape)
    assert np.abs(idft2(dft2(img), clamp=False) - img).max() < 1e-9


def test_idft2_zero_spectrum():
    spec = Spectrum(np.zeros((4, 4), dtype=complex))
    np.testing.assert_array_equal(idft2(spec), np.zeros((4, 4)))


def test_idft2_hermitian_residue_small_and_error_otherwise():
    rng = np.random.default_rng(2)
    img = rng.uniform(0.0, 1.0, (10, 12))
    spec = dft2(img)  # spectrum of a real image is Hermitian
    idft2(spec)  # must not raise
    broken = Spectrum(spec.data + 1e-3j * rng.uniform(0.5, 1.0, spec.data.shape))
    with pytest.raises(SpectralConsistencyError):
        idft2(broken)


def test_parseval():
    rng = np.random.default_rng(3)
    img = rng.uniform(0.0, 1.0, (14, 11))
    spec = dft2(img)
    lhs = (img * img).sum()
    rhs = (np.abs(spec.data) ** 2).sum() / img.size
    assert abs(lhs - rhs) / lhs < 1e-6


def test_butterworth_gain_values():
    p = ButterworthParams(order=9, cutoff=0.25)
    assert butterworth_gain(0.0, p) == 1.0
    assert butterworth_gain(0.25, p) == pytest.approx(0.5)
    assert butterworth_gain(0.5, p) == pytest.approx(1.0 / 262145.0, rel=1e-12)


def test_butterworth_gain_strictly_decreasing():
    p = ButterworthParams()
    # below ~0.05 the order-9 gain saturates to 1.0 in float64, so assert
    # strict decrease where it is representable and non-increase overall
    d = np.linspace(0.05, 1.0, 200)
    g = butterworth_gain(d, p)
    assert (np.diff(g) < 0).all()
    full = butterworth_gain(np.linspace(0.0, 1.0, 500), p)
    assert (np.diff(full) <= 0).all()


def test_butterworth_params_validation():
    with pytest.raises(ValueError):
        ButterworthParams(order=0)
    with pytest.raises(ValueError):
        ButterworthParams(cutoff=0.0)
    with pytest.raises(ValueError):
        ButterworthParams(cutoff=0.6)


def _fit_amplitude(img, freq):
    cols = np.arange(img.shape[1])
    basis_s = np.sin(2 * np.pi * freq * cols)
    basis_c = np.cos(2 * np.pi * freq * cols)
    row = img.mean(axis=0) - img.mean()
    a = 2 * (row * basis_s).mean()
    b = 2 * (row * basis_c).mean()
    return float(np.hypot(a, b))


def test_lowpass_constant_unchanged():
    img = np.full((32, 32), 0.42)
    assert np.abs(lowpass_filter(img) - img).max() < 1e-6


def test_lowpass_kills_high_frequency_sinusoid():
    cols = np.arange(128)
    img = np.tile(0.5 + 0.4 * np.sin(2 * np.pi * 0.45 * cols), (64, 1))
    out = lowpass_filter(img)
    assert _fit_amplitude(out, 0.45) < 0.01 * 0.4


def test_lowpass_keeps_low_frequency_sinusoid():
    cols = np.arange(128)
    img = np.tile(0.5 + 0.4 * np.sin(2 * np.pi * 0.05 * cols), (64, 1))
    out = lowpass_filter(img)
    assert abs(_fit_amplitude(out, 0.05) - 0.4) < 0.05 * 0.4


def test_lowpass_linear_before_clamp():
    rng = np.random.default_rng(4)
    base = lowpass_filter(np.full((16, 16), 0.5))  # warm path
    img = 0.35 + 0.3 * rng.uniform(0.0, 1.0, (16, 16))
    a = 0.5
    lhs = lowpass_filter(img * a + 0.25)  # affine keeps values inside (0, 1)
    rhs = a * lowpass_filter(img) + lowpass_filter(np.full((16, 16), 0.25))
    assert np.abs(lhs - rhs).max() < 1e-9
    assert base.shape == (16, 16)


def test_spectrum_view_sinusoid_three_dominant_points():
    cols = np.arange(64)
    img = np.tile(0.5 + 0.3 * np.sin(2 * np.pi * (8 / 64) * cols), (64, 1))
    view = spectrum_view(dft2(img))
    flat = np.argsort(view.ravel())[::-1]
    top3 = set(map(int, flat[:3]))
    center = (32, 32)
    expected = {
        center[0] * 64 + center[1],
        center[0] * 64 + center[1] - 8,
        center[0] * 64 + center[1] + 8,
    }
    assert top3 == expected
    fourth = view.ravel()[flat[3]]
    pair = view.ravel()[flat[1]]
    assert fourth < 0.1 * pair


def test_spectrum_view_zero_and_constant():
    np.testing.assert_array_equal(spectrum_view(Spectrum(np.zeros((8, 8), complex))), np.zeros((8, 8)))
    view = spectrum_view(dft2(np.full((8, 8), 0.6)))
    assert view[4, 4] == 1.0
    assert np.delete(view.ravel(), 4 * 8 + 4).max() == 0.0


def test_equalize_constant_unchanged():
    img = np.full((7, 7), 0.3)
    np.testing.assert_array_equal(equalize_histogram(img), img)


def test_equalize_full_ramp_is_fixed_point():
    img = (np.arange(256, dtype=np.float64) / 255.0).reshape(16, 16)
    np.testing.assert_allclose(equalize_histogram(img), img, atol=1e-12)


def test_equalize_preserves_ordering():
    rng = np.random.default_rng(5)
    img = rng.uniform(0.0, 1.0, (24, 24))
    out = equalize_histogram(img)
    levels_in = np.rint(img * 255).astype(int).ravel()
    levels_out = np.rint(out * 255).astype(int).ravel()
    order = np.argsort(levels_in, kind="stable")
    assert (np.diff(levels_out[order]) >= 0).all()


def _cdf_deviation(img):
    hist = np.bincount(np.rint(img * 255).astype(int).ravel(), minlength=256)
    cdf = np.cumsum(hist) / img.size
    uniform = (np.arange(256) + 1) / 256.0
    return np.abs(cdf - uniform).max()


def test_equalize_never_worsens_cdf_uniformity():
    rng = np.random.default_rng(6)
    for _ in range(10):
        img = rng.beta(rng.uniform(0.5, 4), rng.uniform(0.5, 4), (32, 32))
        assert _cdf_deviation(equalize_histogram(img)) <= _cdf_deviation(img) + 1e-12
