"""Frequency-domain denoising and contrast enhancement.

A microscope smear image often carries a single-frequency sinusoidal
artifact along the columns, visible as a symmetric pair of bright points in
the centered magnitude spectrum. The cleanup stage suppresses it with a
high-order Butterworth low-pass filter and then stretches the contrast with
global histogram equalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import clamp01, histogram256
from .validation import as_gray_image


class SpectralConsistencyError(ValueError):
    """Inverse transform of a supposedly-real spectrum left a large imaginary part."""


@dataclass(frozen=True)
class Spectrum:
    """DC-centered complex frequency representation of a gray image."""

    data: np.ndarray
    dc_centered: bool = True

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ButterworthParams:
    order: int = 9
    cutoff: float = 0.25

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"butterworth order must be >= 1, got {self.order}")
        if not 0.0 < self.cutoff <= 0.5:
            raise ValueError(f"butterworth cutoff must be in (0, 0.5], got {self.cutoff}")


def dft2(img) -> Spectrum:
    """Forward 2-D DFT with the zero-frequency term moved to the center bin.

    Arbitrary (non power of two) dimensions are supported; no padding is
    applied, so the inverse restores the original dimensions exactly.
    """
    arr = as_gray_image(img)
    return Spectrum(np.fft.fftshift(np.fft.fft2(arr)), dc_centered=True)


def idft2(spec: Spectrum, imag_tol: float = 1e-6, clamp: bool = True) -> np.ndarray:
    """Inverse 2-D DFT back to a real gray image.

    The imaginary residue is asserted below ``imag_tol`` (it is, for any
    Hermitian-symmetric spectrum) and discarded; the result is clamped to
    [0, 1] unless ``clamp`` is False.
    """
    data = spec.data
    if spec.dc_centered:
        data = np.fft.ifftshift(data)
    raw = np.fft.ifft2(data)
    residue = float(np.abs(raw.imag).max())
    if residue > imag_tol:
        raise SpectralConsistencyError(
            f"imaginary residue {residue:.3e} exceeds {imag_tol:.1e}; spectrum is not Hermitian"
        )
    real = raw.real
    return clamp01(real) if clamp else real


def butterworth_gain(d, params: ButterworthParams) -> np.ndarray:
    """Low-pass Butterworth gain 1 / (1 + (d/d0)^(2n)) for radial frequency d."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < 0):
        raise ValueError("radial frequency must be >= 0")
    return 1.0 / (1.0 + (d / params.cutoff) ** (2 * params.order))


def _radial_frequency(height: int, width: int) -> np.ndarray:
    # Signed bin offsets from the centered DC term, normalized per axis so
    # that 0.5 is Nyquist on both; the radius is isotropic in frequency
    # fraction rather than in raw bins.
    rows = (np.arange(height) - height // 2) / height
    cols = (np.arange(width) - width // 2) / width
    return np.hypot(rows[:, None], cols[None, :])


def lowpass_filter(img, params: ButterworthParams = ButterworthParams()) -> np.ndarray:
    """Butterworth low-pass in the frequency domain; output clamped to [0, 1]."""
    arr = as_gray_image(img)
    spec = dft2(arr)
    gain = butterworth_gain(_radial_frequency(*arr.shape), params)
    return idft2(Spectrum(spec.data * gain, dc_centered=True))


def spectrum_view(spec: Spectrum) -> np.ndarray:
    """Log-magnitude rendering of a spectrum, min-max normalized to [0, 1]."""
    mag = np.log1p(np.abs(spec.data))
    if not spec.dc_centered:
        mag = np.fft.fftshift(mag)
    lo, hi = float(mag.min()), float(mag.max())
    if hi <= lo:
        return np.zeros_like(mag)
    return (mag - lo) / (hi - lo)


def equalize_histogram(img) -> np.ndarray:
    """Global histogram equalization over 256 quantized levels.

    Level v maps to round(255 * (cdf(v) - cdf_min) / (N - cdf_min)) with
    cdf_min taken at the lowest occupied level. The mapping is monotone; an
    image occupying a single level is returned unchanged.
    """
    arr = as_gray_image(img)
    hist = histogram256(arr)
    occupied = np.flatnonzero(hist)
    if len(occupied) <= 1:
        return arr.copy()
    cdf = np.cumsum(hist)
    cdf_min = cdf[occupied[0]]
    total = arr.size
    lut = np.rint(255.0 * (cdf - cdf_min) / (total - cdf_min))
    lut = np.clip(lut, 0, 255)
    levels = np.rint(arr * 255.0).astype(np.int64)
    return lut[levels] / 255.0
