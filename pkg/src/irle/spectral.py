"""Fourier-domain structure statistics and the shift-invariant spectral loss.

All spectra are unnormalized 2-D DFT magnitudes with the zero frequency moved
to index ``(H // 2, W // 2)``. Radial bands split ``[0, R_max]`` evenly, with
``R_max = sqrt((H/2)^2 + (W/2)^2)``; band membership is decided in exact
integer arithmetic so no bin sits on the wrong side of a threshold because of
rounding.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .image import as_image


@dataclass(frozen=True)
class SiscConfig:
    k_bands: int = 8
    keep_lo: int = 2
    keep_hi: int = 5
    gamma: float = 1.0
    epsilon: float = 1e-8

    def __post_init__(self):
        if int(self.k_bands) != self.k_bands or self.k_bands < 2:
            raise ValueError(f"sisc.k_bands must be an integer >= 2, got {self.k_bands}")
        if not 0 <= self.keep_lo <= self.keep_hi < self.k_bands:
            raise ValueError(
                "sisc.keep_lo/keep_hi must satisfy 0 <= keep_lo <= keep_hi < k_bands, "
                f"got {self.keep_lo}, {self.keep_hi} with k_bands={self.k_bands}"
            )
        if not self.gamma >= 0:
            raise ValueError(f"sisc.gamma must be >= 0, got {self.gamma}")
        if not self.epsilon > 0:
            raise ValueError(f"sisc.epsilon must be > 0, got {self.epsilon}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BandPartition:
    height: int
    width: int
    k_bands: int
    thresholds: np.ndarray
    membership: np.ndarray

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.membership.ravel(), minlength=self.k_bands)


@dataclass
class SiscResult:
    total: float
    corr_term: float
    amp_term: float


class EmptyBandError(ValueError):
    def __init__(self, band: int):
        super().__init__(f"frequency band {band} contains no bins; use fewer bands or a larger image")
        self.band = band


def amplitude_spectrum(img) -> np.ndarray:
    """Per-channel ``|FFT2|`` with the DC term centered; shape ``(H, W, C)``."""
    img = as_image(img)
    spec = np.fft.fft2(img, axes=(0, 1))
    return np.fft.fftshift(np.abs(spec), axes=(0, 1))


def radial_bands(height: int, width: int, k: int) -> BandPartition:
    if k < 2:
        raise ValueError("need at least 2 bands")
    u = np.arange(height, dtype=np.int64) - height // 2
    v = np.arange(width, dtype=np.int64) - width // 2
    r2 = u[:, None] ** 2 + v[None, :] ** 2
    # band j holds r with j <= K * r / R_max < j + 1, i.e.
    # j^2 * (H^2 + W^2) <= 4 K^2 r^2 < (j+1)^2 * (H^2 + W^2)
    lhs = 4 * k * k * r2
    denom = height * height + width * width
    band = np.floor(np.sqrt(lhs / denom)).astype(np.int64)
    band -= (band * band * denom > lhs).astype(np.int64)
    band += ((band + 1) * (band + 1) * denom <= lhs).astype(np.int64)
    band = np.minimum(band, k - 1)
    r_max = float(np.sqrt(denom) / 2.0)
    thresholds = np.arange(k + 1) * (r_max / k)
    thresholds[-1] = r_max
    return BandPartition(height, width, k, thresholds, band)


def band_log_energy(spec, bands: BandPartition, epsilon: float = 1e-8) -> np.ndarray:
    """Log of the mean squared amplitude within each band (channels pooled)."""
    spec = np.asarray(spec, dtype=np.float64)
    if spec.ndim == 2:
        spec = spec[:, :, None]
    if spec.shape[:2] != bands.membership.shape:
        raise ValueError(f"spectrum shape {spec.shape[:2]} does not match bands {bands.membership.shape}")
    counts = bands.counts
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyBandError(int(empty[0]))
    power = (spec**2).mean(axis=2)
    sums = np.bincount(bands.membership.ravel(), weights=power.ravel(), minlength=bands.k_bands)
    return np.log(sums / counts + epsilon)


def cfc_matrix(e, epsilon: float = 1e-8) -> np.ndarray:
    """Normalized outer product of the centered band energies.

    Uses the population standard deviation, so ``trace == K`` for any
    non-constant vector (up to the epsilon in the denominator).
    """
    e = np.asarray(e, dtype=np.float64).ravel()
    if e.size < 2:
        raise ValueError("need at least 2 band energies")
    z = e - e.mean()
    var = np.mean(z * z)
    c = np.outer(z, z) / (var + epsilon)
    # outer() is symmetric in exact arithmetic; enforce it bit-for-bit
    return np.triu(c) + np.triu(c, 1).T


def freq_mask(cfg: SiscConfig) -> np.ndarray:
    keep = np.zeros(cfg.k_bands, dtype=bool)
    keep[cfg.keep_lo : cfg.keep_hi + 1] = True
    return np.outer(keep, keep).astype(np.float64)


def image_cfc(img, k: int, epsilon: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Band log-energies and CFC matrix of an image; returns ``(E, C)``."""
    spec = amplitude_spectrum(img)
    bands = radial_bands(spec.shape[0], spec.shape[1], k)
    e = band_log_energy(spec, bands, epsilon)
    return e, cfc_matrix(e, epsilon)


def sisc_loss(img1, img2, cfg: SiscConfig | None = None) -> SiscResult:
    """Masked CFC difference (Frobenius) plus ``gamma`` times mean amplitude L1."""
    cfg = cfg or SiscConfig()
    img1, img2 = as_image(img1), as_image(img2)
    if img1.shape != img2.shape:
        raise ValueError(f"shape mismatch: {img1.shape} vs {img2.shape}")
    a1, a2 = amplitude_spectrum(img1), amplitude_spectrum(img2)
    bands = radial_bands(img1.shape[0], img1.shape[1], cfg.k_bands)
    c1 = cfc_matrix(band_log_energy(a1, bands, cfg.epsilon), cfg.epsilon)
    c2 = cfc_matrix(band_log_energy(a2, bands, cfg.epsilon), cfg.epsilon)
    corr = float(np.linalg.norm(freq_mask(cfg) * (c1 - c2)))
    amp = float(np.mean(np.abs(a1 - a2)))
    return SiscResult(corr + cfg.gamma * amp, corr, amp)
