"""Pseudo ground-truth synthesis from a single low-light frame.

The pipeline runs, in order: quantile highlight mask, gray-world gains on the
masked region, white balance, patch-max rough gain, Gaussian-smoothed target
gain, brightening, and luminance-dependent shadow desaturation.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .image import as_image, gaussian_filter, luminance, patch_max, quantile


@dataclass(frozen=True)
class PseudoGtConfig:
    q: float = 0.95
    patch: int = 16
    sigma: float = 25.0
    theta_min: float = 0.05
    theta_max: float = 0.25
    epsilon: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"pseudo_gt.q must lie in (0, 1), got {self.q}")
        if int(self.patch) != self.patch or self.patch < 1:
            raise ValueError(f"pseudo_gt.patch must be an integer >= 1, got {self.patch}")
        if not self.sigma > 0:
            raise ValueError(f"pseudo_gt.sigma must be > 0, got {self.sigma}")
        if not 0.0 <= self.theta_min < self.theta_max <= 1.0:
            raise ValueError(
                "pseudo_gt.theta_min/theta_max must satisfy 0 <= theta_min < theta_max <= 1, "
                f"got {self.theta_min}, {self.theta_max}"
            )
        if not self.epsilon > 0:
            raise ValueError(f"pseudo_gt.epsilon must be > 0, got {self.epsilon}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class PseudoGtBundle:
    """Every intermediate of :func:`generate_pseudo_gt`."""

    mask: np.ndarray
    gains: np.ndarray
    wb_image: np.ndarray
    rough_gain: np.ndarray
    target_gain: np.ndarray
    bright_image: np.ndarray
    chroma_weight: np.ndarray
    pseudo_gt: np.ndarray


def white_balance_mask(y, q: float) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    return (y >= quantile(y, q)).astype(np.float64)


def white_balance_gains(img, mask, epsilon: float = 1e-8) -> np.ndarray:
    """Per-channel gains ``mean(mu) / (mu_c + eps)`` from the masked channel means."""
    img = as_image(img)
    if img.shape[2] != 3:
        raise ValueError("white balance needs a 3-channel image")
    sel = np.asarray(mask) > 0.5
    if not sel.any():
        raise ValueError("white-balance mask selects no pixels")
    mu = img[sel].mean(axis=0)
    return mu.mean() / (mu + epsilon)


def rough_gain(img, patch: int, epsilon: float) -> np.ndarray:
    return 1.0 / (patch_max(img, patch) + epsilon)


def target_gain(rough, sigma: float) -> np.ndarray:
    return gaussian_filter(rough, sigma)


def brighten(wb_image, gain) -> np.ndarray:
    wb_image = as_image(wb_image)
    return np.clip(wb_image * np.asarray(gain)[:, :, None], 0.0, 1.0)


def chroma_weight(y_bright, theta_min: float, theta_max: float) -> np.ndarray:
    if not theta_min < theta_max:
        raise ValueError("theta_min must be < theta_max")
    y = np.asarray(y_bright, dtype=np.float64)
    return np.clip((y - theta_min) / (theta_max - theta_min), 0.0, 1.0)


def desaturate_blend(bright, w_c) -> np.ndarray:
    """Pull chroma toward luminance: ``Y + w_c * (I - Y)``."""
    bright = as_image(bright)
    if bright.shape[2] != 3:
        raise ValueError("desaturation needs a 3-channel image")
    y = luminance(bright)[:, :, None]
    return y + np.asarray(w_c)[:, :, None] * (bright - y)


def generate_pseudo_gt(img, cfg: PseudoGtConfig | None = None) -> PseudoGtBundle:
    cfg = cfg or PseudoGtConfig()
    img = as_image(img)
    if img.shape[2] != 3:
        raise ValueError("pseudo-GT generation needs a 3-channel image")

    mask = white_balance_mask(luminance(img), cfg.q)
    gains = white_balance_gains(img, mask, cfg.epsilon)
    wb = img * gains
    g_rough = rough_gain(wb, cfg.patch, cfg.epsilon)
    g_target = target_gain(g_rough, cfg.sigma)
    bright = brighten(wb, g_target)
    w_c = chroma_weight(luminance(bright), cfg.theta_min, cfg.theta_max)
    pseudo = desaturate_blend(bright, w_c)
    return PseudoGtBundle(
        mask=mask,
        gains=gains,
        wb_image=wb,
        rough_gain=g_rough,
        target_gain=g_target,
        bright_image=bright,
        chroma_weight=w_c,
        pseudo_gt=pseudo,
    )
