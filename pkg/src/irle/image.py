"""Raster primitives shared by every other module.

Images are plain ``float64`` numpy arrays of shape ``(H, W, C)`` with ``C`` in
``{1, 3}`` and samples in ``[0, 1]``. Single-channel maps (luminance, gains,
weights) are ``(H, W)`` arrays.
"""
from __future__ import annotations

import math
import os

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

# Rec.601 luma weights
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class ImageDecodeError(OSError):
    """Raised when a file cannot be decoded as an 8-bit grayscale/RGB PNG."""


def as_image(arr) -> np.ndarray:
    """Coerce ``arr`` to a float64 ``(H, W, C)`` image, adding a channel axis to 2-D input."""
    img = np.asarray(arr, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"expected (H, W) or (H, W, 1|3) array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite samples")
    return img


def load_image(path) -> np.ndarray:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode not in ("L", "RGB"):
                raise ImageDecodeError(f"{path}: unsupported mode {mode!r} (need 8-bit L or RGB)")
            data = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise ImageDecodeError(f"{path}: cannot decode image ({exc})") from exc
    except ImageDecodeError:
        raise
    except OSError as exc:
        # truncated streams surface as plain OSError from Pillow
        raise ImageDecodeError(f"{path}: cannot decode image ({exc})") from exc
    return as_image(data.astype(np.float64) / 255.0)


def to_uint8(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    return np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_image(img, path) -> None:
    """Write ``img`` as an 8-bit PNG; samples are clipped to [0, 1] then rounded."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    data = to_uint8(arr)
    mode = "L" if data.ndim == 2 else "RGB"
    Image.fromarray(data, mode=mode).save(path, format="PNG")


def luminance(img) -> np.ndarray:
    img = as_image(img)
    if img.shape[2] == 1:
        return img[:, :, 0].copy()
    return img @ LUMA_WEIGHTS


def saturation(img) -> np.ndarray:
    img = as_image(img)
    if img.shape[2] != 3:
        raise ValueError("saturation needs a 3-channel image")
    return img.max(axis=2) - img.min(axis=2)


def quantile(values, q: float) -> float:
    """Lower empirical quantile: the element at sorted index ``floor(q * (n - 1))``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    flat = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if flat.size == 0:
        raise ValueError("quantile of an empty map")
    return float(flat[math.floor(q * (flat.size - 1))])


def patch_max(img, patch: int) -> np.ndarray:
    """Tile-wise maximum over channels, replicated back to full resolution.

    Tiles are non-overlapping ``patch x patch`` blocks anchored at the top-left;
    tiles on the bottom/right edges may be smaller.
    """
    if patch < 1:
        raise ValueError("patch must be >= 1")
    chmax = as_image(img).max(axis=2)
    h, w = chmax.shape
    th, tw = -(-h // patch), -(-w // patch)
    padded = np.full((th * patch, tw * patch), -np.inf)
    padded[:h, :w] = chmax
    tiles = padded.reshape(th, patch, tw, patch).max(axis=(1, 3))
    full = np.repeat(np.repeat(tiles, patch, axis=0), patch, axis=1)
    return full[:h, :w]


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ``ceil(4 * sigma)``."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    radius = math.ceil(4.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_filter(map2d, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with edge replication at the borders."""
    arr = np.asarray(map2d, dtype=np.float64)
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(arr, k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    # a convex combination cannot leave the input range; clamp away rounding drift
    return np.clip(out, arr.min(), arr.max())
