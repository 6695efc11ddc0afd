"""Luminance-distribution statistics over image collections."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from .image import load_image, luminance

log = logging.getLogger(__name__)

BANDWIDTH_FLOOR = 1e-3
# grid half-width in bandwidths; +-4h leaves < 1e-4 of each kernel's mass outside
GRID_SPAN = 4.0


@dataclass
class LuminanceSampleSet:
    samples: np.ndarray
    source: str = ""
    failures: tuple = ()

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).ravel()

    def __len__(self):
        return self.samples.size


@dataclass
class DensityCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


def image_luminance_samples(path, mode: str = "mean") -> np.ndarray:
    y = luminance(load_image(path))
    if mode == "mean":
        return np.array([y.mean()])
    if mode == "pixel":
        return y.ravel()
    raise ValueError(f"unknown luminance mode {mode!r} (use 'mean' or 'pixel')")


def mean_luminance_set(paths, label: str = "", mode: str = "mean") -> LuminanceSampleSet:
    """One mean-luminance sample per readable image (``mode='pixel'`` pools every pixel).

    Unreadable files are logged and skipped; the call fails only when none load.
    """
    chunks, failures = [], []
    for p in paths:
        try:
            chunks.append(image_luminance_samples(p, mode))
        except OSError as exc:
            log.warning("skipping %s: %s", p, exc)
            failures.append((str(p), str(exc)))
    if not chunks:
        detail = "; ".join(f"{p}: {e}" for p, e in failures) or "no paths given"
        raise OSError(f"no readable images for set {label!r} ({detail})")
    return LuminanceSampleSet(np.concatenate(chunks), label, tuple(failures))


def _as_samples(x) -> np.ndarray:
    arr = x.samples if isinstance(x, LuminanceSampleSet) else np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("Wasserstein distance of an empty sample set")
    return arr


def wasserstein_1d(xs, ys) -> float:
    """W1 between two empirical distributions with uniform weights.

    Integrates ``|F_x^-1(t) - F_y^-1(t)|`` over ``t`` in (0, 1): both quantile
    functions are step functions, constant between consecutive breakpoints
    ``i/n`` and ``j/m``, so the integral is an exact finite sum.
    """
    x = np.sort(_as_samples(xs))
    y = np.sort(_as_samples(ys))
    n, m = x.size, y.size
    if n == m:
        return float(np.mean(np.abs(x - y)))
    # breakpoints i*m and j*n on the common integer scale n*m
    cuts = np.union1d(np.arange(n + 1) * m, np.arange(m + 1) * n)
    lo, hi = cuts[:-1], cuts[1:]
    # within (lo, hi) the x-quantile index is lo // m and the y-quantile index lo // n
    return float(np.sum((hi - lo) * np.abs(x[lo // m] - y[lo // n])) / (n * m))


def silverman_bandwidth(samples) -> float:
    s = np.asarray(samples, dtype=np.float64)
    sd = float(np.std(s, ddof=1)) if s.size > 1 else 0.0
    return max(1.06 * sd * s.size ** (-0.2), BANDWIDTH_FLOOR)


def kde(samples, grid_points: int = 256, bandwidth: float | None = None) -> DensityCurve:
    """Gaussian KDE on a uniform grid spanning ``[min - 4h, max + 4h]``."""
    s = _as_samples(samples)
    if bandwidth is None:
        if s.size < 2:
            raise ValueError("automatic bandwidth needs at least 2 samples")
        h = silverman_bandwidth(s)
    else:
        h = float(bandwidth)
        if not h > 0:
            raise ValueError("bandwidth must be > 0")
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    grid = np.linspace(s.min() - GRID_SPAN * h, s.max() + GRID_SPAN * h, grid_points)
    z = (grid[:, None] - s[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (s.size * h * math.sqrt(2.0 * math.pi))
    return DensityCurve(grid, density, h)


def pairwise_wasserstein(sets) -> np.ndarray:
    k = len(sets)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = wasserstein_1d(sets[i], sets[j])
    return out


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".9g")


def csv_text(rows, header) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([str(h) for h in header])
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def export_csv(data, path, header=None) -> None:
    """Write a curve, vector or matrix as CSV with a header row.

    A :class:`DensityCurve` becomes ``x,density`` rows; a 2-D array is written
    row-major under a header of column indices; a 1-D array is one row under
    its indices. Floats use 9 significant digits.
    """
    if isinstance(data, DensityCurve):
        rows = zip(data.grid, data.density)
        header = header or ["x", "density"]
    else:
        arr = np.asarray(data)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2:
            raise ValueError(f"cannot export array of shape {arr.shape}")
        rows = arr.tolist()
        header = header or list(range(arr.shape[1]))
    text = csv_text(rows, header)
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
