"""Neighbor sub-sampling: split one image into two half-resolution views.

Each non-overlapping 2x2 cell contributes one pixel to each view, drawn at two
distinct positions of the cell. Position indices run 0..3 in row-major order
within the cell: 0 = top-left, 1 = top-right, 2 = bottom-left, 3 = bottom-right.

Randomness comes from numpy's counter-based Philox bit generator seeded with
the caller's seed, so a (image, seed) pair always yields the same split.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .image import as_image

GENERATOR_ID = "numpy.random.Philox/Generator.integers"


@dataclass
class SubsamplePair:
    sub1: np.ndarray
    sub2: np.ndarray
    seed: int
    idx1: np.ndarray = field(repr=False)
    idx2: np.ndarray = field(repr=False)
    dropped_rows: int = 0
    dropped_cols: int = 0
    generator: str = GENERATOR_ID

    def metadata(self) -> dict:
        return {
            "seed": int(self.seed),
            "generator": self.generator,
            "dropped_rows": int(self.dropped_rows),
            "dropped_cols": int(self.dropped_cols),
            "sub_shape": list(self.sub1.shape),
        }


def cell_choices(shape: tuple[int, int], seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw the two distinct per-cell positions for a grid of ``shape`` cells.

    The first position is uniform on 0..3; the second is the first plus a
    uniform offset in 1..3 (mod 4), which makes the pair uniform over ordered
    pairs of distinct positions.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    first = rng.integers(0, 4, size=shape)
    offset = rng.integers(1, 4, size=shape)
    return first, (first + offset) % 4


def neighbor_subsample(img, seed: int) -> SubsamplePair:
    img = as_image(img)
    h, w, c = img.shape
    if h < 2 or w < 2:
        raise ValueError(f"image must be at least 2x2 for sub-sampling, got {h}x{w}")
    dr, dc = h % 2, w % 2
    if dr or dc:
        warnings.warn(
            f"odd image size {h}x{w}: dropping {dr} trailing row(s) and {dc} trailing column(s)",
            stacklevel=2,
        )
        img = img[: h - dr, : w - dc]
    hh, ww = img.shape[0] // 2, img.shape[1] // 2
    # (hh, ww, 4, C): the four cell members in row-major order
    cells = img.reshape(hh, 2, ww, 2, c).transpose(0, 2, 1, 3, 4).reshape(hh, ww, 4, c)
    idx1, idx2 = cell_choices((hh, ww), seed)
    sub1 = np.take_along_axis(cells, idx1[:, :, None, None], axis=2)[:, :, 0]
    sub2 = np.take_along_axis(cells, idx2[:, :, None, None], axis=2)[:, :, 0]
    return SubsamplePair(sub1, sub2, seed, idx1, idx2, dr, dc)
