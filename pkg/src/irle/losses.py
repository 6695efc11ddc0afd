"""Spatial-domain Stage-1 objectives and the combined loss report.

Every L1 norm here is a mean over elements, so values do not grow with
resolution. The perceptual term uses a pluggable feature extractor; the
default is a fixed finite-difference gradient pyramid.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Protocol, Sequence

import numpy as np

from .image import as_image
from .pseudo_gt import PseudoGtBundle
from .spectral import SiscConfig, sisc_loss


@dataclass(frozen=True)
class LossWeights:
    lambda_rec: float = 1.0
    lambda_guide: float = 1.0
    lambda_loc: float = 0.5
    lambda_glo: float = 0.5
    lambda_iap: float = 0.1
    epsilon: float = 1e-8
    pool: int = 16

    def __post_init__(self):
        for name in ("lambda_rec", "lambda_guide", "lambda_loc", "lambda_glo", "lambda_iap"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"weights.{name} must be >= 0, got {getattr(self, name)}")
        if not self.epsilon > 0:
            raise ValueError(f"weights.epsilon must be > 0, got {self.epsilon}")
        if int(self.pool) != self.pool or self.pool < 1:
            raise ValueError(f"weights.pool must be an integer >= 1, got {self.pool}")

    def to_dict(self) -> dict:
        return asdict(self)


class FeatureExtractor(Protocol):
    def __call__(self, img: np.ndarray) -> Sequence[np.ndarray]: ...


class GradientPyramid:
    """Horizontal and vertical forward differences at ``levels`` scales.

    Level 0 is full resolution; each further level is a 2x2 box average of the
    previous one (trailing odd row/column dropped). The map is linear in its
    input, which is what makes the IAP loss exactly scale invariant.
    """

    def __init__(self, levels: int = 3):
        if levels < 1:
            raise ValueError("levels must be >= 1")
        self.levels = levels

    def __call__(self, img) -> list[np.ndarray]:
        x = as_image(img)
        feats = []
        for level in range(self.levels):
            feats.append(np.diff(x, axis=1))
            feats.append(np.diff(x, axis=0))
            if level + 1 < self.levels:
                h, w = x.shape[0] // 2, x.shape[1] // 2
                if h < 2 or w < 2:
                    break
                x = x[: 2 * h, : 2 * w].reshape(h, 2, w, 2, -1).mean(axis=(1, 3))
        return feats


@dataclass
class Stage1LossReport:
    rec: float
    guide: float
    color_local: float
    color_global: float
    iap: float
    sisc: float
    total: float
    k: float
    sisc_corr: float = 0.0
    sisc_amp: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _same_shape(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def iap_scale_k(r_hat, i_low, epsilon: float = 1e-8) -> float:
    """Least-squares brightness alignment ``<R, I> / (|R|^2 + eps)``."""
    r = np.asarray(r_hat, dtype=np.float64)
    i = np.asarray(i_low, dtype=np.float64)
    _same_shape(r, i)
    return float(np.vdot(r, i) / (np.vdot(r, r) + epsilon))


def iap_loss(r_hat, i_low, phi: FeatureExtractor | None = None, epsilon: float = 1e-8) -> float:
    phi = phi or GradientPyramid()
    r = as_image(r_hat)
    i = as_image(i_low)
    k = iap_scale_k(r, i, epsilon)
    # k * R may leave [0, 1]; clipping would break the optimality of k
    return float(sum(np.mean(np.abs(fa - fb)) for fa, fb in zip(phi(k * r), phi(i))))


def rec_loss(r_hat, l, i_low) -> float:
    r = as_image(r_hat)
    i = as_image(i_low)
    _same_shape(r, i)
    return float(np.mean(np.abs(r * np.asarray(l)[:, :, None] - i)))


def guide_loss(l, g_target, epsilon: float = 1e-8) -> float:
    l = np.asarray(l, dtype=np.float64)
    g = np.asarray(g_target, dtype=np.float64)
    _same_shape(l, g)
    return float(np.mean(np.abs(l - 1.0 / (g + epsilon))))


def avg_pool(img, pool: int) -> np.ndarray:
    """Non-overlapping box means; edge tiles may be smaller. Returns ``(th, tw, C)``."""
    img = as_image(img)
    h, w, c = img.shape
    th, tw = -(-h // pool), -(-w // pool)
    sums = np.zeros((th * pool, tw * pool, c))
    counts = np.zeros((th * pool, tw * pool, 1))
    sums[:h, :w] = img
    counts[:h, :w] = 1.0
    sums = sums.reshape(th, pool, tw, pool, c).sum(axis=(1, 3))
    counts = counts.reshape(th, pool, tw, pool, 1).sum(axis=(1, 3))
    return sums / counts


def color_loss(r_hat, i_pseudo, weights: LossWeights | None = None, pool: int | None = None) -> tuple[float, float]:
    """Unweighted ``(local, global)`` color terms.

    ``local`` is the mean of ``1 - cos`` between pooled RGB vectors, with each
    norm floored at ``epsilon``; ``global`` is the gray-world deviation of the
    prediction's channel means.
    """
    weights = weights or LossWeights()
    pool = pool or weights.pool
    r = as_image(r_hat)
    p = as_image(i_pseudo)
    _same_shape(r, p)
    if r.shape[2] != 3:
        raise ValueError("color loss needs 3-channel images")
    a, b = avg_pool(r, pool), avg_pool(p, pool)
    eps = weights.epsilon
    na = np.maximum(np.linalg.norm(a, axis=2), eps)
    nb = np.maximum(np.linalg.norm(b, axis=2), eps)
    cos = np.sum(a * b, axis=2) / (na * nb)
    local = float(np.mean(1.0 - cos))
    mu = r.mean(axis=(0, 1))
    glob = float(np.sum(np.abs(mu - mu.mean())))
    return local, glob


def stage1_loss(
    r_hat1,
    r_hat2,
    l,
    i_low,
    bundle: PseudoGtBundle,
    weights: LossWeights | None = None,
    sisc_cfg: SiscConfig | None = None,
    phi: FeatureExtractor | None = None,
    r_full=None,
) -> Stage1LossReport:
    """Assemble the Stage-1 objective.

    The SISC term compares the two sub-sample predictions. The spatial terms
    use ``r_full`` when given, else ``r_hat1``; ``l``, ``i_low`` and ``bundle``
    must match whichever one is used.
    """
    weights = weights or LossWeights()
    sisc_cfg = sisc_cfg or SiscConfig()
    r = as_image(r_hat1 if r_full is None else r_full)
    eps = weights.epsilon

    rec = rec_loss(r, l, i_low)
    guide = guide_loss(l, bundle.target_gain, eps)
    local, glob = color_loss(r, bundle.pseudo_gt, weights)
    k = iap_scale_k(r, as_image(i_low), eps)
    iap = iap_loss(r, i_low, phi, eps)
    s = sisc_loss(r_hat1, r_hat2, sisc_cfg)

    total = (
        weights.lambda_rec * rec
        + weights.lambda_guide * guide
        + weights.lambda_loc * local
        + weights.lambda_glo * glob
        + weights.lambda_iap * iap
        + s.total
    )
    return Stage1LossReport(rec, guide, local, glob, iap, s.total, total, k, s.corr_term, s.amp_term)


def recombine(report: Stage1LossReport, weights: LossWeights) -> float:
    """Recompute the total from a report's components."""
    return (
        weights.lambda_rec * report.rec
        + weights.lambda_guide * report.guide
        + weights.lambda_loc * report.color_local
        + weights.lambda_glo * report.color_global
        + weights.lambda_iap * report.iap
        + report.sisc
    )

