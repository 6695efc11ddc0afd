"""Gain-adaptive feature modulation with fixed or seeded weights.

Feature tensors are ``(C, H, W)`` float arrays. An illumination estimate is
turned into a log gain map, pushed through a 3x3 "smoother" convolution and a
1x1 projection, and the projection's two halves act as a per-pixel scale and
shift on the features: ``F * (1 + gamma) + delta``.

All 3x3 convolutions pad by edge replication.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

NORM_EPS = 1e-5
WEIGHT_MAGIC = b"IRLEW1\0\0"


@dataclass(frozen=True)
class GafmParams:
    """Adapter (3x3, 1 -> hidden) and projection (1x1, hidden -> 2C) weights."""

    adapter_weight: np.ndarray  # (hidden, 1, 3, 3)
    adapter_bias: np.ndarray  # (hidden,)
    proj_weight: np.ndarray  # (2C, hidden)
    proj_bias: np.ndarray  # (2C,)
    seed: int | None = None

    def __post_init__(self):
        hidden = self.adapter_weight.shape[0]
        if self.adapter_weight.shape != (hidden, 1, 3, 3):
            raise ValueError(f"adapter_weight must be (hidden, 1, 3, 3), got {self.adapter_weight.shape}")
        if self.adapter_bias.shape != (hidden,):
            raise ValueError(f"adapter_bias must be ({hidden},), got {self.adapter_bias.shape}")
        if self.proj_weight.ndim != 2 or self.proj_weight.shape[1] != hidden or self.proj_weight.shape[0] % 2:
            raise ValueError(f"proj_weight must be (2C, {hidden}), got {self.proj_weight.shape}")
        if self.proj_bias.shape != (self.proj_weight.shape[0],):
            raise ValueError(f"proj_bias must be ({self.proj_weight.shape[0]},), got {self.proj_bias.shape}")
        for arr in (self.adapter_weight, self.adapter_bias, self.proj_weight, self.proj_bias):
            if not np.all(np.isfinite(arr)):
                raise ValueError("GAFM weights must be finite")

    @property
    def hidden(self) -> int:
        return self.adapter_weight.shape[0]

    @property
    def channels(self) -> int:
        return self.proj_weight.shape[0] // 2

    @classmethod
    def zeros(cls, channels: int, hidden: int = 16) -> "GafmParams":
        return cls(
            np.zeros((hidden, 1, 3, 3)),
            np.zeros(hidden),
            np.zeros((2 * channels, hidden)),
            np.zeros(2 * channels),
        )

    @classmethod
    def random(cls, channels: int, hidden: int = 16, seed: int = 0, scale: float = 0.1) -> "GafmParams":
        rng = np.random.default_rng(seed)
        return cls(
            rng.normal(0.0, scale, (hidden, 1, 3, 3)),
            rng.normal(0.0, scale, hidden),
            rng.normal(0.0, scale, (2 * channels, hidden)),
            rng.normal(0.0, scale, 2 * channels),
            seed=seed,
        )


@dataclass(frozen=True)
class ConvParams:
    """A 3x3 convolution ``C -> C`` with bias."""

    weight: np.ndarray  # (C, C, 3, 3)
    bias: np.ndarray  # (C,)
    seed: int | None = field(default=None)

    def __post_init__(self):
        c = self.weight.shape[0]
        if self.weight.shape != (c, c, 3, 3) or self.bias.shape != (c,):
            raise ValueError(f"conv weight/bias must be (C, C, 3, 3)/(C,), got {self.weight.shape}/{self.bias.shape}")

    @classmethod
    def zeros(cls, channels: int) -> "ConvParams":
        return cls(np.zeros((channels, channels, 3, 3)), np.zeros(channels))

    @classmethod
    def random(cls, channels: int, seed: int = 0, scale: float = 0.1) -> "ConvParams":
        rng = np.random.default_rng(seed)
        return cls(rng.normal(0.0, scale, (channels, channels, 3, 3)), rng.normal(0.0, scale, channels), seed)


def gain_prior(l_hat, epsilon: float = 1e-8) -> np.ndarray:
    return 1.0 / (np.asarray(l_hat, dtype=np.float64) + epsilon)


def log_gain(g_prior) -> np.ndarray:
    g = np.asarray(g_prior, dtype=np.float64)
    if np.any(g <= 0):
        raise ValueError("log_gain needs a strictly positive gain map")
    return np.log(g)


def pixel_unshuffle(t, factor: int) -> np.ndarray:
    """``(C, H, W) -> (C * f^2, H / f, W / f)``; channel ``c*f*f + i*f + j`` holds offset ``(i, j)``."""
    t = np.asarray(t)
    c, h, w = t.shape
    if h % factor or w % factor:
        raise ValueError(f"spatial size {h}x{w} not divisible by {factor}")
    f = factor
    return t.reshape(c, h // f, f, w // f, f).transpose(0, 2, 4, 1, 3).reshape(c * f * f, h // f, w // f)


def pixel_shuffle(t, factor: int) -> np.ndarray:
    t = np.asarray(t)
    cf, h, w = t.shape
    f = factor
    if cf % (f * f):
        raise ValueError(f"{cf} channels not divisible by {f * f}")
    c = cf // (f * f)
    return t.reshape(c, f, f, h, w).transpose(0, 3, 1, 4, 2).reshape(c, h * f, w * f)


def conv3x3(x, weight, bias) -> np.ndarray:
    """Same-size 3x3 cross-correlation with edge-replicated borders.

    ``x`` is ``(Cin, H, W)``, ``weight`` is ``(Cout, Cin, 3, 3)``.
    """
    x = np.asarray(x, dtype=np.float64)
    _, h, w = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)), mode="edge")
    out = np.zeros((weight.shape[0], h, w))
    for dy in range(3):
        for dx in range(3):
            out += np.einsum("oi,ihw->ohw", weight[:, :, dy, dx], xp[:, dy : dy + h, dx : dx + w])
    return out + bias[:, None, None]


def smoother_adapter(g_log, params: GafmParams) -> np.ndarray:
    g = np.asarray(g_log, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError(f"log gain must be a 2-D map, got shape {g.shape}")
    return conv3x3(g[None], params.adapter_weight, params.adapter_bias)


def affine_params(g_log, params: GafmParams) -> tuple[np.ndarray, np.ndarray]:
    """Scale and shift maps, each ``(C, H, W)``."""
    hidden = smoother_adapter(g_log, params)
    proj = np.einsum("oh,hyx->oyx", params.proj_weight, hidden) + params.proj_bias[:, None, None]
    c = params.channels
    return proj[:c], proj[c:]


def gafm_modulate(f, g_log, params: GafmParams) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    g_log = np.asarray(g_log, dtype=np.float64)
    if f.shape[1:] != g_log.shape:
        raise ValueError(f"feature spatial size {f.shape[1:]} != gain size {g_log.shape}")
    if f.shape[0] != params.channels:
        raise ValueError(f"projection yields 2x{params.channels} channels but features have {f.shape[0]}")
    gamma, delta = affine_params(g_log, params)
    return f * (1.0 + gamma) + delta


def gafm_modulate_unshuffled(f, g_log, params: GafmParams, factor: int) -> np.ndarray:
    """Modulate after pixel-unshuffling features and gain identically.

    Each of the ``factor**2`` sub-lattices is modulated by its own sub-sampled
    gain map, so feature and gain stay at matching source pixels. The result is
    returned in the unshuffled ``(C * f^2, H / f, W / f)`` layout.
    """
    f = np.asarray(f, dtype=np.float64)
    c = f.shape[0]
    fu = pixel_unshuffle(f, factor)
    gu = pixel_unshuffle(np.asarray(g_log, dtype=np.float64)[None], factor)
    s = factor * factor
    out = np.empty_like(fu)
    for sub in range(s):
        idx = np.arange(c) * s + sub
        out[idx] = gafm_modulate(fu[idx], gu[sub], params)
    return out


def channel_standardize(f, eps: float = NORM_EPS) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    mean = f.mean(axis=(1, 2), keepdims=True)
    var = f.var(axis=(1, 2), keepdims=True)
    return (f - mean) / np.sqrt(var + eps)


def gain_aware_block(f, g_log, params: GafmParams, conv_params: ConvParams) -> np.ndarray:
    """Norm -> modulation -> 3x3 conv, added back onto the input."""
    f = np.asarray(f, dtype=np.float64)
    branch = gafm_modulate(channel_standardize(f), g_log, params)
    branch = conv3x3(branch, conv_params.weight, conv_params.bias)
    return f + branch


def denoise_loss(r_hat, i_clean_hat) -> float:
    a = np.asarray(r_hat, dtype=np.float64)
    b = np.asarray(i_clean_hat, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))


# Weight file layout: 8-byte magic, little-endian uint32 header length, a UTF-8
# JSON header listing tensor names and shapes in storage order, then the
# tensors as contiguous little-endian float32.
_TENSOR_ORDER = (
    ("gafm", "adapter_weight"),
    ("gafm", "adapter_bias"),
    ("gafm", "proj_weight"),
    ("gafm", "proj_bias"),
    ("conv", "weight"),
    ("conv", "bias"),
)


def save_weights(path, params: GafmParams, conv_params: ConvParams) -> None:
    tensors = []
    for owner, name in _TENSOR_ORDER:
        src = params if owner == "gafm" else conv_params
        tensors.append((f"{owner}.{name}", np.asarray(getattr(src, name), dtype="<f4")))
    header = {
        "format": "irle-gafm-weights",
        "version": 1,
        "dtype": "float32-le",
        "seed": params.seed,
        "tensors": [{"name": n, "shape": list(a.shape)} for n, a in tensors],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(WEIGHT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, a in tensors:
            fh.write(a.tobytes(order="C"))


def load_weights(path) -> tuple[GafmParams, ConvParams]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != WEIGHT_MAGIC or len(raw) < 12:
        raise ValueError(f"{path}: not an IRLE weight file")
    (hlen,) = struct.unpack("<I", raw[8:12])
    try:
        header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: corrupt weight header") from exc
    offset = 12 + hlen
    arrays = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) if shape else 1
        chunk = raw[offset : offset + 4 * n]
        if len(chunk) != 4 * n:
            raise ValueError(f"{path}: truncated tensor {entry['name']}")
        arrays[entry["name"]] = np.frombuffer(chunk, dtype="<f4").astype(np.float64).reshape(shape)
        offset += 4 * n
    missing = [f"{o}.{n}" for o, n in _TENSOR_ORDER if f"{o}.{n}" not in arrays]
    if missing:
        raise ValueError(f"{path}: missing tensors {missing}")
    params = GafmParams(
        arrays["gafm.adapter_weight"],
        arrays["gafm.adapter_bias"],
        arrays["gafm.proj_weight"],
        arrays["gafm.proj_bias"],
        seed=header.get("seed"),
    )
    conv = ConvParams(arrays["conv.weight"], arrays["conv.bias"], header.get("seed"))
    return params, conv
