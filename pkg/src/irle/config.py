"""JSON run configuration with strict key checking."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .losses import LossWeights
from .pseudo_gt import PseudoGtConfig
from .spectral import SiscConfig


class ConfigError(ValueError):
    """Invalid or unknown configuration field; the message names the field."""


@dataclass(frozen=True)
class GafmConfig:
    seed: int = 1
    hidden: int = 16
    scale: float = 0.1
    weights: str | None = None

    def __post_init__(self):
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"gafm.seed must be a non-negative integer, got {self.seed}")
        if int(self.hidden) != self.hidden or self.hidden < 1:
            raise ValueError(f"gafm.hidden must be an integer >= 1, got {self.hidden}")
        if not self.scale >= 0:
            raise ValueError(f"gafm.scale must be >= 0, got {self.scale}")


@dataclass(frozen=True)
class AnalysisConfig:
    mode: str = "mean"
    grid_points: int = 256
    bandwidth: float | None = None

    def __post_init__(self):
        if self.mode not in ("mean", "pixel"):
            raise ValueError(f"analysis.mode must be 'mean' or 'pixel', got {self.mode!r}")
        if int(self.grid_points) != self.grid_points or self.grid_points < 2:
            raise ValueError(f"analysis.grid_points must be an integer >= 2, got {self.grid_points}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError(f"analysis.bandwidth must be > 0 or null, got {self.bandwidth}")


@dataclass(frozen=True)
class RunConfig:
    pseudo_gt: PseudoGtConfig = field(default_factory=PseudoGtConfig)
    sisc: SiscConfig = field(default_factory=SiscConfig)
    weights: LossWeights = field(default_factory=LossWeights)
    gafm: GafmConfig = field(default_factory=GafmConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {
    "pseudo_gt": PseudoGtConfig,
    "sisc": SiscConfig,
    "weights": LossWeights,
    "gafm": GafmConfig,
    "analysis": AnalysisConfig,
}


def _build(section: str, cls, raw) -> object:
    if not isinstance(raw, dict):
        raise ConfigError(f"{section}: expected an object, got {type(raw).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{section}.{unknown[0]}: unknown key")
    for key, value in raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float, str, type(None))):
            raise ConfigError(f"{section}.{key}: unsupported value {value!r}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = sorted(set(data) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown section")
    return RunConfig(**{name: _build(name, cls, data[name]) for name, cls in _SECTIONS.items() if name in data})


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(data)
