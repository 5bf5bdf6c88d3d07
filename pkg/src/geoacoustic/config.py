"""Pipeline configuration: every tunable default in one validated document."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .topology import ValidityConfig

CONFIG_ENV = "GEOACOUSTIC_CONFIG"

# keys that change throughput but never the output bytes
_RUNTIME_KEYS = frozenset({"workers"})


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    voxel_resolution: int = 64
    thickness_resolution: int = 32
    genus_max: int = 3
    thickness_min: float = 0.05
    spectrum_tolerance: float = 1e-8
    expected_rigid_modes: int = 6
    num_modes: int = 64
    rigid_tol: float = 1e-6
    shift_factor: float = 1e-3
    mass_mode: str = "consistent"
    sample_rate: int = 32000
    duration: float = 1.0
    peak: float = 0.9
    hollow_resolution: int = 64
    hollow_max_resolution: int = 128
    thickness_ratio_low: float = 0.3
    thickness_ratio_high: float = 0.7
    default_material: str = "steel"
    workers: int = 1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            want = {"int": int, "float": float, "str": str}[f.type]
            if want is float and isinstance(v, int) and not isinstance(v, bool):
                object.__setattr__(self, f.name, float(v))
            elif not isinstance(v, want) or isinstance(v, bool):
                raise ConfigError(f"{f.name}: expected {f.type}, got {type(v).__name__}")
        if not 8 <= self.voxel_resolution <= 256:
            raise ConfigError("voxel_resolution must lie in [8, 256]")
        if not 8 <= self.thickness_resolution <= 256:
            raise ConfigError("thickness_resolution must lie in [8, 256]")
        if not 8 <= self.hollow_resolution <= self.hollow_max_resolution <= 256:
            raise ConfigError("need 8 <= hollow_resolution <= hollow_max_resolution <= 256")
        if self.genus_max < 0 or self.thickness_min < 0:
            raise ConfigError("thresholds must be non-negative")
        if self.num_modes < 1 or self.expected_rigid_modes < 0:
            raise ConfigError("num_modes must be positive")
        if not (self.spectrum_tolerance > 0 and self.rigid_tol > 0 and self.shift_factor > 0):
            raise ConfigError("tolerances and shift factor must be positive")
        if self.mass_mode not in ("consistent", "lumped"):
            raise ConfigError(f"unknown mass_mode {self.mass_mode!r}")
        if self.sample_rate < 1 or not self.duration > 0 or not 0 < self.peak <= 1:
            raise ConfigError("invalid audio settings")
        if not 0 < self.thickness_ratio_low <= self.thickness_ratio_high < 1:
            raise ConfigError("thickness ratio range must satisfy 0 < low <= high < 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)

    def physics_dict(self) -> dict:
        """Every key that can influence outputs (runtime-only keys dropped)."""
        return {k: v for k, v in self.to_dict().items() if k not in _RUNTIME_KEYS}

    @property
    def hash(self) -> str:
        """sha256 of the canonical JSON of ``physics_dict``; independent of key order."""
        doc = json.dumps(self.physics_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(doc.encode()).hexdigest()

    def with_(self, **changes) -> "PipelineConfig":
        return replace(self, **changes)

    def validity(self) -> ValidityConfig:
        return ValidityConfig(genus_max=self.genus_max, thickness_min=self.thickness_min,
                              thickness_resolution=self.thickness_resolution,
                              spectrum_tolerance=self.spectrum_tolerance,
                              expected_rigid_modes=self.expected_rigid_modes)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(doc)


def load_config(path=None, **overrides) -> PipelineConfig:
    """File named by ``path`` (else ``$GEOACOUSTIC_CONFIG``, else defaults), then overrides."""
    path = path or os.environ.get(CONFIG_ENV)
    cfg = PipelineConfig.from_file(path) if path else PipelineConfig()
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return PipelineConfig.from_dict({**cfg.to_dict(), **overrides}) if overrides else cfg
