"""Material library and per-class material assignment."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

MATERIAL_NAMES = (
    "wood", "plastic", "ceramic", "glass", "steel",
    "copper", "aluminum", "concrete", "stone", "polycarbonate",
)


class UnknownMaterialError(KeyError):
    pass


class UnknownCategoryError(KeyError):
    pass


@dataclass(frozen=True)
class MaterialSpec:
    """Isotropic linear-elastic material with Rayleigh damping.

    Units: ``rho`` kg/m^3, ``E`` Pa, ``nu`` dimensionless, ``alpha`` 1/s, ``beta`` s.
    """

    name: str
    rho: float
    E: float
    nu: float
    alpha: float = 5.0
    beta: float = 1e-7

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"{self.name}: density must be positive")
        if not self.E > 0:
            raise ValueError(f"{self.name}: Young's modulus must be positive")
        if not 0 < self.nu < 0.5:
            raise ValueError(f"{self.name}: Poisson ratio {self.nu} outside (0, 0.5)")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError(f"{self.name}: damping coefficients must be non-negative")

    def with_(self, **changes) -> "MaterialSpec":
        d = asdict(self)
        d.update(changes)
        return MaterialSpec(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MaterialSpec":
        return cls(name=d["name"], rho=float(d["rho"]), E=float(d["E"]), nu=float(d["nu"]),
                   alpha=float(d.get("alpha", 5.0)), beta=float(d.get("beta", 1e-7)))


def _data(name: str) -> str:
    return resources.files("geoacoustic.data").joinpath(name).read_text(encoding="utf-8")


def load_materials(path: str | Path | None = None) -> list[MaterialSpec]:
    """Parse a ``materials.json`` array; the bundled table when ``path`` is None."""
    raw = json.loads(Path(path).read_text() if path else _data("materials.json"))
    return [MaterialSpec.from_dict(d) for d in raw]


@lru_cache(maxsize=None)
def _bundled() -> tuple[MaterialSpec, ...]:
    return tuple(load_materials())


def library() -> list[MaterialSpec]:
    """The ten bundled material categories."""
    return list(_bundled())


def get_material(name: str) -> MaterialSpec:
    for m in _bundled():
        if m.name == name:
            return m
    raise UnknownMaterialError(name)


@lru_cache(maxsize=None)
def _bundled_classes() -> dict[str, tuple[str, ...]]:
    return {k: tuple(v) for k, v in json.loads(_data("class_materials.json")).items()}


def class_materials(path: str | Path | None = None) -> dict[str, tuple[str, ...]]:
    if path is None:
        return dict(_bundled_classes())
    return {k: tuple(v) for k, v in json.loads(Path(path).read_text()).items()}


def _category_rng(category: str, seed: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{category}\0{seed}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def assign_material(category: str, seed: int, table: dict[str, tuple[str, ...]] | None = None) -> MaterialSpec:
    """Uniform, seed-deterministic draw from the category's plausible materials."""
    table = table if table is not None else _bundled_classes()
    if category not in table:
        raise UnknownCategoryError(category)
    options = table[category]
    return get_material(options[int(_category_rng(category, seed).integers(len(options)))])
