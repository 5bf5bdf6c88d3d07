"""Centering and uniform scaling into the [-1, 1]^3 box."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import MeshError, SurfaceMesh


@dataclass(frozen=True)
class NormalizationTransform:
    """``x_normalized = (x + translate) * scale``."""

    translate: tuple[float, float, float]
    scale: float

    def apply(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) + np.array(self.translate)) * self.scale

    def invert(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) / self.scale - np.array(self.translate)

    def to_dict(self) -> dict:
        return {"translate": list(self.translate), "scale": self.scale}


def normalize(mesh: SurfaceMesh) -> tuple[SurfaceMesh, NormalizationTransform]:
    """Center the bounding box at the origin and map its longest side onto [-1, 1]."""
    if mesh.n_vertices == 0 or mesh.n_faces == 0:
        raise MeshError("cannot normalize an empty mesh")
    lo, hi = mesh.bounds()
    half = 0.5 * float((hi - lo).max())
    if not half > 0:
        raise MeshError("cannot normalize a mesh with zero extent")
    center = 0.5 * (lo + hi)
    tf = NormalizationTransform(tuple(float(c) for c in -center), 1.0 / half)
    v = tf.apply(mesh.vertices)
    # pin the bounding box exactly; roundoff may otherwise leave |x| = 1 + ulp
    np.clip(v, -1.0, 1.0, out=v)
    return SurfaceMesh(v, mesh.faces.copy()), tf
