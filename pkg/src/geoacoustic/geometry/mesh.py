"""Core geometric containers: surface meshes, tetrahedral meshes and lattices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    """Raised for malformed or degenerate geometry."""


class MeshIndexError(MeshError):
    """A face or element references a vertex that does not exist."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Triangle surface with counterclockwise (outward) face orientation."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.ascontiguousarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if f.size:
            if f.min() < 0 or f.max() >= len(v):
                raise MeshIndexError(
                    f"face index out of range [0, {len(v)}): min {f.min()}, max {f.max()}"
                )
            if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
                raise MeshError("face repeats a vertex")
        object.__setattr__(self, "vertices", _freeze(v))
        object.__setattr__(self, "faces", _freeze(f))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def triangles(self) -> np.ndarray:
        """(F, 3, 3) array of triangle corner positions."""
        return self.vertices[self.faces]

    def face_areas(self) -> np.ndarray:
        tri = self.triangles()
        return 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.n_vertices == 0:
            raise MeshError("empty mesh has no bounds")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def volume(self) -> float:
        """Enclosed volume by the divergence theorem (meaningful for closed meshes)."""
        tri = self.triangles()
        return float(np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0)

    def transformed(self, translate=0.0, scale=1.0) -> "SurfaceMesh":
        return SurfaceMesh((self.vertices + translate) * scale, self.faces.copy())


@dataclass(frozen=True, eq=False)
class TetMesh:
    """Linear tetrahedral mesh; every element positively oriented."""

    vertices: np.ndarray
    tets: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.ascontiguousarray(self.tets, dtype=np.int64).reshape(-1, 4)
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise MeshIndexError("tet index out of range")
        s = np.sort(t, axis=1)
        if np.any(s[:, 1:] == s[:, :-1]):
            raise MeshError("tet repeats a vertex")
        object.__setattr__(self, "vertices", _freeze(v))
        object.__setattr__(self, "tets", _freeze(t))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    def signed_volumes(self) -> np.ndarray:
        p = self.vertices[self.tets]
        d = p[:, 1:] - p[:, :1]
        return np.linalg.det(d) / 6.0

    def volume(self) -> float:
        return float(self.signed_volumes().sum())

    def check(self) -> None:
        """Raise MeshError naming the first non-positive element, if any."""
        vol = self.signed_volumes()
        bad = np.flatnonzero(vol <= 0)
        if bad.size:
            raise MeshError(f"tet {bad[0]} has non-positive volume {vol[bad[0]]:.3e}")

    def scaled(self, s: float) -> "TetMesh":
        return TetMesh(self.vertices * s, self.tets.copy())


@dataclass(frozen=True)
class Lattice:
    """Cubic lattice of cells; sample points are cell centers.

    Cell ``(i, j, k)`` has center ``origin + (index + 0.5) * spacing``.
    """

    resolution: int
    origin: tuple[float, float, float]
    spacing: float

    def __post_init__(self):
        if self.resolution < 1:
            raise MeshError("lattice resolution must be positive")
        if not self.spacing > 0:
            raise MeshError("lattice spacing must be positive")
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))

    @classmethod
    def unit_box(cls, resolution: int) -> "Lattice":
        """Lattice covering the normalized box [-1, 1]^3."""
        return cls(resolution, (-1.0, -1.0, -1.0), 2.0 / resolution)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.resolution,) * 3

    def axis_centers(self) -> np.ndarray:
        """(3, R) array of cell-center coordinates along each axis."""
        idx = np.arange(self.resolution) + 0.5
        return np.array(self.origin)[:, None] + idx[None, :] * self.spacing

    def centers(self) -> np.ndarray:
        """(R^3, 3) cell centers in C order."""
        xs, ys, zs = self.axis_centers()
        g = np.meshgrid(xs, ys, zs, indexing="ij")
        return np.stack([a.ravel() for a in g], axis=1)

    def to_dict(self) -> dict:
        return {"resolution": self.resolution, "origin": list(self.origin), "spacing": self.spacing}


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    lattice: Lattice
    occupancy: np.ndarray = field(repr=False)

    def __post_init__(self):
        occ = np.ascontiguousarray(self.occupancy, dtype=bool)
        if occ.shape != self.lattice.shape:
            raise MeshError(f"occupancy shape {occ.shape} does not match lattice {self.lattice.shape}")
        object.__setattr__(self, "occupancy", _freeze(occ))

    @property
    def resolution(self) -> int:
        return self.lattice.resolution

    @property
    def origin(self):
        return self.lattice.origin

    @property
    def spacing(self) -> float:
        return self.lattice.spacing

    @property
    def count(self) -> int:
        return int(self.occupancy.sum())


@dataclass(frozen=True, eq=False)
class SdfGrid:
    """Signed distance sampled at lattice cell centers, negative inside."""

    lattice: Lattice
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        val = np.ascontiguousarray(self.values, dtype=np.float64)
        if val.shape != self.lattice.shape:
            raise MeshError(f"values shape {val.shape} does not match lattice {self.lattice.shape}")
        object.__setattr__(self, "values", _freeze(val))

    @property
    def s_min(self) -> float:
        return float(self.values.min())

    def inside(self) -> VoxelGrid:
        return VoxelGrid(self.lattice, self.values < 0)


def edge_face_incidence(faces: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Undirected edges with incidence data.

    Returns ``(edges, face_count, orientation_sum)`` where ``edges`` is (E, 2)
    with ``edges[:, 0] < edges[:, 1]``, ``face_count`` the number of faces using
    each edge and ``orientation_sum`` the sum of +1 (face traverses low->high)
    and -1 (high->low) over those faces.
    """
    faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    d = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    lo, hi = d.min(axis=1), d.max(axis=1)
    sign = np.where(d[:, 0] < d[:, 1], 1, -1)
    edges, inv = np.unique(np.stack([lo, hi], axis=1), axis=0, return_inverse=True)
    inv = inv.ravel()
    count = np.bincount(inv, minlength=len(edges))
    orient = np.bincount(inv, weights=sign, minlength=len(edges)).astype(np.int64)
    return edges.reshape(-1, 2), count, orient


def is_closed(mesh: SurfaceMesh) -> bool:
    """Every edge has exactly two faces traversing it in opposite directions."""
    if mesh.n_faces == 0:
        return False
    _, count, orient = edge_face_incidence(mesh.faces)
    return bool(np.all(count == 2) and np.all(orient == 0))
