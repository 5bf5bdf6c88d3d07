"""Hollow counterparts of solids: keep cells with ``t * s_min < S(P) < 0``.

``s_min`` is the deepest interior signed distance, so the shell keeps the
outer fraction ``t`` of the depth profile and leaves the exterior surface
layer untouched.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import Lattice, SdfGrid, SurfaceMesh, TetMesh, VoxelGrid, face_components, signed_distance, voxel_to_tet
from .geometry.mesh import MeshError

log = logging.getLogger(__name__)

THICKNESS_RANGE = (0.3, 0.7)


class ShellDisconnectedError(MeshError):
    """The shell splits into several face-connected pieces at every tried resolution."""


@dataclass(frozen=True)
class ShellSpec:
    thickness_ratio: float
    resolution: int = 64
    max_resolution: int = 128

    def __post_init__(self):
        if not 0 < self.thickness_ratio < 1:
            raise ValueError(f"thickness ratio {self.thickness_ratio} outside (0, 1)")
        if not 1 <= self.resolution <= self.max_resolution:
            raise ValueError("need 1 <= resolution <= max_resolution")


def sample_thickness(seed: int, low: float = THICKNESS_RANGE[0], high: float = THICKNESS_RANGE[1]) -> float:
    """Uniform draw from ``[low, high]``, fixed by ``seed``."""
    return float(np.random.default_rng(seed).uniform(low, high))


def hollow_shell(sdf: SdfGrid, t: float) -> VoxelGrid:
    """Cells whose center value satisfies ``t * s_min < S < 0`` (both strict)."""
    if not 0 < t < 1:
        raise ValueError(f"thickness ratio {t} outside (0, 1)")
    s_min = sdf.s_min
    if not s_min < 0:
        raise MeshError("signed distance field has no interior point")
    v = sdf.values
    return VoxelGrid(sdf.lattice, (v > t * s_min) & (v < 0))


def exterior_layer(occupancy: np.ndarray) -> np.ndarray:
    """Occupied cells face-adjacent to the outside.

    The outside is the empty region connected to the grid border; enclosed
    cavities do not count, so a shell and its solid share this layer.
    """
    occ = np.pad(np.asarray(occupancy, bool), 1)
    face = ndimage.generate_binary_structure(3, 1)
    labels, _ = ndimage.label(~occ, structure=face)
    outside = labels == labels[0, 0, 0]
    layer = occ & ndimage.binary_dilation(outside, structure=face)
    return layer[1:-1, 1:-1, 1:-1]


@dataclass(frozen=True, eq=False)
class HollowResult:
    tet: TetMesh
    shell: VoxelGrid
    solid: VoxelGrid
    thickness_ratio: float
    resolution: int

    def metadata(self) -> dict:
        return {"is_hollow": True, "thickness_ratio": self.thickness_ratio,
                "lattice_resolution": self.resolution}


def _lattice_for(mesh: SurfaceMesh, resolution: int) -> Lattice:
    lo, hi = mesh.bounds()
    if np.all(lo >= -1.0) and np.all(hi <= 1.0):
        return Lattice.unit_box(resolution)
    center = 0.5 * (lo + hi)
    half = 0.5 * float((hi - lo).max()) * (1 + 1e-9)
    return Lattice(resolution, tuple(center - half), 2 * half / resolution)


def hollow_counterpart(surface: SurfaceMesh, spec: ShellSpec) -> HollowResult:
    """Signed distance, shell rule, then tetrahedralization.

    Normalized surfaces use the same [-1, 1]^3 lattice as ``voxelize``, so the
    shell's exterior layer can be compared cell for cell with the solid.  If
    the shell is not face connected the resolution doubles, up to
    ``spec.max_resolution``.
    """
    res = spec.resolution
    pieces = 0
    while True:
        sdf = signed_distance(surface, _lattice_for(surface, res))
        shell = hollow_shell(sdf, spec.thickness_ratio)
        pieces = face_components(shell) if shell.count else 0
        if pieces == 1:
            break
        if 2 * res > spec.max_resolution:
            raise ShellDisconnectedError(
                f"shell with t={spec.thickness_ratio:.4f} has {pieces} face-connected pieces "
                f"at resolution {res} (limit {spec.max_resolution})")
        log.info("shell disconnected at resolution %d, retrying at %d", res, 2 * res)
        res *= 2
    return HollowResult(voxel_to_tet(shell), shell, sdf.inside(), spec.thickness_ratio, res)


def hollow_tet_mesh(surface: SurfaceMesh, spec: ShellSpec) -> TetMesh:
    """Tetrahedral mesh of the hollow shell; see ``hollow_counterpart``."""
    return hollow_counterpart(surface, spec).tet
