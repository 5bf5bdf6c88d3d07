"""Meshes, lattices, file I/O, voxelization, tetrahedralization and shape metrics."""
from .inside import lattice_inside, points_inside, voxelize
from .io import (
    MeshParseError,
    load_surface_mesh,
    read_tet_mesh,
    save_obj,
    save_off,
    save_stl,
    save_surface_mesh,
    write_tet_mesh,
)
from .mesh import (
    Lattice,
    MeshError,
    MeshIndexError,
    SdfGrid,
    SurfaceMesh,
    TetMesh,
    VoxelGrid,
    edge_face_incidence,
    is_closed,
)
from .metrics import chamfer_distance, surface_samples, voxel_iou
from .sdf import signed_distance, signed_distance_points, unsigned_distance
from .tetra import face_components, voxel_to_tet
from .transform import NormalizationTransform, normalize

__all__ = [
    "Lattice", "MeshError", "MeshIndexError", "MeshParseError", "NormalizationTransform",
    "SdfGrid", "SurfaceMesh", "TetMesh", "VoxelGrid", "chamfer_distance", "edge_face_incidence",
    "face_components", "is_closed", "lattice_inside", "load_surface_mesh", "normalize",
    "points_inside", "read_tet_mesh", "save_obj", "save_off", "save_stl", "save_surface_mesh",
    "signed_distance", "signed_distance_points", "surface_samples", "unsigned_distance",
    "voxel_iou", "voxel_to_tet", "voxelize", "write_tet_mesh",
]
