"""Voxel occupancy to a conforming linear tetrahedral mesh."""
from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy import ndimage

from .mesh import MeshError, TetMesh, VoxelGrid

_AXES = np.eye(3, dtype=np.int64)


def _kuhn_template() -> np.ndarray:
    """Six tets of the unit cube as corner offsets, shape (6, 4, 3).

    Each tet follows a monotone path 000 -> e_a -> e_a+e_b -> 111.  The split
    is translation invariant, so neighbouring cubes cut their shared face
    along the same diagonal without any per-cell parity bookkeeping.
    """
    tets = []
    for a, b, c in permutations(range(3)):
        path = [np.zeros(3, np.int64), _AXES[a], _AXES[a] + _AXES[b], np.ones(3, np.int64)]
        t = np.array(path)
        if np.linalg.det((t[1:] - t[0]).astype(float)) < 0:
            t[[1, 2]] = t[[2, 1]]
        tets.append(t)
    return np.array(tets)


_TEMPLATE = _kuhn_template()


def voxel_to_tet(grid: VoxelGrid) -> TetMesh:
    """Split every occupied cell into six positively oriented tets.

    Lattice corners shared by several cells become a single vertex.  Vertex
    order is the C order of the corner lattice, so the output is a pure
    function of the occupancy.
    """
    cells = np.argwhere(grid.occupancy)
    if len(cells) == 0:
        raise MeshError("cannot tetrahedralize an empty grid")
    n = grid.resolution + 1
    corners = cells[:, None, None, :] + _TEMPLATE[None]  # (C, 6, 4, 3)
    flat = np.ravel_multi_index(corners.reshape(-1, 3).T, (n, n, n))
    used, tets = np.unique(flat, return_inverse=True)
    ijk = np.stack(np.unravel_index(used, (n, n, n)), axis=1)
    verts = np.asarray(grid.origin) + ijk * grid.spacing
    return TetMesh(verts, tets.reshape(-1, 4))


def face_components(grid: VoxelGrid) -> int:
    """Number of 6-connected components of the occupancy.

    Cells touching only along an edge or corner share fewer than three tet
    vertices and add spurious zero-energy hinge modes, so FEM-level
    connectivity is face connectivity.
    """
    _, n = ndimage.label(grid.occupancy)
    return int(n)
