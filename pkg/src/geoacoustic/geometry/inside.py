"""Ray-parity inside test.

Rays are cast along +x.  A ray whose (y, z) lands exactly on a projected
edge or vertex is resolved by symbolic perturbation: the query is treated as
if displaced by ``(eps, eps**2)`` in the (y, z) plane.  Edge functions are
always evaluated in canonical (low index -> high index) vertex order, so the
two triangles sharing an edge see bit-identical values and every perturbed
ray crosses a closed surface a consistent number of times.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .mesh import Lattice, MeshError, SurfaceMesh, VoxelGrid, is_closed

_EDGES = ((0, 1), (1, 2), (2, 0))


def _cross2(ax, ay, bx, by):
    return ax * by - ay * bx


def ray_hits(mesh: SurfaceMesh, columns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Intersections of +x rays through ``columns`` ((C, 2) y/z pairs) with the mesh.

    Returns ``(column_index, x_hit)`` arrays, one entry per crossing.
    """
    columns = np.asarray(columns, dtype=float).reshape(-1, 2)
    f = mesh.faces
    if len(f) == 0 or len(columns) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    uv = mesh.vertices[:, 1:]
    xv = mesh.vertices[:, 0]
    p = uv[f]  # (F, 3, 2)
    orient = np.sign(_cross2(p[:, 1, 0] - p[:, 0, 0], p[:, 1, 1] - p[:, 0, 1],
                             p[:, 2, 0] - p[:, 0, 0], p[:, 2, 1] - p[:, 0, 1]))
    live = np.flatnonzero(orient != 0)
    if live.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)

    lo = p[live].min(axis=1)
    hi = p[live].max(axis=1)
    tree = cKDTree(columns)
    cand = tree.query_ball_point(0.5 * (lo + hi), r=0.5 * (hi - lo).max(axis=1) * (1 + 1e-9) + 1e-300,
                                 p=np.inf)
    counts = np.fromiter((len(c) for c in cand), dtype=np.int64, count=len(cand))
    if counts.sum() == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    tri = np.repeat(live, counts)
    col = np.concatenate([np.asarray(c, dtype=np.int64) for c in cand if c])
    q = columns[col]
    s = orient[tri]

    inside = np.ones(len(tri), dtype=bool)
    signed_w = []
    for i, j in _EDGES:
        vi, vj = f[tri, i], f[tri, j]
        a = np.minimum(vi, vj)
        b = np.maximum(vi, vj)
        direction = np.where(vi == a, 1.0, -1.0)
        du = uv[b, 0] - uv[a, 0]
        dv = uv[b, 1] - uv[a, 1]
        w = _cross2(du, dv, q[:, 0] - uv[a, 0], q[:, 1] - uv[a, 1])
        # sign of w at q + (eps, eps^2): gradient of w is (-dv, du)
        tie = np.where(dv != 0, -np.sign(dv), np.sign(du))
        sg = np.where(w != 0, np.sign(w), tie)
        inside &= direction * sg == s
        signed_w.append(direction * w)
    tri, col = tri[inside], col[inside]
    w01, w12, w20 = (w[inside] for w in signed_w)
    total = w01 + w12 + w20
    ft = f[tri]
    # barycentric weight of a corner is the edge function of the opposite edge
    x = (w12 * xv[ft[:, 0]] + w20 * xv[ft[:, 1]] + w01 * xv[ft[:, 2]]) / total
    return col, x


def points_inside(mesh: SurfaceMesh, points: np.ndarray) -> np.ndarray:
    """Boolean mask: odd number of surface crossings strictly beyond each point along +x."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    col, x = ray_hits(mesh, points[:, 1:])
    beyond = x > points[col, 0]
    crossings = np.bincount(col[beyond], minlength=len(points))
    return crossings % 2 == 1


def lattice_inside(mesh: SurfaceMesh, lattice: Lattice) -> np.ndarray:
    """Inside mask at every cell center, shape ``lattice.shape``."""
    r = lattice.resolution
    xs, ys, zs = lattice.axis_centers()
    yy, zz = np.meshgrid(ys, zs, indexing="ij")
    col, x = ray_hits(mesh, np.stack([yy.ravel(), zz.ravel()], axis=1))
    # a hit at x counts for every cell whose center lies strictly below x
    k = np.searchsorted(xs, x, side="left")
    hist = np.zeros((r * r, r + 1), dtype=np.int64)
    np.add.at(hist, (col, k), 1)
    beyond = np.cumsum(hist[:, ::-1], axis=1)[:, ::-1]
    count = beyond[:, 1:]  # count[c, i] = hits with k > i
    return (count % 2 == 1).reshape(r, r, r).transpose(2, 0, 1)


def voxelize(mesh: SurfaceMesh, resolution: int, lattice: Lattice | None = None) -> VoxelGrid:
    """Occupy each cell whose center lies inside the closed surface.

    The default lattice spans [-1, 1]^3, i.e. the normalized box.
    """
    if mesh.n_faces == 0:
        raise MeshError("cannot voxelize an empty mesh")
    if not is_closed(mesh):
        raise MeshError("inside test needs a watertight surface")
    if not 1 <= resolution <= 256:
        raise ValueError(f"resolution {resolution} outside [1, 256]")
    lattice = lattice or Lattice.unit_box(resolution)
    if lattice.resolution != resolution:
        raise ValueError("lattice resolution disagrees with requested resolution")
    return VoxelGrid(lattice, lattice_inside(mesh, lattice))
