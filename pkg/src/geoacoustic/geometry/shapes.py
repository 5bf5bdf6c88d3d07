"""Procedural closed surfaces used as fixtures and for the bundled mini corpus."""
from __future__ import annotations

import numpy as np

from .mesh import SurfaceMesh


def box(lo=(-1.0, -1.0, -1.0), hi=(1.0, 1.0, 1.0)) -> SurfaceMesh:
    """Axis-aligned box, 8 vertices and 12 outward triangles."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    bits = np.array([[(i >> 0) & 1, (i >> 1) & 1, (i >> 2) & 1] for i in range(8)])
    v = lo + bits * (hi - lo)
    # quads listed counterclockwise seen from outside
    quads = [(0, 2, 3, 1), (4, 5, 7, 6), (0, 1, 5, 4), (2, 6, 7, 3), (0, 4, 6, 2), (1, 3, 7, 5)]
    f = [t for a, b, c, d in quads for t in ((a, b, c), (a, c, d))]
    return SurfaceMesh(v, f)


def tetrahedron(scale: float = 1.0) -> SurfaceMesh:
    v = scale * np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    return SurfaceMesh(v, [(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)])


def icosphere(subdivisions: int = 3, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> SurfaceMesh:
    phi = (1 + 5 ** 0.5) / 2
    v = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
         (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
         (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
         (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
         (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
         (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(p, float) / np.linalg.norm(p) for p in v]
    faces = f
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        nxt = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nxt += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = nxt
    return SurfaceMesh(np.array(verts) * radius + np.asarray(center, float), faces)


def torus(major: float = 0.7, minor: float = 0.3, n_major: int = 32, n_minor: int = 16) -> SurfaceMesh:
    """Ring torus around the z axis."""
    u = 2 * np.pi * np.arange(n_major) / n_major
    w = 2 * np.pi * np.arange(n_minor) / n_minor
    uu, ww = np.meshgrid(u, w, indexing="ij")
    r = major + minor * np.cos(ww)
    v = np.stack([r * np.cos(uu), r * np.sin(uu), minor * np.sin(ww)], axis=-1).reshape(-1, 3)
    i, j = np.meshgrid(np.arange(n_major), np.arange(n_minor), indexing="ij")
    a = i * n_minor + j
    b = ((i + 1) % n_major) * n_minor + j
    c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
    d = i * n_minor + (j + 1) % n_minor
    f = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3), np.stack([a, c, d], -1).reshape(-1, 3)])
    return SurfaceMesh(v, f)


def cylinder(radius: float = 0.5, height: float = 2.0, segments: int = 32) -> SurfaceMesh:
    ang = 2 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    bottom = np.column_stack([ring, np.full(segments, -height / 2)])
    top = np.column_stack([ring, np.full(segments, height / 2)])
    v = np.vstack([bottom, top, [[0, 0, -height / 2], [0, 0, height / 2]]])
    cb, ct = 2 * segments, 2 * segments + 1
    f = []
    for k in range(segments):
        k1 = (k + 1) % segments
        f += [(k, k1, segments + k1), (k, segments + k1, segments + k),
              (cb, k1, k), (ct, segments + k, segments + k1)]
    return SurfaceMesh(v, f)


def voxel_surface(occupancy: np.ndarray, origin=(0.0, 0.0, 0.0), spacing: float = 1.0) -> SurfaceMesh:
    """Boundary faces of a voxel set as an outward triangle surface.

    Manifold as long as no two occupied cells touch only along an edge or a
    corner.
    """
    occ = np.pad(np.asarray(occupancy, bool), 1)
    n = np.array(occ.shape) + 1
    quads = []
    for axis in range(3):
        diff = occ.astype(np.int8) - np.roll(occ, 1, axis=axis).astype(np.int8)
        # diff = +1: face on the low side of an occupied cell, normal points to -axis
        for sgn in (1, -1):
            cells = np.argwhere(diff == sgn)
            e1 = np.zeros(3, int)
            e2 = np.zeros(3, int)
            e1[(axis + 1) % 3] = 1
            e2[(axis + 2) % 3] = 1
            c0 = cells
            q = np.stack([c0, c0 + e1, c0 + e1 + e2, c0 + e2], axis=1)
            if sgn == 1:
                q = q[:, ::-1]
            quads.append(q)
    q = np.concatenate(quads)
    flat = np.ravel_multi_index(q.reshape(-1, 3).T, tuple(n))
    used, inv = np.unique(flat, return_inverse=True)
    ijk = np.stack(np.unravel_index(used, tuple(n)), axis=1) - 1
    v = np.asarray(origin, float) + ijk * spacing
    q = inv.reshape(-1, 4)
    f = np.concatenate([q[:, [0, 1, 2]], q[:, [0, 2, 3]]])
    return SurfaceMesh(v, f)


def plate_with_holes(n_holes: int, thickness_cells: int = 2, hole_cells: int = 2) -> SurfaceMesh:
    """Voxel slab pierced by ``n_holes`` square holes (genus = n_holes)."""
    pitch = hole_cells + 2
    nx = n_holes * pitch + 2
    ny = hole_cells + 4
    occ = np.zeros((nx, ny, thickness_cells), bool)
    occ[:, :, :] = True
    for h in range(n_holes):
        x0 = 2 + h * pitch
        occ[x0:x0 + hole_cells, 2:2 + hole_cells, :] = False
    return voxel_surface(occ)


def union(*meshes: SurfaceMesh) -> SurfaceMesh:
    """Disjoint union (no boolean evaluation)."""
    verts, faces, off = [], [], 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + off)
        off += m.n_vertices
    return SurfaceMesh(np.concatenate(verts), np.concatenate(faces))


def drop_faces(mesh: SurfaceMesh, index) -> SurfaceMesh:
    keep = np.ones(mesh.n_faces, bool)
    keep[index] = False
    return SurfaceMesh(mesh.vertices.copy(), mesh.faces[keep])
