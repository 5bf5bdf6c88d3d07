"""Slow, independent reference implementations used only by the tests."""
import itertools
import math

import numpy as np


def winding_number(tri: np.ndarray, p: np.ndarray) -> float:
    """Solid-angle sum over triangles (Van Oosterom-Strackee) / 4 pi."""
    a, b, c = tri[:, 0] - p, tri[:, 1] - p, tri[:, 2] - p
    la, lb, lc = (np.linalg.norm(x, axis=1) for x in (a, b, c))
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = la * lb * lc + np.einsum("ij,ij->i", a, b) * lc + np.einsum("ij,ij->i", b, c) * la \
        + np.einsum("ij,ij->i", c, a) * lb
    return float(2 * np.arctan2(num, den).sum() / (4 * np.pi))


def _segment_sqdist(p, a, b):
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    d = p - (a + t * ab)
    return float(np.dot(d, d))


def point_triangle_sqdist(p, a, b, c):
    """Plane projection if it lands inside, else the nearest edge."""
    n = np.cross(b - a, c - a)
    n = n / np.linalg.norm(n)
    h = np.dot(p - a, n)
    q = p - h * n
    m = np.array([b - a, c - a]).T
    uv, *_ = np.linalg.lstsq(m, q - a, rcond=None)
    if uv[0] >= 0 and uv[1] >= 0 and uv[0] + uv[1] <= 1:
        return float(h * h)
    return min(_segment_sqdist(p, a, b), _segment_sqdist(p, b, c), _segment_sqdist(p, c, a))


def brute_unsigned_distance(mesh, p):
    tri = mesh.triangles()
    return math.sqrt(min(point_triangle_sqdist(p, *t) for t in tri))


def brute_chamfer(a, b):
    def one_way(src, dst):
        total = []
        for s in src:
            best = math.inf
            for d in dst:
                dx, dy, dz = s[0] - d[0], s[1] - d[1], s[2] - d[2]
                best = min(best, dx * dx + dy * dy + dz * dz)
            total.append(best)
        return math.fsum(total) / len(src)
    return one_way(a, b) + one_way(b, a)


def brute_iou(a, b):
    inter = union = 0
    for x, y in zip(a.ravel().tolist(), b.ravel().tolist()):
        inter += x and y
        union += x or y
    return 1.0 if union == 0 else inter / union


def euler_components(faces):
    """Flood fill over shared edges, one face at a time."""
    faces = [tuple(f) for f in faces]
    by_edge = {}
    for i, f in enumerate(faces):
        for u, v in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            by_edge.setdefault(frozenset((u, v)), []).append(i)
    seen, count = set(), 0
    for start in range(len(faces)):
        if start in seen:
            continue
        count += 1
        stack = [start]
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            f = faces[i]
            for u, v in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
                stack.extend(by_edge[frozenset((u, v))])
    return count


# 4-point degree-2 rule on the reference tet (weights sum to 1/6)
_QA, _QB = 0.5854101966249685, 0.1381966011250105
TET_QUAD = np.array([list(itertools.repeat(_QB, 4)) for _ in range(4)])
for _i in range(4):
    TET_QUAD[_i, _i] = _QA
TET_QUAD_W = np.full(4, 1.0 / 24.0)


def barycentric(coords, x):
    """Barycentric coordinates of ``x`` in the tet ``coords`` by a 4x4 solve."""
    m = np.vstack([np.ones(4), np.asarray(coords, float).T])
    return np.linalg.solve(m, np.r_[1.0, x])


def quadrature_stiffness(coords, lam, mu, h=1.0):
    """Voigt ``B^T D B`` integrated with the 4-point rule.

    Shape-function gradients come from central differences of the
    barycentric map.  These are exact for affine functions at any step, so a
    wide step keeps cancellation error small.
    """
    coords = np.asarray(coords, float)
    d = np.zeros((6, 6))
    d[:3, :3] = lam
    d[np.arange(3), np.arange(3)] += 2 * mu
    d[np.arange(3, 6), np.arange(3, 6)] = mu
    jac = np.linalg.det(coords[1:] - coords[0])
    k = np.zeros((12, 12))
    for q, w in zip(TET_QUAD, TET_QUAD_W):
        x = q @ coords
        grad = np.zeros((4, 3))
        for ax in range(3):
            e = np.zeros(3)
            e[ax] = h
            grad[:, ax] = (barycentric(coords, x + e) - barycentric(coords, x - e)) / (2 * h)
        b = np.zeros((6, 12))
        for a in range(4):
            gx, gy, gz = grad[a]
            b[0, 3 * a], b[1, 3 * a + 1], b[2, 3 * a + 2] = gx, gy, gz
            b[3, 3 * a], b[3, 3 * a + 1] = gy, gx
            b[4, 3 * a + 1], b[4, 3 * a + 2] = gz, gy
            b[5, 3 * a], b[5, 3 * a + 2] = gz, gx
        k += w * abs(jac) * b.T @ d @ b
    return k


def quadrature_mass(coords, rho):
    """Consistent mass by integrating products of linear shape functions."""
    coords = np.asarray(coords, float)
    jac = abs(np.linalg.det(coords[1:] - coords[0]))
    m = np.zeros((12, 12))
    for q, w in zip(TET_QUAD, TET_QUAD_W):
        n = q  # barycentrics are the shape functions
        nn = np.outer(n, n)
        m += rho * w * jac * np.kron(nn, np.eye(3))
    return m
