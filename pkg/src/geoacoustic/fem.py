"""Linear-elastic FEM on 4-node tetrahedra: element blocks and global assembly.

DOF numbering is vertex-major: vertex ``a`` owns DOFs ``3a, 3a+1, 3a+2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import TetMesh
from .geometry.mesh import MeshError
from .materials import MaterialSpec


class DegenerateElementError(MeshError):
    def __init__(self, index: int, volume: float):
        super().__init__(f"element {index} has non-positive volume {volume:.3e}")
        self.index = index
        self.volume = volume


@dataclass(frozen=True)
class ElasticityModuli:
    lame_lambda: float
    lame_mu: float


def lame_parameters(E: float, nu: float) -> ElasticityModuli:
    if not E > 0:
        raise ValueError("Young's modulus must be positive")
    if not 0 < nu < 0.5:
        raise ValueError(f"Poisson ratio {nu} outside (0, 0.5)")
    return ElasticityModuli(E * nu / ((1 + nu) * (1 - 2 * nu)), E / (2 * (1 + nu)))


def _gradients(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Shape-function gradients (..., 4, 3) and volumes (...) of tets (..., 4, 3)."""
    d = coords[..., 1:, :] - coords[..., :1, :]
    e1, e2, e3 = d[..., 0, :], d[..., 1, :], d[..., 2, :]
    # columns of inv(d) via cofactors; degenerate tets give inf/nan instead of raising
    cof = np.stack([np.cross(e2, e3), np.cross(e3, e1), np.cross(e1, e2)], axis=-2)
    det = np.einsum("...i,...i->...", e1, cof[..., 0, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        g = cof / det[..., None, None]
        g0 = -g.sum(axis=-2, keepdims=True)
    return np.concatenate([g0, g], axis=-2), det / 6.0


def _stiffness_blocks(grad: np.ndarray, vol: np.ndarray, lam: float, mu: float) -> np.ndarray:
    # K[(a,i),(b,j)] = V (lam g_ai g_bj + mu (g_aj g_bi + delta_ij g_a.g_b))
    gg = np.einsum("...ak,...bk->...ab", grad, grad)
    k = lam * np.einsum("...ai,...bj->...aibj", grad, grad)
    k += mu * np.einsum("...aj,...bi->...aibj", grad, grad)
    k += mu * np.einsum("...ab,ij->...aibj", gg, np.eye(3))
    k *= vol[..., None, None, None, None]
    n = k.shape[:-4]
    k = k.reshape(*n, 12, 12)
    return 0.5 * (k + np.swapaxes(k, -1, -2))


def element_stiffness(coords, moduli: ElasticityModuli) -> np.ndarray:
    """12x12 stiffness ``V B^T D B`` of one tet (constant strain)."""
    coords = np.asarray(coords, dtype=float).reshape(4, 3)
    grad, vol = _gradients(coords)
    if not vol > 0:
        raise DegenerateElementError(0, float(vol))
    return _stiffness_blocks(grad, np.asarray(vol), moduli.lame_lambda, moduli.lame_mu)


_CONSISTENT = (np.ones((4, 4)) + np.eye(4)) / 20.0
_LUMPED = np.eye(4) / 4.0


def _mass_pattern(mode: str) -> np.ndarray:
    if mode == "consistent":
        return np.kron(_CONSISTENT, np.eye(3))
    if mode == "lumped":
        return np.kron(_LUMPED, np.eye(3))
    raise ValueError(f"unknown mass mode {mode!r}")


def element_mass(coords, rho: float, mode: str = "consistent") -> np.ndarray:
    """12x12 mass block: ``rho V (1 + delta_ab) delta_ij / 20`` or lumped ``rho V / 4``."""
    coords = np.asarray(coords, dtype=float).reshape(4, 3)
    _, vol = _gradients(coords)
    if not vol > 0:
        raise DegenerateElementError(0, float(vol))
    return rho * float(vol) * _mass_pattern(mode)


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """Global sparse ``M`` and ``K`` (CSR, full symmetric storage)."""

    M: sp.csr_matrix
    K: sp.csr_matrix
    n_vertices: int

    @property
    def n_dof(self) -> int:
        return 3 * self.n_vertices


def rigid_body_modes(vertices: np.ndarray) -> np.ndarray:
    """(n_dof, 6) translations then infinitesimal rotations about the centroid."""
    v = np.asarray(vertices, float)
    n = len(v)
    c = v - v.mean(axis=0)
    r = np.zeros((n, 3, 6))
    for i in range(3):
        r[:, i, i] = 1.0
        axis = np.eye(3)[i]
        r[:, :, 3 + i] = np.cross(axis, c)
    return r.reshape(3 * n, 6)


def assemble(mesh: TetMesh, material: MaterialSpec, mass_mode: str = "consistent") -> AssembledSystem:
    """Scatter-add element blocks into global sparse ``M`` and ``K``.

    Duplicate entries are summed in element order (stable sort, sequential
    reduction), identically for ``(p, q)`` and ``(q, p)``, so both matrices
    come out exactly symmetric and independent of any thread count.
    """
    coords = mesh.vertices[mesh.tets]
    grad, vol = _gradients(coords)
    bad = np.flatnonzero(~(vol > 0))
    if bad.size:
        raise DegenerateElementError(int(bad[0]), float(vol[bad[0]]))
    mod = lame_parameters(material.E, material.nu)
    ke = _stiffness_blocks(grad, vol, mod.lame_lambda, mod.lame_mu)
    me = (material.rho * vol)[:, None, None] * _mass_pattern(mass_mode)

    dof = (3 * mesh.tets[:, :, None] + np.arange(3)).reshape(-1, 12)
    rows = np.repeat(dof, 12, axis=1).ravel()
    cols = np.tile(dof, (1, 12)).ravel()
    n = 3 * mesh.n_vertices
    key = rows * n + cols
    order = np.argsort(key, kind="stable")
    key = key[order]
    start = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    uniq = key[start]
    indptr = np.searchsorted(uniq // n, np.arange(n + 1))
    indices = uniq % n

    def merged(vals):
        return sp.csr_matrix((np.add.reduceat(vals.ravel()[order], start), indices, indptr), shape=(n, n))

    return AssembledSystem(M=merged(me), K=merged(ke), n_vertices=mesh.n_vertices)


def write_matrix_market(A: sp.spmatrix, path, comment: str = "") -> None:
    """Lower triangle in Matrix Market symmetric coordinate format (1-based)."""
    low = sp.tril(A, format="coo")
    order = np.lexsort((low.row, low.col))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        if comment:
            fh.write(f"% {comment}\n")
        fh.write(f"{A.shape[0]} {A.shape[1]} {low.nnz}\n")
        for i in order:
            fh.write(f"{low.row[i] + 1} {low.col[i] + 1} {float(low.data[i])!r}\n")
