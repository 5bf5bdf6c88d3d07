"""Smallest generalized eigenpairs ``K u = lambda M u`` and frequency utilities."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from .fem import AssembledSystem

log = logging.getLogger(__name__)

DENSE_DOF_CAP = 1500
RESIDUAL_TOL = 1e-8


class FactorizationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ModalModel:
    """Retained (non-rigid) eigenvalues in (rad/s)^2, ascending, and their frequencies in Hz."""

    eigenvalues: np.ndarray
    rigid_count: int = 0
    rigid_eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))
    converged: bool = True
    residuals: np.ndarray | None = None
    eigenvectors: np.ndarray | None = None
    shift: float | None = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).ravel()
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "rigid_eigenvalues", np.asarray(self.rigid_eigenvalues, dtype=float).ravel())
        if self.residuals is not None:
            object.__setattr__(self, "residuals", np.asarray(self.residuals, dtype=float).ravel())

    @property
    def frequencies(self) -> np.ndarray:
        return frequency_hz(np.maximum(self.eigenvalues, 0.0))

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "frequencies_hz": self.frequencies.tolist(),
            "rigid_count": int(self.rigid_count),
            "converged": bool(self.converged),
            "residuals": None if self.residuals is None else self.residuals.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ModalModel":
        return cls(
            eigenvalues=np.array(d["eigenvalues"], dtype=float),
            rigid_count=int(d.get("rigid_count", 0)),
            converged=bool(d.get("converged", True)),
            residuals=None if d.get("residuals") is None else np.array(d["residuals"], dtype=float),
        )


def frequency_hz(lam):
    """``sqrt(lambda) / (2 pi)``; rejects negative eigenvalues."""
    a = np.asarray(lam, dtype=float)
    if np.any(a < 0):
        raise ValueError("frequency of a negative eigenvalue is undefined")
    f = np.sqrt(a) / (2 * np.pi)
    return float(f) if f.ndim == 0 else f


def mass_normalize(vectors: np.ndarray, M) -> np.ndarray:
    """Scale columns to unit modal mass, largest-magnitude component positive."""
    u = np.asarray(vectors, dtype=float)
    single = u.ndim == 1
    u = u.reshape(len(u), -1)
    mass = np.einsum("ij,ij->j", u, M @ u)
    if np.any(~(mass > 0)):
        raise ValueError("vector with zero or negative M-norm")
    u = u / np.sqrt(mass)
    pivot = np.abs(u).argmax(axis=0)
    u = u * np.sign(u[pivot, np.arange(u.shape[1])])
    return u[:, 0] if single else u


def relative_residuals(system: AssembledSystem, lam: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``|K u - lambda M u| / ((|K|_1 + |lambda| |M|_1) |u|)`` per column."""
    kn = sp.linalg.norm(system.K, 1)
    mn = sp.linalg.norm(system.M, 1)
    r = system.K @ u - (system.M @ u) * lam
    return np.linalg.norm(r, axis=0) / ((kn + np.abs(lam) * mn) * np.linalg.norm(u, axis=0))


def default_shift(system: AssembledSystem, factor: float = 1e-3) -> float:
    """Negative shift ``-factor * tr(K) / tr(M)``; keeps ``K - shift M`` positive definite."""
    return -factor * float(system.K.diagonal().sum() / system.M.diagonal().sum())


def _split_rigid(lam: np.ndarray, rigid_tol: float) -> np.ndarray:
    top = float(np.abs(lam).max()) if lam.size else 0.0
    return lam < rigid_tol * top


def _finish(system, lam, vec, k, rigid_tol, converged, shift, keep_vectors) -> ModalModel:
    order = np.argsort(lam, kind="stable")
    lam, vec = lam[order], vec[:, order]
    rigid = _split_rigid(lam, rigid_tol)
    elastic = np.flatnonzero(~rigid)[:k]
    lam_e, vec_e = lam[elastic], vec[:, elastic]
    if vec_e.shape[1]:
        vec_e = mass_normalize(vec_e, system.M)
        res = relative_residuals(system, lam_e, vec_e)
    else:
        res = np.zeros(0)
    converged = bool(converged and np.all(res <= RESIDUAL_TOL))
    return ModalModel(
        eigenvalues=lam_e,
        rigid_count=int(rigid.sum()),
        rigid_eigenvalues=lam[rigid],
        converged=converged,
        residuals=res,
        eigenvectors=vec_e if keep_vectors else None,
        shift=shift,
    )


def _factor(A, sigma: float):
    # A is symmetric positive definite: symmetric ordering, no pivoting
    try:
        return splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                    options=dict(SymmetricMode=True))
    except RuntimeError:
        pass
    try:
        return splu(A)
    except RuntimeError as exc:
        raise FactorizationError(f"K - ({sigma:g}) M is singular: {exc}") from None


def smallest_modes(system: AssembledSystem, k: int = 64, *, rigid_tol: float = 1e-6,
                   shift: float | None = None, shift_factor: float = 1e-3,
                   return_vectors: bool = False, maxiter: int | None = None,
                   expected_rigid: int = 6) -> ModalModel:
    """The ``k`` smallest non-rigid eigenpairs by shift-invert Lanczos (ARPACK).

    ``K - shift M`` is factorized once (sparse LU); the Krylov subspace has
    ``4 * nev`` vectors and a fixed starting vector so solves are repeatable.
    When ``k`` plus the rigid modes fill the whole space (tiny meshes) the
    shifted pencil is solved densely instead (Cholesky of ``K - shift M``).
    Modes with ``lambda < rigid_tol * max(lambda)`` are counted as rigid and
    excluded; if more than ``expected_rigid`` turn up the solve is widened
    until ``k`` elastic modes are available or the system is exhausted.
    """
    n = system.n_dof
    nev = k + expected_rigid
    if nev > n:
        raise ValueError(f"{k} modes plus {expected_rigid} rigid modes need more than {n} DOF")
    sigma = default_shift(system, shift_factor) if shift is None else float(shift)
    A = (system.K - sigma * system.M).tocsc()
    if nev == n:
        # the whole space is wanted, beyond ARPACK's reach: solve the same
        # shift-inverted pencil M x = theta (K - shift M) x densely
        theta, vec = sla.eigh(system.M.toarray(), A.toarray())
        lam = sigma + 1.0 / theta
        return _finish(system, lam, vec, k, rigid_tol, True, sigma, return_vectors)
    lu = _factor(A, sigma)
    opinv = LinearOperator((n, n), matvec=lu.solve, dtype=np.float64)
    v0 = np.random.default_rng(0x5eed).standard_normal(n)

    while True:
        ncv = min(n, max(4 * nev, 2 * nev + 1))
        converged = True
        try:
            lam, vec = eigsh(system.K, k=nev, M=system.M, sigma=sigma, which="LM", OPinv=opinv,
                             v0=v0, ncv=ncv, tol=0.0, maxiter=maxiter)
        except ArpackNoConvergence as err:
            log.warning("ARPACK stopped early with %d of %d pairs", len(err.eigenvalues), nev)
            lam, vec, converged = err.eigenvalues, err.eigenvectors, False
        lam = np.real(lam)
        rigid = int(_split_rigid(lam, rigid_tol).sum())
        short = k - (len(lam) - rigid)
        if short <= 0 or not converged or nev + short >= n:
            break
        nev += short
    return _finish(system, lam, np.real(vec), k, rigid_tol, converged, sigma, return_vectors)


def dense_reference_modes(system: AssembledSystem, k: int | None = None, *, rigid_tol: float = 1e-6,
                          return_vectors: bool = False) -> ModalModel:
    """Full dense solve: Cholesky ``M = L L^T``, then ``eigh(L^-1 K L^-T)``.

    Independent of the Krylov path; intended as an oracle for small systems.
    """
    n = system.n_dof
    if n > DENSE_DOF_CAP:
        raise ValueError(f"{n} DOF exceeds the dense cap of {DENSE_DOF_CAP}")
    M = system.M.toarray()
    K = system.K.toarray()
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise ValueError("mass matrix is not positive definite") from None
    X = sla.solve_triangular(L, K, lower=True)
    C = sla.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    lam, y = np.linalg.eigh(C)
    vec = sla.solve_triangular(L.T, y, lower=False)
    return _finish(system, lam, vec, n if k is None else k, rigid_tol, True, None, return_vectors)


def mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_frequency_error(pred, truth, reference_hz: float = 16000.0) -> float:
    """Mean squared difference of mel-scaled frequencies, each divided by ``mel(reference_hz)``."""
    p = np.asarray(pred, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    ref = mel(reference_hz)
    return float(np.mean((mel(p) / ref - mel(t) / ref) ** 2))
