"""Staged validity filtering: connectivity, manifoldness, genus, thickness, spectrum."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .geometry import Lattice, SdfGrid, SurfaceMesh, edge_face_incidence, signed_distance
from .geometry.mesh import MeshError

STAGES = ("connectivity", "manifold", "genus", "thickness", "spectrum")


class TopologyError(MeshError):
    """A topological quantity was requested for a mesh that does not admit it."""


def _face_labels(faces: np.ndarray) -> tuple[int, np.ndarray]:
    n = len(faces)
    if n == 0:
        return 0, np.zeros(0, dtype=np.int64)
    d = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    key = np.sort(d, axis=1)
    _, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    fid = np.tile(np.arange(n), 3)
    # bipartite face-edge graph; faces sharing an edge land in one component
    ne = inv.max() + 1
    g = coo_matrix((np.ones(len(fid)), (fid, n + inv)), shape=(n + ne, n + ne))
    _, labels = _cc(g, directed=False)
    face_labels = labels[:n]
    _, face_labels = np.unique(face_labels, return_inverse=True)
    return int(face_labels.max()) + 1, face_labels


def connected_components(mesh: SurfaceMesh) -> int:
    """Number of components under face adjacency across shared edges."""
    return _face_labels(mesh.faces)[0]


def _vertex_fans(faces: np.ndarray) -> np.ndarray:
    """Per referenced vertex, the number of edge-connected face fans in its star."""
    # one node per face corner; corners of v in two faces sharing an edge through v are linked
    n = len(faces)
    corner_v = faces.ravel()
    links = []
    for k in range(3):
        v = faces[:, k]
        for other in (faces[:, (k + 1) % 3], faces[:, (k + 2) % 3]):
            links.append(np.stack([v, other, np.arange(n) * 3 + k], axis=1))
    lk = np.concatenate(links)
    # rows with identical (v, other) are corners of v in faces sharing edge (v, other)
    order = np.lexsort((lk[:, 2], lk[:, 1], lk[:, 0]))
    lk = lk[order]
    same = np.all(lk[1:, :2] == lk[:-1, :2], axis=1)
    a, b = lk[:-1, 2][same], lk[1:, 2][same]
    g = coo_matrix((np.ones(len(a)), (a, b)), shape=(3 * n, 3 * n))
    _, labels = _cc(g, directed=False)
    pairs = np.unique(np.stack([corner_v, labels], axis=1), axis=0)
    return np.bincount(pairs[:, 0])[np.unique(corner_v)]


def manifold_watertight_check(mesh: SurfaceMesh) -> tuple[bool, bool]:
    """``(is_manifold, is_watertight)``.

    Manifold: every edge borders at most two faces and each vertex star is a
    single fan.  Watertight: every edge borders exactly two faces that
    traverse it in opposite directions.
    """
    if mesh.n_faces == 0:
        return True, False
    _, count, orient = edge_face_incidence(mesh.faces)
    manifold = bool(np.all(count <= 2)) and bool(np.all(_vertex_fans(mesh.faces) == 1))
    watertight = bool(np.all(count == 2) and np.all(orient == 0))
    return manifold, watertight


def euler_characteristic(mesh: SurfaceMesh) -> int:
    edges, _, _ = edge_face_incidence(mesh.faces)
    return len(np.unique(mesh.faces)) - len(edges) + mesh.n_faces


def genus(mesh: SurfaceMesh) -> int:
    """Handle count ``(2 - chi) / 2``, summed over closed components."""
    manifold, watertight = manifold_watertight_check(mesh)
    if not (manifold and watertight):
        raise TopologyError("genus needs a closed manifold surface")
    ncomp, labels = _face_labels(mesh.faces)
    total = 0
    for c in range(ncomp):
        sub = mesh.faces[labels == c]
        edges, _, _ = edge_face_incidence(sub)
        chi = len(np.unique(sub)) - len(edges) + len(sub)
        if chi % 2:
            raise TopologyError(f"odd Euler characteristic {chi} on a closed surface")
        total += (2 - chi) // 2
    return total


def thickness_check(sdf: SdfGrid, thickness_min: float) -> tuple[float, bool]:
    """Deepest interior lattice distance ``|s_min|`` against a threshold."""
    s_min = sdf.s_min
    if not s_min < 0:
        raise TopologyError("no lattice point lies inside the solid")
    return -s_min, bool(-s_min >= thickness_min)


def spectrum_sanity(modal, tolerance: float = 1e-8) -> bool:
    """All computed eigenvalues (rigid ones included) are >= -tolerance * max, and converged."""
    lam = np.concatenate([np.asarray(modal.rigid_eigenvalues, float), np.asarray(modal.eigenvalues, float)])
    if lam.size == 0:
        return bool(modal.converged)
    top = float(np.abs(lam).max())
    return bool(modal.converged and np.all(lam >= -tolerance * top))


@dataclass(frozen=True)
class ValidityConfig:
    genus_max: int = 3
    thickness_min: float = 0.05
    thickness_resolution: int = 32
    spectrum_tolerance: float = 1e-8
    expected_rigid_modes: int = 6


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of the staged filter.  ``None`` marks a stage that was not evaluated."""

    component_count: int | None = None
    is_manifold: bool | None = None
    is_watertight: bool | None = None
    genus: int | None = None
    min_thickness: float | None = None
    spectrum_ok: bool | None = None
    rigid_count: int | None = None
    stage_reached: str = "connectivity"
    reason: str | None = None
    detail: str = ""
    evaluated: tuple = field(default=())

    @property
    def accepted(self) -> bool:
        return self.reason is None

    @property
    def verdict(self) -> str:
        return "accepted" if self.accepted else f"rejected({self.reason})"

    def to_dict(self) -> dict:
        return {
            "verdict": "accepted" if self.accepted else "rejected",
            "reason": self.reason,
            "detail": self.detail,
            "component_count": self.component_count,
            "is_manifold": self.is_manifold,
            "is_watertight": self.is_watertight,
            "genus": self.genus,
            "min_thickness": self.min_thickness,
            "spectrum_ok": self.spectrum_ok,
            "rigid_count": self.rigid_count,
            "evaluated": list(self.evaluated),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ValidityReport":
        return cls(
            component_count=d["component_count"], is_manifold=d["is_manifold"],
            is_watertight=d["is_watertight"], genus=d["genus"], min_thickness=d["min_thickness"],
            spectrum_ok=d["spectrum_ok"], rigid_count=d.get("rigid_count"), reason=d["reason"],
            detail=d.get("detail", ""), evaluated=tuple(d.get("evaluated", ())),
            stage_reached=(d.get("evaluated") or ["connectivity"])[-1],
        )


def _reject(report: ValidityReport, stage: str, detail: str = "") -> ValidityReport:
    return replace(report, reason=stage, detail=detail, stage_reached=stage)


def validate(mesh: SurfaceMesh, config: ValidityConfig | None = None, modal=None,
             sdf: SdfGrid | None = None) -> ValidityReport:
    """Run the geometric stages in order, stopping at the first failure.

    The spectrum stage needs a modal solve; pass ``modal`` to include it here,
    or call ``check_spectrum`` on the returned report once the solve is done.
    A solid too thin to contain any lattice point fails the thickness stage
    with ``min_thickness = 0``.
    """
    cfg = config or ValidityConfig()
    r = ValidityReport()

    ncomp = connected_components(mesh)
    r = replace(r, component_count=ncomp, evaluated=("connectivity",))
    if ncomp != 1:
        return _reject(r, "connectivity", f"{ncomp} components")

    manifold, watertight = manifold_watertight_check(mesh)
    r = replace(r, is_manifold=manifold, is_watertight=watertight, evaluated=r.evaluated + ("manifold",),
                stage_reached="manifold")
    if not (manifold and watertight):
        return _reject(r, "manifold", "non-manifold" if not manifold else "open boundary")

    g = genus(mesh)
    r = replace(r, genus=g, evaluated=r.evaluated + ("genus",), stage_reached="genus")
    if g > cfg.genus_max:
        return _reject(r, "genus", f"genus {g} > {cfg.genus_max}")

    if sdf is None:
        sdf = signed_distance(mesh, _thickness_lattice(mesh, cfg.thickness_resolution))
    try:
        thick, ok = thickness_check(sdf, cfg.thickness_min)
    except TopologyError:
        thick, ok = 0.0, False
    r = replace(r, min_thickness=thick, evaluated=r.evaluated + ("thickness",), stage_reached="thickness")
    if not ok:
        return _reject(r, "thickness", f"|s_min| {thick:.4g} < {cfg.thickness_min}")

    if modal is not None:
        return check_spectrum(r, modal, cfg)
    return r


def _thickness_lattice(mesh: SurfaceMesh, resolution: int) -> Lattice:
    lo, hi = mesh.bounds()
    center = 0.5 * (lo + hi)
    half = 0.5 * float((hi - lo).max()) * (1 + 1e-9)
    return Lattice(resolution, tuple(center - half), 2 * half / resolution)


def check_spectrum(report: ValidityReport, modal, config: ValidityConfig | None = None) -> ValidityReport:
    """Append the spectrum stage to a report that passed the geometric stages."""
    cfg = config or ValidityConfig()
    if not report.accepted:
        return report
    ok = spectrum_sanity(modal, cfg.spectrum_tolerance)
    rigid = int(modal.rigid_count)
    r = replace(report, spectrum_ok=ok, rigid_count=rigid, evaluated=report.evaluated + ("spectrum",),
                stage_reached="spectrum")
    if not ok:
        return _reject(r, "spectrum", "negative eigenvalue or unconverged solve")
    if rigid != cfg.expected_rigid_modes:
        return _reject(replace(r, spectrum_ok=False), "spectrum",
                       f"{rigid} rigid modes, expected {cfg.expected_rigid_modes}")
    return r
