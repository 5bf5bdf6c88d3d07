"""Readers and writers for OBJ, OFF, binary STL and the .node/.ele tet format."""
from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .mesh import MeshError, SurfaceMesh, TetMesh


class MeshParseError(MeshError):
    """The file does not parse in the declared format."""


FORMATS = ("obj", "off", "stl")


def _fan(poly: list[int]) -> list[tuple[int, int, int]]:
    return [(poly[0], poly[i], poly[i + 1]) for i in range(1, len(poly) - 1)]


def _read_obj(path: Path) -> SurfaceMesh:
    verts: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            toks = line.split()
            if not toks:
                continue
            try:
                if toks[0] == "v":
                    verts.append([float(x) for x in toks[1:4]])
                    if len(verts[-1]) != 3:
                        raise ValueError("vertex needs three coordinates")
                elif toks[0] == "f":
                    poly = []
                    for t in toks[1:]:
                        i = int(t.partition("/")[0])
                        # OBJ is 1-based; negative indices count back from the latest vertex
                        poly.append(i - 1 if i > 0 else len(verts) + i)
                    if len(poly) < 3:
                        raise ValueError("face needs at least three vertices")
                    faces.extend(_fan(poly))
            except ValueError as exc:
                raise MeshParseError(f"{path}:{lineno}: {exc}") from None
    return SurfaceMesh(np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def _read_off(path: Path) -> SurfaceMesh:
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        lines = [ln.split("#")[0].strip() for ln in fh]
    toks = " ".join(ln for ln in lines if ln).split()
    try:
        if not toks or not toks[0].endswith("OFF"):
            raise ValueError("missing OFF header")
        head = toks[0]
        pos = 1
        if head != "OFF" and len(head) > 3:
            # "OFF8 12 0" glued onto the header token
            raise ValueError(f"unsupported OFF variant {head!r}")
        nv, nf = int(toks[pos]), int(toks[pos + 1])
        pos += 3
        v = np.array(toks[pos:pos + 3 * nv], dtype=float)
        if v.size != 3 * nv:
            raise ValueError("truncated vertex block")
        pos += 3 * nv
        faces: list[tuple[int, int, int]] = []
        for _ in range(nf):
            n = int(toks[pos])
            poly = [int(x) for x in toks[pos + 1:pos + 1 + n]]
            if len(poly) != n or n < 3:
                raise ValueError("truncated face record")
            faces.extend(_fan(poly))
            pos += 1 + n
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"{path}: {exc}") from None
    return SurfaceMesh(v.reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


_STL_DTYPE = np.dtype([("normal", "<f4", 3), ("tri", "<f4", (3, 3)), ("attr", "<u2")])


def _read_stl(path: Path) -> SurfaceMesh:
    data = Path(path).read_bytes()
    if len(data) < 84:
        raise MeshParseError(f"{path}: truncated STL header")
    (n,) = struct.unpack_from("<I", data, 80)
    if len(data) != 84 + 50 * n:
        raise MeshParseError(f"{path}: expected {84 + 50 * n} bytes for {n} facets, got {len(data)}")
    rec = np.frombuffer(data, dtype=_STL_DTYPE, count=n, offset=84)
    corners = rec["tri"].reshape(-1, 3).astype(np.float64)
    # STL has no shared vertices; merge exact duplicates to recover connectivity
    verts, inverse = np.unique(corners, axis=0, return_inverse=True)
    return SurfaceMesh(verts, inverse.reshape(-1, 3))


def load_surface_mesh(path: str | os.PathLike, fmt: str | None = None) -> SurfaceMesh:
    """Load a triangle mesh; polygons are fan-triangulated.

    ``fmt`` defaults to the file extension. Raises MeshParseError on malformed
    input and MeshIndexError when a face references a missing vertex.
    """
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt not in FORMATS:
        raise MeshParseError(f"unsupported mesh format {fmt!r}")
    if not path.is_file():
        raise FileNotFoundError(path)
    return {"obj": _read_obj, "off": _read_off, "stl": _read_stl}[fmt](path)


def save_obj(mesh: SurfaceMesh, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for x, y, z in mesh.vertices:
            fh.write(f"v {float(x)!r} {float(y)!r} {float(z)!r}\n")
        for a, b, c in mesh.faces + 1:
            fh.write(f"f {a} {b} {c}\n")


def save_off(mesh: SurfaceMesh, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"OFF\n{mesh.n_vertices} {mesh.n_faces} 0\n")
        for x, y, z in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
        for a, b, c in mesh.faces:
            fh.write(f"3 {a} {b} {c}\n")


def save_stl(mesh: SurfaceMesh, path: str | os.PathLike) -> None:
    tri = mesh.triangles()
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    n = np.divide(n, norm, out=np.zeros_like(n), where=norm > 0)
    rec = np.zeros(len(tri), dtype=_STL_DTYPE)
    rec["normal"] = n
    rec["tri"] = tri
    with open(path, "wb") as fh:
        fh.write(b"binary stl".ljust(80, b"\0"))
        fh.write(struct.pack("<I", len(tri)))
        fh.write(rec.tobytes())


def save_surface_mesh(mesh: SurfaceMesh, path: str | os.PathLike) -> Path:
    path = Path(path)
    ext = path.suffix.lstrip(".").lower()
    writers = {"obj": save_obj, "off": save_off, "stl": save_stl}
    if ext not in writers:
        raise MeshParseError(f"unsupported mesh format {ext!r}")
    writers[ext](mesh, path)
    return path


def write_tet_mesh(mesh: TetMesh, stem: str | os.PathLike) -> tuple[Path, Path]:
    """Write ``stem.node`` and ``stem.ele`` (0-based, one record per line)."""
    stem = Path(stem)
    node, ele = stem.with_suffix(".node"), stem.with_suffix(".ele")
    with open(node, "w", encoding="ascii", newline="\n") as fh:
        for i, (x, y, z) in enumerate(mesh.vertices):
            fh.write(f"{i} {float(x)!r} {float(y)!r} {float(z)!r}\n")
    with open(ele, "w", encoding="ascii", newline="\n") as fh:
        for i, (a, b, c, d) in enumerate(mesh.tets):
            fh.write(f"{i} {a} {b} {c} {d}\n")
    return node, ele


def read_tet_mesh(stem: str | os.PathLike) -> TetMesh:
    stem = Path(stem)
    try:
        node = np.loadtxt(stem.with_suffix(".node"), dtype=np.float64, ndmin=2)
        ele = np.loadtxt(stem.with_suffix(".ele"), dtype=np.int64, ndmin=2)
    except ValueError as exc:
        raise MeshParseError(f"{stem}: {exc}") from None
    if node.shape[1] != 4 or ele.shape[1] != 5:
        raise MeshParseError(f"{stem}: expected 4 node columns and 5 element columns")
    if np.any(node[:, 0] != np.arange(len(node))) or np.any(ele[:, 0] != np.arange(len(ele))):
        raise MeshParseError(f"{stem}: records must be numbered consecutively from 0")
    return TetMesh(node[:, 1:], ele[:, 1:])
