"""Regenerate the bundled 20-mesh mini corpus.

Fourteen shapes are meant to pass every stage; the other six each trip one
filter (connectivity, open boundary, non-manifold edge, thickness, genus,
and a voxel neck too thin to survive the remesh).
Run from the repository root:

    python demos/make_mini_corpus.py
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from geoacoustic.geometry import SurfaceMesh, save_surface_mesh, shapes

OUT = Path(__file__).resolve().parents[1] / "src" / "geoacoustic" / "data" / "mini_corpus"


def cup() -> SurfaceMesh:
    occ = np.ones((8, 8, 8), bool)
    occ[2:6, 2:6, 2:] = False
    return shapes.voxel_surface(occ)


def l_block() -> SurfaceMesh:
    occ = np.zeros((6, 6, 3), bool)
    occ[:, :2] = True
    occ[:2, :] = True
    return shapes.voxel_surface(occ)


def stepped_pyramid() -> SurfaceMesh:
    occ = np.zeros((7, 7, 4), bool)
    for k in range(4):
        occ[k:7 - k, k:7 - k, k] = True
    return shapes.voxel_surface(occ)


def diagonal_cubes() -> SurfaceMesh:
    # two cells sharing only an edge: four faces meet on it
    occ = np.zeros((2, 2, 1), bool)
    occ[0, 0, 0] = occ[1, 1, 0] = True
    return shapes.voxel_surface(occ)


def dumbbell() -> SurfaceMesh:
    # two blocks joined by a one-cell neck, far thinner than a 16^3 cell
    occ = np.zeros((40, 12, 12), bool)
    occ[:12] = True
    occ[28:] = True
    occ[12:28, 6, 6] = True
    return shapes.voxel_surface(occ)


def ellipsoid() -> SurfaceMesh:
    s = shapes.icosphere(3)
    return SurfaceMesh(s.vertices * np.array([1.0, 0.6, 0.45]), s.faces)


MESHES = {
    # expected to be accepted
    "cube.off": (shapes.box((2, 2, 2), (4, 4, 4)), {"category": "block"}),
    "bar.obj": (shapes.box((-2, -1, -1), (2, 1, 1)), {"category": "brick"}),
    "ball.obj": (shapes.icosphere(3), {"category": "ball"}),
    "ring.obj": (shapes.torus(0.7, 0.3), {"category": "ring"}),
    "thick_ring.off": (shapes.torus(0.6, 0.4, 24, 12), {"category": "ring"}),
    "can.stl": (shapes.cylinder(0.5, 1.6, 24), {"category": "can"}),
    "wedge.obj": (shapes.tetrahedron(2.0), {"category": "toy"}),
    "plate1.off": (shapes.plate_with_holes(1), {"category": "plate"}),
    "plate2.obj": (shapes.plate_with_holes(2), {"category": "plate"}),
    "plate3.stl": (shapes.plate_with_holes(3, thickness_cells=3), {"category": "plate"}),
    "pebble.stl": (ellipsoid(), {"category": "statue"}),
    "bracket.obj": (l_block(), {"category": "tool"}),
    "cup.off": (cup(), {"category": "mug"}),
    "ziggurat.stl": (stepped_pyramid(), {"material": "stone"}),
    # expected to be rejected
    "twin_tets.obj": (shapes.union(shapes.tetrahedron(), shapes.tetrahedron().transformed(3.0)), {}),
    "open_box.obj": (shapes.drop_faces(shapes.box(), [0, 1]), {}),
    "hinge.obj": (diagonal_cubes(), {}),
    "sheet.off": (shapes.box((-1, -1, -0.01), (1, 1, 0.01)), {"category": "plate"}),
    "plate4.obj": (shapes.plate_with_holes(4), {"category": "plate"}),
    "dumbbell.obj": (dumbbell(), {"category": "tool"}),
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    labels = {}
    for name, (mesh, label) in MESHES.items():
        save_surface_mesh(mesh, OUT / name)
        labels[name] = label
    (OUT / "labels.json").write_text(json.dumps(labels, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(MESHES)} meshes to {OUT}")


if __name__ == "__main__":
    main()
