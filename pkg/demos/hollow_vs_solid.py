"""Hollowing a sphere: what changes and what stays.

The shell keeps cells whose signed distance lies between ``t * s_min`` and
zero.  The outside surface layer is untouched, the mass drops, and the
pitch moves.

    python demos/hollow_vs_solid.py
"""
import numpy as np

from geoacoustic.fem import assemble
from geoacoustic.geometry import normalize, shapes, voxel_to_tet
from geoacoustic.hollowing import ShellSpec, exterior_layer, hollow_counterpart
from geoacoustic.materials import get_material
from geoacoustic.modal import smallest_modes

steel = get_material("steel")
sphere, _ = normalize(shapes.icosphere(4))

for t in (0.3, 0.5, 0.7):
    h = hollow_counterpart(sphere, ShellSpec(t, resolution=32))
    same_skin = np.array_equal(exterior_layer(h.shell.occupancy), exterior_layer(h.solid.occupancy))
    print(f"t={t}: shell keeps {h.shell.count / h.solid.count:.3f} of the cells "
          f"(ideal ball {1 - (1 - t) ** 3:.3f}), exterior layer unchanged: {same_skin}")

h = hollow_counterpart(sphere, ShellSpec(0.5, resolution=16))
solid_tet = voxel_to_tet(h.solid)
for label, tet in (("solid", solid_tet), ("hollow", h.tet)):
    modes = smallest_modes(assemble(tet, steel), k=6)
    print(f"{label:6s}: mass {steel.rho * tet.volume():8.0f} kg, first modes (Hz) {np.round(modes.frequencies[:3], 1)}")
