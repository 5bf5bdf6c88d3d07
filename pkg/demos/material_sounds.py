"""The same bowl struck in different materials.

One closed cup shape is solved once per material and rendered as a one-second
impact sound.  WAV files land in the directory given on the command line
(default ./demo_sounds).

    python demos/material_sounds.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np

from geoacoustic.fem import assemble
from geoacoustic.geometry import normalize, shapes, voxel_to_tet, voxelize
from geoacoustic.materials import get_material
from geoacoustic.modal import smallest_modes
from geoacoustic.synthesis import synthesize, write_wav

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_sounds")
out.mkdir(parents=True, exist_ok=True)

occ = np.ones((8, 8, 8), bool)
occ[2:6, 2:6, 2:] = False
surface, _ = normalize(shapes.voxel_surface(occ))
tet = voxel_to_tet(voxelize(surface, 16))
scale = 0.1  # a 20 cm cup
tet = tet.scaled(scale)

for name in ("steel", "aluminum", "glass", "wood", "ceramic"):
    material = get_material(name)
    modes = smallest_modes(assemble(tet, material), k=32)
    clip = synthesize(modes, material)
    path = write_wav(clip, out / f"cup_{name}.wav")
    tally = clip.info
    print(f"{name:9s} f1 {modes.frequencies[0]:8.1f} Hz, {tally['audible']:2d} audible modes, "
          f"{tally['above_nyquist']:2d} above Nyquist -> {path}")
