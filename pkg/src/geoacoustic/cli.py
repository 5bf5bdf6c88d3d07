"""Command-line entry point.

Every subcommand prints one JSON document on stdout; logs go to stderr.
Exit status: 0 success or accepted, 1 domain rejection, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import dataset
from .config import CONFIG_ENV, ConfigError, PipelineConfig, load_config
from .geometry import (
    Lattice,
    MeshError,
    chamfer_distance,
    load_surface_mesh,
    normalize,
    surface_samples,
    voxel_iou,
    voxelize,
    voxel_to_tet,
    write_tet_mesh,
)
from .hollowing import ShellDisconnectedError, ShellSpec, hollow_counterpart, sample_thickness
from .materials import MaterialSpec, UnknownMaterialError, get_material
from .modal import FactorizationError, ModalModel
from .synthesis import synthesize, write_wav
from .topology import check_spectrum, validate

log = logging.getLogger("geoacoustic")

OK, REJECTED, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _config(args) -> PipelineConfig:
    overrides = {
        "genus_max": getattr(args, "genus_max", None),
        "thickness_min": getattr(args, "thickness_min", None),
        "voxel_resolution": getattr(args, "resolution", None),
        "num_modes": getattr(args, "k", None),
        "workers": getattr(args, "workers", None),
    }
    if getattr(args, "deterministic", False):
        overrides["workers"] = 1
    return load_config(args.config, **overrides)


def _material(name: str, args=None) -> MaterialSpec:
    m = get_material(name)
    changes = {k: getattr(args, k) for k in ("alpha", "beta") if args is not None and getattr(args, k, None) is not None}
    return m.with_(**changes) if changes else m


def cmd_validate(args) -> int:
    cfg = _config(args)
    mesh, _ = normalize(load_surface_mesh(args.mesh))
    report = validate(mesh, cfg.validity())
    _emit({**report.to_dict(), "config_hash": cfg.hash})
    return OK if report.accepted else REJECTED


def cmd_modal(args) -> int:
    cfg = _config(args)
    material = _material(args.material)
    mesh, tf = normalize(load_surface_mesh(args.mesh))
    report = validate(mesh, cfg.validity())
    if not report.accepted:
        _emit({"stage": report.reason, "detail": report.detail, "validity": report.to_dict(), "config_hash": cfg.hash})
        return REJECTED
    grid = voxelize(mesh, cfg.voxel_resolution)
    if dataset.face_components(grid) != 1:
        _emit({"stage": "tetrahedralize", "detail": "voxel occupancy is not face connected", "config_hash": cfg.hash})
        return REJECTED
    tet = voxel_to_tet(grid)
    if args.scale != 1.0:
        tet = tet.scaled(args.scale)
    try:
        modal = dataset.solve_tet(tet, material, cfg)
    except (ValueError, FactorizationError) as exc:
        _emit({"stage": "modal", "detail": str(exc), "config_hash": cfg.hash})
        return REJECTED
    report = check_spectrum(report, modal, cfg.validity())
    doc = {**modal.to_dict(), "material": material.to_dict(), "scale": args.scale,
           "normalization": tf.to_dict(), "validity": report.to_dict(), "config_hash": cfg.hash}
    if not report.accepted:
        doc["stage"] = "spectrum"
    _emit(doc)
    return OK if report.accepted else REJECTED


def cmd_synth(args) -> int:
    cfg = _config(args)
    try:
        doc = json.loads(Path(args.modal).read_text(encoding="utf-8"))
        modal = ModalModel.from_dict(doc)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"{args.modal}: not a modal JSON document ({exc})") from None
    material = _material(args.material, args)
    rate = args.rate or cfg.sample_rate
    clip = synthesize(modal.eigenvalues, material, args.duration or cfg.duration, rate, cfg.peak)
    write_wav(clip, args.out)
    _emit({"path": str(args.out), "sample_rate": clip.sample_rate, "samples": len(clip),
           "normalization_gain": clip.normalization_gain, "silent": clip.silent, **clip.info,
           "config_hash": cfg.hash})
    return REJECTED if clip.silent else OK


def cmd_hollow(args) -> int:
    cfg = _config(args)
    target = Path(args.target)
    if target.is_dir():
        new = dataset.build_hollow_counterparts(target, args.fraction, args.seed, cfg.workers)
        counts = {"accepted": sum(r["status"] == "accepted" for r in new),
                  "rejected": sum(r["status"] == "rejected" for r in new)}
        _emit({"records": [r["id"] for r in new], **counts,
               "manifest_hash": dataset.Manifest.load(target).hash})
        return OK
    mesh, _ = normalize(load_surface_mesh(target))
    t = args.thickness if args.thickness is not None else sample_thickness(
        args.seed, cfg.thickness_ratio_low, cfg.thickness_ratio_high)
    res = args.resolution or cfg.hollow_resolution
    try:
        h = hollow_counterpart(mesh, ShellSpec(t, res, max(res, cfg.hollow_max_resolution)))
    except ShellDisconnectedError as exc:
        _emit({"stage": "hollow", "detail": str(exc), "thickness_ratio": t})
        return REJECTED
    doc = {**h.metadata(), "shell_cells": h.shell.count, "solid_cells": h.solid.count,
           "shell_volume": h.tet.volume(), "vertices": h.tet.n_vertices, "tets": h.tet.n_tets}
    if args.out:
        node, ele = write_tet_mesh(h.tet, args.out)
        doc["tet_path"] = [str(node), str(ele)]
    _emit(doc)
    return OK


def cmd_build(args) -> int:
    cfg = _config(args)
    try:
        m = dataset.build_corpus(args.input, args.output, cfg, args.seed, cfg.workers)
    except dataset.ManifestConflictError as exc:
        raise UsageError(str(exc)) from None
    _emit({"root": str(m.root), "manifest_hash": m.hash, "config_hash": cfg.hash, "counts": m.counts})
    return OK


def cmd_verify(args) -> int:
    report = dataset.verify_manifest(args.root)
    _emit(report.to_dict())
    return OK if report.ok else REJECTED


def _lattice_pair(a, b, resolution: int) -> Lattice:
    lo = np.minimum(a.bounds()[0], b.bounds()[0])
    hi = np.maximum(a.bounds()[1], b.bounds()[1])
    if np.all(lo >= -1) and np.all(hi <= 1):
        return Lattice.unit_box(resolution)
    c, half = 0.5 * (lo + hi), 0.5 * float((hi - lo).max()) * (1 + 1e-9)
    return Lattice(resolution, tuple(c - half), 2 * half / resolution)


def cmd_metrics(args) -> int:
    a, b = load_surface_mesh(args.a), load_surface_mesh(args.b)
    lat = _lattice_pair(a, b, args.resolution)
    iou = voxel_iou(voxelize(a, args.resolution, lat), voxelize(b, args.resolution, lat))
    cd = chamfer_distance(surface_samples(a, args.samples, args.seed), surface_samples(b, args.samples, args.seed))
    _emit({"iou": iou, "chamfer": cd, "resolution": args.resolution, "samples": args.samples})
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geoacoustic", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help=f"pipeline config JSON (default: ${CONFIG_ENV})")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="staged validity filter on one mesh")
    s.add_argument("mesh")
    s.add_argument("--genus-max", type=int)
    s.add_argument("--thickness-min", type=float)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("modal", help="smallest non-rigid modes of one mesh")
    s.add_argument("mesh")
    s.add_argument("--material", default="steel")
    s.add_argument("--scale", type=float, default=1.0, help="uniform scale applied after normalization")
    s.add_argument("--resolution", type=int)
    s.add_argument("-k", type=int, help="number of modes")
    s.set_defaults(func=cmd_modal)

    s = sub.add_parser("synth", help="impulse sound from a modal JSON document")
    s.add_argument("modal")
    s.add_argument("out")
    s.add_argument("--material", default="steel")
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--rate", type=int)
    s.add_argument("--duration", type=float)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("hollow", help="hollow counterpart of a mesh, or of a built corpus")
    s.add_argument("target", help="mesh file or corpus root")
    s.add_argument("--thickness", type=float, help="thickness ratio (default: seeded draw)")
    s.add_argument("--resolution", type=int)
    s.add_argument("--fraction", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="stem for .node/.ele output")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_hollow)

    s = sub.add_parser("build", help="build a corpus and its manifest")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int)
    s.add_argument("--resolution", type=int)
    s.add_argument("--deterministic", action="store_true", help="single worker")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("verify", help="re-check a built corpus")
    s.add_argument("root")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("metrics", help="voxel IoU and Chamfer distance between two meshes")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--resolution", type=int, default=32)
    s.add_argument("--samples", type=int, default=2048)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, MeshError, ConfigError, UnknownMaterialError, UsageError, ValueError) as exc:
        log.error("%s", exc)
        _emit({"error": type(exc).__name__, "detail": str(exc)})
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
