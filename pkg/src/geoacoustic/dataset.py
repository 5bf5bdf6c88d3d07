"""Per-object build chain and corpus manifest.

Layout under a corpus root::

    manifest_header.json
    manifest.jsonl                one record per line, sorted by id
    corpus/{id}/record.json
    corpus/{id}/surface.obj       normalized surface (accepted records)
    corpus/{id}/mesh.node, .ele   tetrahedral mesh
    corpus/{id}/audio.wav         impulse response

Frequencies describe the object at normalized scale ([-1, 1]^3 box, metres);
the normalization transform is stored so physical sizes can be recovered.
"""
from __future__ import annotations

import hashlib
import json
import logging
import shutil
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .fem import assemble
from .geometry import (
    MeshError,
    SurfaceMesh,
    TetMesh,
    face_components,
    load_surface_mesh,
    normalize,
    read_tet_mesh,
    save_obj,
    voxel_to_tet,
    voxelize,
    write_tet_mesh,
)
from .geometry.io import FORMATS
from .hollowing import ShellDisconnectedError, ShellSpec, hollow_counterpart, sample_thickness
from .materials import MaterialSpec, UnknownCategoryError, assign_material, get_material
from .modal import FactorizationError, ModalModel, smallest_modes
from .synthesis import read_wav, sample_count, synthesize, write_wav
from .topology import ValidityReport, check_spectrum, validate

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
HEADER_NAME = "manifest_header.json"
MANIFEST_NAME = "manifest.jsonl"
LABELS_NAME = "labels.json"


class ManifestConflictError(RuntimeError):
    """An existing manifest was built under a different configuration."""


@dataclass
class SampleRecord:
    id: str
    status: str  # "accepted" or "rejected"
    stage: str | None = None  # failing stage for rejections
    detail: str = ""
    degraded: str | None = None
    surface_path: str | None = None
    tet_path: str | None = None
    audio_path: str | None = None
    image_path: str | None = None
    material: dict | None = None
    modal: dict | None = None
    normalization: dict | None = None
    is_hollow: bool = False
    thickness_ratio: float | None = None
    lattice_resolution: int | None = None
    parent_id: str | None = None
    validity: dict | None = None
    synthesis: dict | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.status == "accepted"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "SampleRecord":
        return cls(**d)


def sample_seed(seed: int, sample_id: str) -> int:
    """Per-sample seed, independent of build order."""
    digest = hashlib.sha256(f"{seed}\0{sample_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def _reject(rec: SampleRecord, stage: str, detail: str) -> SampleRecord:
    rec.status, rec.stage, rec.detail = "rejected", stage, detail
    return rec


def _modal_summary(modal: ModalModel) -> dict:
    return {
        "eigenvalues": modal.eigenvalues.tolist(),
        "frequencies_hz": modal.frequencies.tolist(),
        "rigid_count": int(modal.rigid_count),
        "converged": bool(modal.converged),
        "max_residual": float(modal.residuals.max()) if modal.residuals is not None and modal.residuals.size else None,
    }


def solve_tet(tet: TetMesh, material: MaterialSpec, config: PipelineConfig) -> ModalModel:
    """Assembly plus eigen-solve with the configured settings."""
    system = assemble(tet, material, config.mass_mode)
    return smallest_modes(system, config.num_modes, rigid_tol=config.rigid_tol,
                          shift_factor=config.shift_factor,
                          expected_rigid=config.expected_rigid_modes)


def _physics_tail(rec: SampleRecord, tet: TetMesh, material: MaterialSpec, config: PipelineConfig,
                  report: ValidityReport | None, sample_dir: Path, surface: SurfaceMesh) -> SampleRecord:
    """Solve, spectrum check, synthesis and file output shared by solids and shells."""
    try:
        modal = solve_tet(tet, material, config)
    except (ValueError, FactorizationError) as exc:
        return _reject(rec, "modal", str(exc))
    if report is not None:
        report = check_spectrum(report, modal, config.validity())
        rec.validity = report.to_dict()
        if not report.accepted:
            return _reject(rec, report.reason, report.detail)
    elif modal.rigid_count != config.expected_rigid_modes or not modal.converged:
        return _reject(rec, "spectrum", f"{modal.rigid_count} rigid modes, converged={modal.converged}")
    rec.modal = _modal_summary(modal)
    if len(modal) < config.num_modes:
        rec.degraded = f"only {len(modal)} of {config.num_modes} modes"
    clip = synthesize(modal, material, config.duration, config.sample_rate, config.peak)
    rec.synthesis = {
        "sample_rate": clip.sample_rate, "duration": config.duration,
        "normalization_gain": clip.normalization_gain, "silent": clip.silent, **clip.info,
    }
    if clip.silent:
        return _reject(rec, "synthesis", "no audible mode")

    sample_dir.mkdir(parents=True, exist_ok=True)
    save_obj(surface, sample_dir / "surface.obj")
    write_tet_mesh(tet, sample_dir / "mesh")
    write_wav(clip, sample_dir / "audio.wav")
    base = f"corpus/{rec.id}"
    rec.surface_path = f"{base}/surface.obj"
    rec.tet_path = f"{base}/mesh"
    rec.audio_path = f"{base}/audio.wav"
    return rec


def _write_record(rec: SampleRecord, root: Path | None) -> SampleRecord:
    if root is not None:
        d = root / "corpus" / rec.id
        d.mkdir(parents=True, exist_ok=True)
        (d / "record.json").write_text(json.dumps(rec.to_dict(), indent=2) + "\n", encoding="utf-8")
    return rec


def build_sample(surface: SurfaceMesh, material: MaterialSpec, config: PipelineConfig, seed: int,
                 root: str | Path | None = None, sample_id: str = "sample", source: str = "") -> SampleRecord:
    """normalize, validate, voxelize, tetrahedralize, solve, check, synthesize, write.

    Physics failures come back as a rejected record naming the stage;
    only I/O problems raise.  With ``root=None`` nothing is written.
    """
    root = Path(root) if root is not None else None
    rec = SampleRecord(id=sample_id, status="accepted", material=material.to_dict(),
                       lattice_resolution=config.voxel_resolution,
                       provenance={"source": source, "seed": seed, "config_hash": config.hash})
    sample_dir = (root / "corpus" / sample_id) if root is not None else None
    if sample_dir is not None and sample_dir.exists():
        shutil.rmtree(sample_dir)

    try:
        surface, tf = normalize(surface)
    except MeshError as exc:
        return _write_record(_reject(rec, "normalize", str(exc)), root)
    rec.normalization = {**tf.to_dict(), "units": "normalized"}

    report = validate(surface, config.validity())
    rec.validity = report.to_dict()
    if not report.accepted:
        return _write_record(_reject(rec, report.reason, report.detail), root)

    grid = voxelize(surface, config.voxel_resolution)
    if grid.count == 0:
        return _write_record(_reject(rec, "voxelize", "no occupied cell"), root)
    pieces = face_components(grid)
    if pieces != 1:
        return _write_record(_reject(rec, "tetrahedralize", f"{pieces} face-connected voxel pieces"), root)
    tet = voxel_to_tet(grid)

    if sample_dir is None:
        with tempfile.TemporaryDirectory() as tmp:
            return _physics_tail(rec, tet, material, config, report, Path(tmp), surface)
    return _write_record(_physics_tail(rec, tet, material, config, report, sample_dir, surface), root)


def _sample_id(path: Path) -> str:
    return f"{path.stem}-{path.suffix.lstrip('.').lower()}"


def _labels(input_dir: Path) -> dict:
    p = input_dir / LABELS_NAME
    return json.loads(p.read_text(encoding="utf-8")) if p.is_file() else {}


def _material_for(name: str, labels: dict, config: PipelineConfig, seed: int) -> MaterialSpec:
    entry = labels.get(name, {})
    if "material" in entry:
        return get_material(entry["material"])
    if "category" in entry:
        return assign_material(entry["category"], seed)
    return get_material(config.default_material)


def _build_task(args) -> dict:
    path, sample_id, label, config, seed, root = args
    path, root = Path(path), Path(root)
    sseed = sample_seed(seed, sample_id)
    rec = SampleRecord(id=sample_id, status="accepted",
                       provenance={"source": path.name, "seed": seed, "config_hash": config.hash})
    try:
        material = _material_for(path.name, {path.name: label}, config, sseed)
    except (KeyError, UnknownCategoryError) as exc:
        return _write_record(_reject(rec, "material", f"unknown label {exc}"), root).to_dict()
    try:
        surface = load_surface_mesh(path)
    except MeshError as exc:
        return _write_record(_reject(rec, "load", str(exc)), root).to_dict()
    rec = build_sample(surface, material, config, seed, root, sample_id, path.name)
    return rec.to_dict()


def mesh_files(input_dir: str | Path) -> list[Path]:
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        raise FileNotFoundError(f"not a directory: {input_dir}")
    return sorted(p for p in input_dir.iterdir() if p.suffix.lstrip(".").lower() in FORMATS)


def _run(tasks, fn, workers: int) -> list[dict]:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _counts(records: list[dict]) -> dict:
    rejected = Counter(r["stage"] for r in records if r["status"] == "rejected")
    return {
        "total": len(records),
        "accepted": sum(r["status"] == "accepted" for r in records),
        "degraded": sum(r["status"] == "accepted" and r["degraded"] is not None for r in records),
        "hollow": sum(r["status"] == "accepted" and r["is_hollow"] for r in records),
        "rejected": sum(rejected.values()),
        "rejected_by_stage": dict(sorted(rejected.items())),
    }


@dataclass
class Manifest:
    root: Path
    config: PipelineConfig
    records: list[dict]
    seed: int = 0

    def __post_init__(self):
        self.root = Path(self.root)

    @property
    def counts(self) -> dict:
        return _counts(self.records)

    def header(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.physics_dict(),
            "config_hash": self.config.hash,
            "seed": self.seed,
            "counts": self.counts,
            "records_sha256": hashlib.sha256(self.jsonl().encode()).hexdigest(),
        }

    def jsonl(self) -> str:
        return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in self.records)

    def write(self) -> None:
        self.records.sort(key=lambda r: r["id"])
        ids = [r["id"] for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate record ids")
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / MANIFEST_NAME).write_text(self.jsonl(), encoding="utf-8")
        (self.root / HEADER_NAME).write_text(json.dumps(self.header(), indent=2) + "\n", encoding="utf-8")

    @property
    def hash(self) -> str:
        """sha256 over header and record bytes."""
        h = hashlib.sha256()
        h.update((self.root / HEADER_NAME).read_bytes())
        h.update((self.root / MANIFEST_NAME).read_bytes())
        return h.hexdigest()

    def by_id(self, sample_id: str) -> dict:
        for r in self.records:
            if r["id"] == sample_id:
                return r
        raise KeyError(sample_id)

    @classmethod
    def load(cls, root: str | Path) -> "Manifest":
        root = Path(root)
        header = json.loads((root / HEADER_NAME).read_text(encoding="utf-8"))
        lines = (root / MANIFEST_NAME).read_text(encoding="utf-8").splitlines()
        records = [json.loads(ln) for ln in lines if ln.strip()]
        return cls(root, PipelineConfig.from_dict(header["config"]), records, header.get("seed", 0))


def _guard(root: Path, config: PipelineConfig) -> None:
    hp = root / HEADER_NAME
    if hp.is_file():
        old = json.loads(hp.read_text(encoding="utf-8")).get("config_hash")
        if old != config.hash:
            raise ManifestConflictError(
                f"{root} holds a manifest built with config {old}; current config is {config.hash}")


def build_corpus(input_dir: str | Path, root: str | Path, config: PipelineConfig | None = None,
                 seed: int = 0, workers: int | None = None) -> Manifest:
    """Build every mesh in ``input_dir`` into ``root`` and write the manifest.

    Records are sorted by id before writing, so the output bytes do not depend
    on the worker count or completion order.  A root that already holds a
    manifest from a different configuration is refused.
    """
    config = config or PipelineConfig()
    input_dir, root = Path(input_dir), Path(root)
    files = mesh_files(input_dir)
    _guard(root, config)
    labels = _labels(input_dir)
    ids = [_sample_id(p) for p in files]
    if len(set(ids)) != len(ids):
        raise ValueError("input files map to duplicate sample ids")
    tasks = [(str(p), i, labels.get(p.name, {}), config, seed, str(root)) for p, i in zip(files, ids)]
    records = _run(tasks, _build_task, workers or config.workers)
    m = Manifest(root, config, sorted(records, key=lambda r: r["id"]), seed)
    m.write()
    return m


def _hollow_task(args) -> dict:
    parent, config, seed, root = args
    root = Path(root)
    sid = f"{parent['id']}__hollow"
    sseed = sample_seed(seed, sid)
    t = sample_thickness(sseed, config.thickness_ratio_low, config.thickness_ratio_high)
    material = MaterialSpec.from_dict(parent["material"])
    rec = SampleRecord(id=sid, status="accepted", material=material.to_dict(), is_hollow=True,
                       thickness_ratio=t, parent_id=parent["id"],
                       normalization=parent["normalization"], validity=parent["validity"],
                       provenance={"source": parent["provenance"]["source"], "seed": seed,
                                   "config_hash": config.hash})
    sample_dir = root / "corpus" / sid
    if sample_dir.exists():
        shutil.rmtree(sample_dir)
    surface = load_surface_mesh(root / parent["surface_path"])
    try:
        h = hollow_counterpart(surface, ShellSpec(t, config.hollow_resolution, config.hollow_max_resolution))
    except ShellDisconnectedError as exc:
        rec.lattice_resolution = config.hollow_max_resolution
        return _write_record(_reject(rec, "hollow", str(exc)), root).to_dict()
    rec.lattice_resolution = h.resolution
    return _write_record(_physics_tail(rec, h.tet, material, config, None, sample_dir, surface), root).to_dict()


def select_for_hollowing(records: list[dict], fraction: float, seed: int) -> list[dict]:
    """Seeded subset of accepted solid records, ``round(fraction * n)`` of them, sorted by id."""
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    solids = sorted((r for r in records if r["status"] == "accepted" and not r["is_hollow"]),
                    key=lambda r: r["id"])
    n = int(round(fraction * len(solids)))
    pick = np.random.default_rng(seed).permutation(len(solids))[:n]
    return [solids[i] for i in sorted(pick)]


def build_hollow_counterparts(root: str | Path, fraction: float = 1.0, seed: int = 0,
                              workers: int | None = None) -> list[dict]:
    """Add hollow records for a seeded subset of accepted solids; returns the new records.

    Hollow records are linked to their solid by ``parent_id`` and replace any
    earlier hollow record with the same id.
    """
    m = Manifest.load(root)
    parents = select_for_hollowing(m.records, fraction, seed)
    tasks = [(p, m.config, seed, str(m.root)) for p in parents]
    new = _run(tasks, _hollow_task, workers or m.config.workers)
    fresh = {r["id"] for r in new}
    m.records = sorted([r for r in m.records if r["id"] not in fresh] + new, key=lambda r: r["id"])
    m.write()
    return sorted(new, key=lambda r: r["id"])


@dataclass
class VerifyReport:
    ok: bool
    records: int
    problems: list[dict]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "records": self.records, "problems": self.problems}


def _check_record(root: Path, r: dict, cfg: PipelineConfig, header_hash: str) -> list[str]:
    out = []
    if r["provenance"].get("config_hash") != header_hash:
        out.append("config hash differs from header")
    if r["status"] == "rejected":
        if not r.get("stage"):
            out.append("rejection without stage")
        return out
    for key in ("surface_path", "audio_path"):
        if not r.get(key) or not (root / r[key]).is_file():
            out.append(f"missing file: {key}")
    stem = root / r["tet_path"] if r.get("tet_path") else None
    if stem is None or not stem.with_suffix(".node").is_file() or not stem.with_suffix(".ele").is_file():
        out.append("missing file: tet_path")
    if out:
        return out
    try:
        load_surface_mesh(root / r["surface_path"])
        read_tet_mesh(stem)
    except (MeshError, ValueError) as exc:
        out.append(f"unparseable mesh: {exc}")
    try:
        clip = read_wav(root / r["audio_path"])
        if clip.sample_rate != cfg.sample_rate or len(clip) != sample_count(cfg.duration, cfg.sample_rate):
            out.append(f"wav header: {clip.sample_rate} Hz, {len(clip)} samples")
    except ValueError as exc:
        out.append(f"unreadable wav: {exc}")
    modal = r.get("modal") or {}
    lam = modal.get("eigenvalues", [])
    if len(lam) != cfg.num_modes and not r.get("degraded"):
        out.append(f"count: {len(lam)} eigenvalues, expected {cfg.num_modes}")
    if len(modal.get("frequencies_hz", [])) != len(lam):
        out.append("frequency and eigenvalue lists differ in length")
    if any(b < a for a, b in zip(lam, lam[1:])):
        out.append("eigenvalues not ascending")
    if modal.get("rigid_count") != cfg.expected_rigid_modes:
        out.append(f"rigid_count {modal.get('rigid_count')}")
    if r.get("is_hollow"):
        t = r.get("thickness_ratio")
        if t is None or not cfg.thickness_ratio_low <= t <= cfg.thickness_ratio_high:
            out.append(f"thickness ratio {t} out of range")
    return out


def verify_manifest(root: str | Path) -> VerifyReport:
    """Re-check files, counts, WAV headers and ids; findings are report content, never errors."""
    root = Path(root)
    try:
        header = json.loads((root / HEADER_NAME).read_text(encoding="utf-8"))
        m = Manifest.load(root)
    except (OSError, ValueError, KeyError) as exc:
        return VerifyReport(False, 0, [{"id": None, "problem": f"manifest unreadable: {exc}"}])
    problems = []
    if m.config.hash != header.get("config_hash"):
        problems.append({"id": None, "problem": "header config hash does not match its config"})
    if hashlib.sha256((root / MANIFEST_NAME).read_bytes()).hexdigest() != header.get("records_sha256"):
        problems.append({"id": None, "problem": "record lines do not match the header checksum"})
    ids = [r["id"] for r in m.records]
    for dup in sorted(k for k, v in Counter(ids).items() if v > 1):
        problems.append({"id": dup, "problem": "duplicate id"})
    if _counts(m.records) != header.get("counts"):
        problems.append({"id": None, "problem": "counts disagree with records"})
    ids_set = set(ids)
    for r in m.records:
        for p in _check_record(root, r, m.config, header.get("config_hash")):
            problems.append({"id": r["id"], "problem": p})
        if r.get("parent_id") is not None:
            parent = next((x for x in m.records if x["id"] == r["parent_id"]), None) if r["parent_id"] in ids_set else None
            if parent is None or parent["status"] != "accepted":
                problems.append({"id": r["id"], "problem": "parent is not an accepted record"})
    return VerifyReport(not problems, len(m.records), problems)


def rebuild_eigenvalues(root: str | Path, record: dict, config: PipelineConfig | None = None) -> np.ndarray:
    """Re-solve a record from its stored tet mesh and material."""
    root = Path(root)
    config = config or Manifest.load(root).config
    tet = read_tet_mesh(root / record["tet_path"])
    return solve_tet(tet, MaterialSpec.from_dict(record["material"]), config).eigenvalues


def split_ids(ids, seed: int = 0, train_fraction: float = 0.9) -> tuple[list[str], list[str]]:
    """Seeded partition of ids into (train, test); order of the input does not matter."""
    ids = sorted(ids)
    perm = np.random.default_rng(seed).permutation(len(ids))
    n_train = int(round(train_fraction * len(ids)))
    train = sorted(ids[i] for i in perm[:n_train])
    test = sorted(ids[i] for i in perm[n_train:])
    return train, test


def mini_corpus_dir() -> Path:
    """The bundled 20-mesh fixture corpus."""
    from importlib import resources
    return Path(str(resources.files("geoacoustic.data").joinpath("mini_corpus")))


def mini_corpus_config() -> PipelineConfig:
    """Coarse settings that build the fixture corpus in well under a minute."""
    return PipelineConfig.from_file(mini_corpus_dir() / "config.json")
