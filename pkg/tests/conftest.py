import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from geoacoustic.geometry import Lattice, VoxelGrid, shapes, voxel_to_tet

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}


def block_tet(n: int, spacing: float = 1.0):
    """n x n x n fully occupied voxel block."""
    lat = Lattice(n, (0.0, 0.0, 0.0), spacing)
    return voxel_to_tet(VoxelGrid(lat, np.ones((n, n, n), bool)))


@pytest.fixture
def unit_tet_coords():
    return np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)


@pytest.fixture
def cube_mesh():
    return shapes.box()


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def built_corpus(tmp_path_factory):
    """Mini corpus built once with one worker; tests that modify it must copy it first."""
    import time

    from geoacoustic.dataset import build_corpus, mini_corpus_config, mini_corpus_dir

    root = tmp_path_factory.mktemp("corpus") / "out"
    start = time.perf_counter()
    m = build_corpus(mini_corpus_dir(), root, mini_corpus_config(), seed=0, workers=1)
    return m, time.perf_counter() - start


@pytest.fixture(scope="session")
def hollow_corpus(built_corpus, tmp_path_factory):
    import shutil

    from geoacoustic.dataset import Manifest, build_hollow_counterparts

    root = tmp_path_factory.mktemp("hollow") / "out"
    shutil.copytree(built_corpus[0].root, root)
    new = build_hollow_counterparts(root, fraction=0.5, seed=0, workers=1)
    return Manifest.load(root), new
