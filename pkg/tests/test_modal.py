import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoacoustic.fem import AssembledSystem, assemble
from geoacoustic.geometry import TetMesh, normalize, shapes, voxel_to_tet, voxelize
from geoacoustic.materials import get_material
from geoacoustic.modal import (
    DENSE_DOF_CAP,
    ModalModel,
    dense_reference_modes,
    default_shift,
    frequency_hz,
    mass_normalize,
    mel,
    mel_frequency_error,
    smallest_modes,
)
from conftest import block_tet

STEEL = get_material("steel")
WOOD = get_material("wood")


@pytest.fixture(scope="module")
def cube2():
    return assemble(block_tet(2, 0.5), STEEL)


def rel(a, b):
    return np.abs(np.asarray(a) / np.asarray(b) - 1).max()


class TestFrequency:
    def test_440(self):
        assert frequency_hz((2 * np.pi * 440) ** 2) == pytest.approx(440, rel=1e-15)

    def test_zero_and_one(self):
        assert frequency_hz(0.0) == 0.0
        assert frequency_hz(1.0) == 1 / (2 * np.pi)

    def test_negative(self):
        with pytest.raises(ValueError):
            frequency_hz(-1.0)


class TestSmallestModes:
    def test_rigid_count(self, cube2):
        assert smallest_modes(cube2, k=10).rigid_count == 6

    def test_matches_dense(self, cube2):
        a = smallest_modes(cube2, k=10)
        b = dense_reference_modes(cube2, k=10)
        assert a.converged
        assert rel(a.eigenvalues, b.eigenvalues) <= 1e-8
        assert np.all(a.residuals <= 1e-8)

    def test_scaled_mesh(self):
        tm = block_tet(2, 0.5)
        a = smallest_modes(assemble(tm, STEEL), k=10)
        b = smallest_modes(assemble(tm.scaled(2.0), STEEL), k=10)
        assert rel(b.eigenvalues, a.eigenvalues / 4) <= 1e-9

    def test_ascending_and_frequencies(self, cube2):
        m = smallest_modes(cube2, k=20)
        assert np.all(np.diff(m.eigenvalues) >= 0)
        np.testing.assert_array_equal(m.frequencies, np.sqrt(m.eigenvalues) / (2 * np.pi))
        assert np.all(m.eigenvalues > 1e-6 * m.eigenvalues.max())

    def test_m_orthonormal(self, cube2):
        m = smallest_modes(cube2, k=12, return_vectors=True)
        u = m.eigenvectors
        g = u.T @ (cube2.M @ u)
        assert np.abs(g - np.eye(12)).max() <= 1e-8

    def test_shift_invariance(self, cube2):
        base = default_shift(cube2)
        a = smallest_modes(cube2, k=10, shift=base)
        b = smallest_modes(cube2, k=10, shift=10 * base)
        assert rel(a.eigenvalues, b.eigenvalues) <= 1e-8

    def test_too_many_modes(self, unit_tet_coords):
        s = assemble(TetMesh(unit_tet_coords, [[0, 1, 2, 3]]), STEEL)
        with pytest.raises(ValueError):
            smallest_modes(s, k=7)
        assert len(smallest_modes(s, k=5)) == 5

    def test_whole_space(self, unit_tet_coords):
        # k + 6 == n_dof takes the dense shifted-pencil path
        s = assemble(TetMesh(unit_tet_coords, [[0, 1, 2, 3]]), STEEL)
        m = smallest_modes(s, k=6, return_vectors=True)
        assert m.rigid_count == 6 and m.converged
        assert rel(m.eigenvalues, dense_reference_modes(s).eigenvalues) <= 1e-8
        u = m.eigenvectors
        assert np.abs(u.T @ (s.M @ u) - np.eye(6)).max() <= 1e-8

    def test_repeatable(self, cube2):
        a = smallest_modes(cube2, k=10)
        b = smallest_modes(cube2, k=10)
        np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)

    def test_disconnected_widens(self):
        # two separate blocks: 12 rigid modes, still k elastic ones returned
        a = block_tet(2, 0.5)
        tm = TetMesh(np.vstack([a.vertices, a.vertices + 5.0]), np.vstack([a.tets, a.tets + a.n_vertices]))
        s = assemble(tm, STEEL)
        m = smallest_modes(s, k=10)
        assert m.rigid_count == 12 and len(m) == 10
        assert rel(m.eigenvalues, dense_reference_modes(s, k=10).eigenvalues) <= 1e-8


class TestDense:
    def test_single_tet(self, unit_tet_coords):
        s = assemble(TetMesh(unit_tet_coords, [[0, 1, 2, 3]]), STEEL)
        m = dense_reference_modes(s)
        assert m.rigid_count == 6 and len(m) == 6

    def test_cap(self):
        n = DENSE_DOF_CAP // 3 + 1
        import scipy.sparse as sp
        s = AssembledSystem(sp.identity(3 * n, format="csr"), sp.identity(3 * n, format="csr"), n)
        with pytest.raises(ValueError):
            dense_reference_modes(s)

    def test_e_doubles(self, cube2):
        a = dense_reference_modes(cube2, k=10)
        b = dense_reference_modes(assemble(block_tet(2, 0.5), STEEL.with_(E=2 * STEEL.E)), k=10)
        assert rel(b.eigenvalues, 2 * a.eigenvalues) <= 1e-12

    def test_rho_divides(self, cube2):
        a = dense_reference_modes(cube2, k=10)
        b = dense_reference_modes(assemble(block_tet(2, 0.5), STEEL.with_(rho=3 * STEEL.rho)), k=10)
        assert rel(b.eigenvalues, a.eigenvalues / 3) <= 1e-12

    def test_sphere_fixture_agreement(self):
        m, _ = normalize(shapes.icosphere(3))
        s = assemble(voxel_to_tet(voxelize(m, 8)), WOOD)
        assert s.n_dof <= DENSE_DOF_CAP
        assert rel(smallest_modes(s, k=10).eigenvalues, dense_reference_modes(s, k=10).eigenvalues) <= 1e-8


class TestMassNormalize:
    def test_scale_invariant(self, cube2):
        u = np.random.default_rng(0).standard_normal(cube2.n_dof)
        np.testing.assert_allclose(mass_normalize(10 * u, cube2.M), mass_normalize(u, cube2.M), rtol=1e-13)

    def test_unit_norm_brute(self, cube2):
        u = mass_normalize(np.random.default_rng(1).standard_normal(cube2.n_dof), cube2.M)
        dense = cube2.M.toarray()
        q = sum(u[i] * dense[i, j] * u[j] for i in range(len(u)) for j in range(len(u)) if dense[i, j])
        assert q == pytest.approx(1.0, abs=1e-12)

    def test_sign_rule(self, cube2):
        u = mass_normalize(-np.random.default_rng(2).standard_normal(cube2.n_dof), cube2.M)
        assert u[np.abs(u).argmax()] > 0
        np.testing.assert_allclose(mass_normalize(u, cube2.M), u, rtol=1e-14)

    def test_zero_vector(self, cube2):
        with pytest.raises(ValueError):
            mass_normalize(np.zeros(cube2.n_dof), cube2.M)


class TestMel:
    def test_identical(self):
        f = np.linspace(50, 9000, 64)
        assert mel_frequency_error(f, f) == 0.0

    def test_constant_offset(self):
        ref = mel(16000.0)
        f = np.linspace(100, 5000, 64)
        # shift every scaled mel value by 0.01
        g = 700 * (10 ** ((mel(f) + 0.01 * ref) / 2595) - 1)
        assert mel_frequency_error(g, f) == pytest.approx(1e-4, rel=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mel_frequency_error([1.0, 2.0], [1.0])

    @given(st.lists(st.floats(20, 16000), min_size=1, max_size=64), st.floats(1.001, 1.5))
    def test_symmetric_positive(self, f, factor):
        f = np.array(f)
        g = f * factor
        e = mel_frequency_error(f, g)
        assert e > 0 and e == mel_frequency_error(g, f)


def test_modal_json_round_trip(cube2):
    m = smallest_modes(cube2, k=8)
    d = json.loads(m.to_json())
    assert list(d) == ["eigenvalues", "frequencies_hz", "rigid_count", "converged", "residuals"]
    back = ModalModel.from_dict(d)
    np.testing.assert_array_equal(back.eigenvalues, m.eigenvalues)
    assert back.rigid_count == 6
