import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoacoustic.geometry import Lattice, MeshError, SdfGrid, SurfaceMesh, normalize, shapes, signed_distance
from geoacoustic.hollowing import (
    THICKNESS_RANGE,
    HollowResult,
    ShellDisconnectedError,
    ShellSpec,
    exterior_layer,
    hollow_counterpart,
    hollow_shell,
    sample_thickness,
)


@pytest.fixture(scope="module")
def ball_sdf():
    m, _ = normalize(shapes.icosphere(3))
    return signed_distance(m, 24)


def analytic_ball(res=32):
    lat = Lattice.unit_box(res)
    c = lat.centers().reshape(*lat.shape, 3)
    return SdfGrid(lat, np.linalg.norm(c, axis=-1) - 1.0)


class TestThickness:
    def test_range_and_determinism(self):
        draws = [sample_thickness(s) for s in range(200)]
        assert all(THICKNESS_RANGE[0] <= t <= THICKNESS_RANGE[1] for t in draws)
        assert sample_thickness(17) == sample_thickness(17)
        assert sample_thickness(17) != sample_thickness(18)

    def test_mean(self):
        draws = np.array([sample_thickness(s) for s in range(10000)])
        assert abs(draws.mean() - 0.5) < 0.01

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ShellSpec(1.0)
        with pytest.raises(ValueError):
            ShellSpec(0.5, resolution=64, max_resolution=32)


class TestShellRule:
    def test_ball_radii(self):
        sdf = analytic_ball()
        r = sdf.values + 1.0
        shell = hollow_shell(sdf, 0.4).occupancy
        inner = 1.0 + 0.4 * sdf.s_min
        assert np.all(r[shell] > inner) and np.all(r[shell] < 1.0)
        assert not np.any(shell & (r < inner)) and not np.any(shell & (r >= 1.0))

    def test_strict_bounds(self):
        lat = Lattice(1, (0, 0, 0), 1.0)
        # the single cell sits exactly on the inner boundary, so it is excluded
        v = np.full((1, 1, 1), -1.0)
        assert hollow_shell(SdfGrid(lat, v), 0.5).count == 0

    def test_core_is_complement(self, ball_sdf):
        t = 0.35
        shell = hollow_shell(ball_sdf, t).occupancy
        core = ball_sdf.values <= t * ball_sdf.s_min
        np.testing.assert_array_equal(ball_sdf.inside().occupancy & ~shell, core)

    @given(st.floats(0.05, 0.9), st.floats(0.05, 0.9))
    def test_monotone_in_t(self, a, b):
        sdf = analytic_ball(16)
        lo, hi = sorted((a, b))
        s_lo, s_hi = hollow_shell(sdf, lo).occupancy, hollow_shell(sdf, hi).occupancy
        assert not np.any(s_lo & ~s_hi)

    def test_exterior_preserved(self, ball_sdf):
        solid = ball_sdf.inside().occupancy
        for t in (0.3, 0.5, 0.7):
            shell = hollow_shell(ball_sdf, t).occupancy
            np.testing.assert_array_equal(exterior_layer(shell), exterior_layer(solid))

    def test_volume_fraction(self, ball_sdf):
        solid = ball_sdf.inside().count
        for t in (0.3, 0.5, 0.7):
            frac = hollow_shell(ball_sdf, t).count / solid
            assert frac == pytest.approx(1 - (1 - t) ** 3, rel=0.06)
            assert frac < 1

    def test_invalid(self, ball_sdf):
        with pytest.raises(ValueError):
            hollow_shell(ball_sdf, 0.0)
        lat = Lattice(2, (0, 0, 0), 1.0)
        with pytest.raises(MeshError):
            hollow_shell(SdfGrid(lat, np.ones((2, 2, 2))), 0.5)


class TestExteriorLayer:
    def test_solid_block(self):
        occ = np.ones((3, 3, 3), bool)
        layer = exterior_layer(occ)
        assert layer.sum() == 26 and not layer[1, 1, 1]

    def test_cavity_not_exterior(self):
        occ = np.ones((5, 5, 5), bool)
        occ[2, 2, 2] = False
        layer = exterior_layer(occ)
        # cells around the sealed cavity are not on the outside
        assert not layer[1, 2, 2] and layer.sum() == 98


class TestCounterpart:
    def test_sphere(self):
        m, _ = normalize(shapes.icosphere(3))
        res = hollow_counterpart(m, ShellSpec(0.5, resolution=16))
        assert isinstance(res, HollowResult) and res.resolution == 16
        assert res.tet.volume() < res.solid.count * res.shell.lattice.spacing ** 3
        assert res.metadata() == {"is_hollow": True, "thickness_ratio": 0.5, "lattice_resolution": 16}
        np.testing.assert_array_equal(exterior_layer(res.shell.occupancy), exterior_layer(res.solid.occupancy))

    def test_disconnected_raises(self):
        a, b = shapes.box((-1, -1, -1), (-0.2, 1, 1)), shapes.box((0.2, -1, -1), (1, 1, 1))
        two = SurfaceMesh(np.vstack([a.vertices, b.vertices]), np.vstack([a.faces, b.faces + a.n_vertices]))
        with pytest.raises(ShellDisconnectedError):
            hollow_counterpart(two, ShellSpec(0.5, resolution=8, max_resolution=16))
