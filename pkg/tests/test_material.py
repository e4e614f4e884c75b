import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xsbfem.errors import MaterialError
from xsbfem.material import (angle_ply_laminate, isotropic, orthotropic, orthotropic_from_phi,
                             rotate_D)


def test_isotropic_plane_strain_entries():
    m = isotropic(1.0, 0.25, "plane_strain")
    c = 1.0 / (1.25 * 0.5)
    assert np.allclose(m.D, c * np.array([[0.75, 0.25, 0], [0.25, 0.75, 0], [0, 0, 0.25]]))
    assert m.kappa == pytest.approx(2.0)
    assert m.G == pytest.approx(0.4)


def test_plane_stress_kappa():
    m = isotropic(3.0, 0.2, "plane_stress")
    assert m.kappa == pytest.approx(2.8 / 1.2)
    assert m.D[0, 0] == pytest.approx(3.0 / 0.96)


def test_incompressible_plane_strain_rejected():
    with pytest.raises(MaterialError):
        isotropic(1.0, 0.5, "plane_strain")


def test_bad_plane_state():
    with pytest.raises(MaterialError):
        isotropic(1.0, 0.3, "axisymmetric")


def test_phi_one_is_isotropic():
    m = orthotropic_from_phi(6e9, 0.03, 1.0)
    iso = isotropic(2 * 6e9 * 1.03, 0.03, "plane_stress")
    assert np.allclose(m.D, iso.D, rtol=1e-12)


def test_orthotropic_plane_stress_inverse_compliance():
    m = orthotropic(144.8e9, 11.7e9, 9.66e9, 0.21)
    S = np.linalg.inv(m.D)
    assert S[0, 0] == pytest.approx(1 / 144.8e9)
    assert S[1, 1] == pytest.approx(1 / 11.7e9)
    assert S[0, 1] == pytest.approx(-0.21 / 144.8e9)
    assert S[2, 2] == pytest.approx(1 / 9.66e9)


def test_orthotropic_rejects_unstable_poisson():
    with pytest.raises(MaterialError):
        orthotropic(1.0, 10.0, 1.0, 0.5)


def test_rotation_by_90_swaps_axes():
    m0 = orthotropic(10.0, 2.0, 1.0, 0.25)
    D90 = rotate_D(m0.D, 90.0)
    assert D90[0, 0] == pytest.approx(m0.D[1, 1])
    assert D90[1, 1] == pytest.approx(m0.D[0, 0])
    assert abs(D90[0, 2]) < 1e-12


def test_rotation_leaves_isotropic_unchanged():
    m = isotropic(1.0, 0.3)
    assert np.allclose(rotate_D(m.D, 37.0), m.D, atol=1e-12)


@given(st.floats(0.0, 180.0))
@settings(max_examples=40, deadline=None)
def test_angle_ply_is_orthotropic_in_xy(angle):
    m = angle_ply_laminate(144.8e9, 11.7e9, 9.66e9, 0.21, angle)
    assert abs(m.D[0, 2]) < 1e-6 * m.D[0, 0]
    assert abs(m.D[1, 2]) < 1e-6 * m.D[0, 0]
    mirror = angle_ply_laminate(144.8e9, 11.7e9, 9.66e9, 0.21, 180.0 - angle)
    assert np.allclose(m.D, mirror.D, rtol=1e-12, atol=1e-3)


@given(st.floats(0.05, 20.0), st.floats(-90.0, 90.0))
@settings(max_examples=40, deadline=None)
def test_orthotropic_D_positive_definite(phi, angle):
    m = orthotropic_from_phi(6e9, 0.03, phi, angle)
    assert np.all(np.linalg.eigvalsh(m.D) > 0)
    assert np.allclose(m.D, m.D.T)
