import numpy as np
import pytest
from hypothesis import given, strategies as st

from tline import fem1d

import mms


def test_gauss_rule_exact_for_cubics():
    mesh = fem1d.Mesh1D(2.0, 4)
    # sum of load vector entries = integral of f
    f = lambda x: 3 * x ** 3 - x + 1
    assert fem1d.assemble_load(mesh, f).sum() == pytest.approx(3 * 16 / 4 - 2 + 2)


def test_element_stiffness_pattern():
    mesh = fem1d.Mesh1D(2.0, 2)   # h = 1
    k = fem1d.assemble_stiffness(mesh, 1.0).dense()
    np.testing.assert_allclose(k, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    k2 = fem1d.assemble_stiffness(mesh, 2.0).dense()
    np.testing.assert_allclose(k2, [[2, -2, 0], [-2, 4, -2], [0, -2, 2]])


def test_element_mass_pattern():
    mesh = fem1d.Mesh1D(6.0, 2)   # h = 3
    m = fem1d.assemble_mass(mesh, 1.0).dense()
    np.testing.assert_allclose(m, 3.0 / 6 * np.array([[2, 1, 0], [1, 4, 1], [0, 1, 2]]))


@given(st.integers(2, 40), st.floats(0.1, 10))
def test_stiffness_rows_sum_to_zero(n, c):
    mesh = fem1d.Mesh1D(1.0, n)
    k = fem1d.assemble_stiffness(mesh, lambda x: c + x)
    np.testing.assert_allclose(k.matvec(np.ones(n + 1)), 0.0, atol=1e-9 * c * n)


@given(st.integers(2, 40), st.floats(0.1, 10))
def test_mass_total_equals_integral(n, c):
    mesh = fem1d.Mesh1D(2.0, n)
    m = fem1d.assemble_mass(mesh, lambda x: c * x)
    # 1^T M 1 = int c x dx over [0, 2]
    assert m.matvec(np.ones(n + 1)).sum() == pytest.approx(2 * c)


def test_gauss_array_coefficient_matches_callable():
    mesh = fem1d.Mesh1D(1.0, 7)
    c = lambda x: np.exp(x)
    a = fem1d.assemble_stiffness(mesh, c)
    b = fem1d.assemble_stiffness(mesh, c(mesh.gauss_points))
    np.testing.assert_array_equal(a.diag, b.diag)


def test_interpolate_gradient_average():
    mesh = fem1d.Mesh1D(4.0, 4)
    u = 2.0 * mesh.nodes + 1
    np.testing.assert_allclose(mesh.interpolate(u), 2.0 * mesh.gauss_points + 1)
    np.testing.assert_allclose(mesh.gradient(u), 2.0)
    np.testing.assert_allclose(mesh.nodal_average([1.0, 3.0, 5.0, 7.0]), [1, 2, 4, 6, 7])


def test_bar_under_end_load():
    # u(0) = 0, EA u'' = 0, EA u'(L) = P  ->  u = P x / EA
    mesh = fem1d.Mesh1D(10.0, 20)
    ea, p = 5.0, 2.0
    s = fem1d.apply_point_load(fem1d.assemble_stiffness(mesh, ea), -1, p)
    s = fem1d.apply_dirichlet(s, 0, 0.0)
    u = fem1d.solve(s).values
    np.testing.assert_allclose(u, p * mesh.nodes / ea, rtol=1e-12, atol=1e-14)


def test_dirichlet_keeps_symmetry_and_value():
    mesh = fem1d.Mesh1D(1.0, 5)
    s = fem1d.assemble_stiffness(mesh, 1.0) + fem1d.assemble_mass(mesh, 1.0)
    s2 = fem1d.apply_dirichlet(s, 2, 3.0)
    d = s2.dense()
    np.testing.assert_array_equal(d, d.T)
    assert fem1d.solve(s2).values[2] == pytest.approx(3.0)
    # the input is left untouched
    assert s.off[1] != 0.0


def test_mms_second_order():
    e1, e2 = mms.l2_error(100), mms.l2_error(200)
    assert 3.5 <= e1 / e2 <= 4.5
    assert e2 < 1e-4


def test_mms_nodal_values_close():
    mesh, uh = mms.solve(64)
    np.testing.assert_allclose(uh, mms.exact(mesh.nodes), atol=1e-3)


def test_singular_system_detected():
    mesh = fem1d.Mesh1D(1.0, 4)
    s = fem1d.assemble_stiffness(mesh, 1.0)  # pure Neumann: singular
    s.rhs[:] = 1.0
    with pytest.raises(fem1d.FEMError):
        fem1d.solve(s)


def test_residual_check(monkeypatch):
    mesh = fem1d.Mesh1D(1.0, 4)
    s = fem1d.assemble_stiffness(mesh, 1.0) + fem1d.assemble_mass(mesh, 1.0)
    s.rhs[:] = 1.0
    x = fem1d.solve(s).values
    assert fem1d.relative_residual(s, x) < 1e-14
    assert fem1d.relative_residual(s, 1.01 * x) == pytest.approx(0.01)
    monkeypatch.setattr(fem1d, "RESIDUAL_TOL", -1.0)
    with pytest.raises(fem1d.FEMError, match="condition estimate"):
        fem1d.solve(s)


def test_bad_coefficient_reports_element():
    mesh = fem1d.Mesh1D(1.0, 4)
    cg = np.ones((4, 2))
    cg[2, 1] = np.nan
    with pytest.raises(fem1d.FEMError, match="element 2"):
        fem1d.assemble_stiffness(mesh, cg)


@given(st.integers(2, 60), st.integers(0, 2 ** 32 - 1))
def test_solve_residual_bound(n, seed):
    rng = np.random.default_rng(seed)
    mesh = fem1d.Mesh1D(1.0, n)
    s = fem1d.assemble_stiffness(mesh, rng.uniform(0.5, 2.0, (n, 2))) + fem1d.assemble_mass(mesh, 1.0)
    s.rhs = rng.normal(size=n + 1)
    x = fem1d.solve(s).values
    assert fem1d.relative_residual(s, x) <= fem1d.RESIDUAL_TOL


def test_mesh_and_system_validation():
    with pytest.raises(ValueError):
        fem1d.Mesh1D(1.0, 1)
    with pytest.raises(ValueError):
        fem1d.GlobalSystem(np.ones(3), np.ones(3))
    with pytest.raises(fem1d.FEMError):
        fem1d.NodalField(np.array([np.inf]))
