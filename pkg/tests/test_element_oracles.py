"""Element matrices against exact symbolic integration."""
import numpy as np
import pytest
import sympy as sp

from presstopo import darcy, elasticity
from presstopo.mesh import LOCAL_NODE_COORDS, build_mesh

X, Y = sp.symbols("x y")


def _shape():
    # Bilinear shape functions of the unit square, node order BL, BR, TR, TL.
    return [(1 - X) * (1 - Y), X * (1 - Y), X * Y, (1 - X) * Y]


def _integrate(expr):
    return sp.integrate(sp.integrate(expr, (X, 0, 1)), (Y, 0, 1))


@pytest.fixture(scope="module")
def symbolic():
    N = _shape()
    dNx = [sp.diff(n, X) for n in N]
    dNy = [sp.diff(n, Y) for n in N]
    kp = sp.Matrix(4, 4, lambda i, j: _integrate(dNx[i] * dNx[j] + dNy[i] * dNy[j]))
    kdp = sp.Matrix(4, 4, lambda i, j: _integrate(N[i] * N[j]))
    te = sp.zeros(8, 4)
    for a in range(4):
        for b in range(4):
            te[2 * a, b] = _integrate(N[a] * dNx[b])
            te[2 * a + 1, b] = _integrate(N[a] * dNy[b])
    nu = sp.Rational(3, 10)
    C = sp.Matrix([[1, nu, 0], [nu, 1, 0], [0, 0, (1 - nu) / 2]]) / (1 - nu**2)
    B = sp.zeros(3, 8)
    for a in range(4):
        B[0, 2 * a] = dNx[a]
        B[1, 2 * a + 1] = dNy[a]
        B[2, 2 * a] = dNy[a]
        B[2, 2 * a + 1] = dNx[a]
    ke = (B.T * C * B).applyfunc(_integrate)
    to_np = lambda m: np.array(m.evalf(20).tolist(), dtype=float)
    return {"Kp": to_np(kp), "KDp": to_np(kdp), "Te": to_np(te), "ke": to_np(ke)}


class TestFlowMatrices:
    def test_kp_matches_symbolic(self, symbolic):
        np.testing.assert_allclose(darcy.KP, symbolic["Kp"], atol=1e-15)

    def test_kdp_matches_symbolic(self, symbolic):
        np.testing.assert_allclose(darcy.KDP, symbolic["KDp"], atol=1e-15)

    def test_frozen_values(self):
        kp = np.array([[4, -1, -2, -1], [-1, 4, -1, -2], [-2, -1, 4, -1], [-1, -2, -1, 4]]) / 6
        kdp = np.array([[4, 2, 1, 2], [2, 4, 2, 1], [1, 2, 4, 2], [2, 1, 2, 4]]) / 36
        np.testing.assert_allclose(darcy.KP, kp, atol=1e-15)
        np.testing.assert_allclose(darcy.KDP, kdp, atol=1e-15)

    def test_row_sums_and_mass(self):
        assert np.abs(darcy.KP.sum(axis=1)).max() <= 1e-14
        assert abs(darcy.KDP.sum() - 1.0) <= 1e-14
        np.testing.assert_array_equal(darcy.KP, darcy.KP.T)
        np.testing.assert_array_equal(darcy.KDP, darcy.KDP.T)


class TestStiffness:
    def test_matches_symbolic(self, symbolic):
        np.testing.assert_allclose(elasticity.element_stiffness(0.3), symbolic["ke"], atol=1e-14)

    def test_leading_diagonal(self):
        nu = 0.3
        ke = elasticity.element_stiffness(nu)
        assert ke[0, 0] == pytest.approx((0.5 - nu / 6) / (1 - nu**2), rel=1e-14)

    @pytest.mark.parametrize("nu", [0.0, 0.3, 0.45])
    def test_three_rigid_body_modes(self, nu):
        ke = elasticity.element_stiffness(nu)
        np.testing.assert_allclose(ke, ke.T, atol=0)
        w = np.linalg.eigvalsh(ke)
        assert np.sum(np.abs(w) <= 1e-10 * np.trace(ke)) == 3
        assert w.min() > -1e-12

    def test_translation_in_null_space(self):
        ke = elasticity.element_stiffness(0.3)
        tx = np.tile([1.0, 0.0], 4)
        ty = np.tile([0.0, 1.0], 4)
        xy = LOCAL_NODE_COORDS
        rot = np.column_stack([-xy[:, 1], xy[:, 0]]).ravel()
        for v in (tx, ty, rot):
            assert np.abs(ke @ v).max() <= 1e-12


class TestTransformation:
    def test_matches_symbolic(self, symbolic):
        np.testing.assert_allclose(elasticity.TE, symbolic["Te"], atol=1e-15)
        assert elasticity.TE.shape == (8, 4)

    def test_constant_pressure_gives_no_force(self):
        assert np.abs(elasticity.TE @ np.full(4, 3.7)).max() <= 1e-14

    def test_unit_x_gradient(self):
        f = -elasticity.TE @ LOCAL_NODE_COORDS[:, 0]
        assert abs(f[0::2].sum() - (-1.0)) <= 1e-12
        assert abs(f[1::2].sum()) <= 1e-12

    def test_unit_y_gradient(self):
        f = -elasticity.TE @ LOCAL_NODE_COORDS[:, 1]
        assert abs(f[1::2].sum() - (-1.0)) <= 1e-12
        assert abs(f[0::2].sum()) <= 1e-12

    def test_columns_touch_one_element(self):
        _, dofs = build_mesh(1, 1)
        T = elasticity.assemble_transformation(dofs).toarray()
        np.testing.assert_allclose(T[np.ix_(dofs.u_dofs[0], dofs.p_dofs[0])], elasticity.TE)
