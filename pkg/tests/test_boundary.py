import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from dqlyap.boundary import (
    BoundaryCondition,
    Face,
    build_offset_matrices,
    reconstruct_full_field,
    reduce_operator,
)
from dqlyap.dq import DqOperator, build_dq_operator, chebyshev_lobatto_points, uniform_points
from dqlyap.exceptions import ShapeError, SingularMatrixError, UnsupportedBoundaryError

COMBOS = [
    ("dirichlet", "dirichlet"),
    ("dirichlet", "neumann"),
    ("neumann", "dirichlet"),
]


def polynomial_with_bcs(coeffs, kinds, values):
    """Polynomial ``p + c0 + c1 x`` whose face data equal ``values``."""
    p = np.polynomial.Polynomial(coeffs)
    dp = p.deriv()
    (kl, kr), (vl, vr) = kinds, values
    if (kl, kr) == ("dirichlet", "dirichlet"):
        c0 = vl - p(0)
        c1 = vr - p(1) - c0
    elif (kl, kr) == ("dirichlet", "neumann"):
        c0 = vl - p(0)
        c1 = vr - dp(1)
    else:
        c1 = vl - dp(0)
        c0 = vr - p(1) - c1
    return p + np.polynomial.Polynomial([c0, c1])


class TestFaces:
    def test_neumann_both_rejected(self):
        with pytest.raises(UnsupportedBoundaryError):
            BoundaryCondition(Face("neumann"), Face("neumann"))

    def test_unknown_kind(self):
        with pytest.raises(UnsupportedBoundaryError):
            Face("robin")

    def test_symmetric_flag(self):
        assert BoundaryCondition.dirichlet(1.0, 1.0).symmetric
        assert not BoundaryCondition.dirichlet(1.0, 0.0).symmetric


class TestReduce:
    @pytest.mark.parametrize("n", [3, 5, 9])
    def test_homogeneous_is_submatrix(self, n):
        op = build_dq_operator(chebyshev_lobatto_points(n))
        red = reduce_operator(op, BoundaryCondition.dirichlet())
        assert np.array_equal(red.a_bar, op.a[1:-1, 1:-1])
        assert np.array_equal(red.b_bar, op.b[1:-1, 1:-1])
        assert not red.a_offset.any() and not red.b_offset.any()
        assert red.a_bar.shape == (n - 2, n - 2)

    def test_dirichlet_one_left(self):
        op = build_dq_operator(chebyshev_lobatto_points(7))
        red = reduce_operator(op, BoundaryCondition.dirichlet(1.0, 0.0))
        np.testing.assert_array_equal(red.a_offset, op.a[1:-1, 0])
        np.testing.assert_array_equal(red.b_offset, op.b[1:-1, 0])

    def test_symbolic_elimination_n3(self):
        h, q, phi2 = sp.symbols("h q phi2")
        a = sp.Matrix([[-3, 4, -1], [-1, 0, 1], [1, -4, 3]])
        phi3 = sp.solve(sp.Eq(a[2, 0] * h + a[2, 1] * phi2 + a[2, 2] * sp.Symbol("p3"), q),
                        sp.Symbol("p3"))[0]
        assert sp.simplify(phi3 - (q - h + 4 * phi2) / 3) == 0
        deriv = sp.expand(a[1, 0] * h + a[1, 1] * phi2 + a[1, 2] * phi3)
        b = a * a
        second = sp.expand(b[1, 0] * h + b[1, 1] * phi2 + b[1, 2] * phi3)
        hv, qv = 0.7, -1.3
        red = reduce_operator(build_dq_operator(uniform_points(3)),
                              BoundaryCondition(Face("dirichlet", hv), Face("neumann", qv)))
        subs = {h: hv, q: qv}
        assert red.a_bar[0, 0] == pytest.approx(float(deriv.coeff(phi2)), abs=1e-13)
        assert red.a_offset[0] == pytest.approx(float(deriv.subs(phi2, 0).subs(subs)), abs=1e-13)
        assert red.b_bar[0, 0] == pytest.approx(float(second.coeff(phi2)), abs=1e-12)
        assert red.b_offset[0] == pytest.approx(float(second.subs(phi2, 0).subs(subs)), abs=1e-12)
        np.testing.assert_allclose(red.boundary_values(np.array([2.0])),
                                   [hv, (qv - hv + 8.0) / 3.0], atol=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(4, 11),
        st.sampled_from(COMBOS),
        st.lists(st.floats(-2, 2), min_size=2, max_size=2),
        st.integers(0, 2**32 - 1),
    )
    def test_consistency_on_polynomials(self, n, kinds, values, seed):
        coeffs = np.random.default_rng(seed).standard_normal(n)
        phi = polynomial_with_bcs(coeffs, kinds, values)
        x = chebyshev_lobatto_points(n)
        bc = BoundaryCondition(Face(kinds[0], values[0]), Face(kinds[1], values[1]))
        red = reduce_operator(build_dq_operator(x), bc)
        inner = phi(x[1:-1])
        np.testing.assert_allclose(red.a_bar @ inner + red.a_offset, phi.deriv()(x[1:-1]), atol=1e-8)
        np.testing.assert_allclose(red.b_bar @ inner + red.b_offset, phi.deriv(2)(x[1:-1]), atol=1e-8 * n**2)

    def test_neumann_left_mirrors_right(self):
        x = uniform_points(7)
        op = build_dq_operator(x)
        left = reduce_operator(op, BoundaryCondition(Face("neumann", 0.4), Face("dirichlet", 1.5)))
        right = reduce_operator(op, BoundaryCondition(Face("dirichlet", 1.5), Face("neumann", -0.4)))
        # x -> 1 - x flips the slope sign and reverses the interior ordering
        np.testing.assert_allclose(left.a_bar, -right.a_bar[::-1, ::-1], atol=1e-11)
        np.testing.assert_allclose(left.b_bar, right.b_bar[::-1, ::-1], atol=1e-9)
        np.testing.assert_allclose(left.a_offset, -right.a_offset[::-1], atol=1e-11)

    def test_vanishing_neumann_pivot(self):
        op = build_dq_operator(uniform_points(5))
        a = op.a.copy()
        a[-1, -1] = 0.0
        with pytest.raises(SingularMatrixError):
            reduce_operator(DqOperator(a, a @ a, op.points),
                            BoundaryCondition(Face("dirichlet"), Face("neumann")))

    def test_too_few_points(self):
        op = build_dq_operator(uniform_points(2))
        with pytest.raises(ShapeError):
            reduce_operator(op, BoundaryCondition.dirichlet())


class TestOffsetMatrices:
    def _reduced(self, n, bc):
        return reduce_operator(build_dq_operator(chebyshev_lobatto_points(n)), bc)

    def test_zero(self):
        red = self._reduced(5, BoundaryCondition.dirichlet())
        ox, oy = build_offset_matrices(red, red, 3, 3)
        assert not ox.a0.any() and not oy.b0.any()

    def test_stacking_pattern(self):
        red = self._reduced(4, BoundaryCondition.dirichlet())
        red = type(red)(red.a_bar, red.b_bar, np.array([1.0, 2.0]), red.b_offset,
                        red.recovery, red.recovery_offset)
        red_y = self._reduced(5, BoundaryCondition.dirichlet())
        ox, _ = build_offset_matrices(red, red_y, 2, 3)
        np.testing.assert_array_equal(ox.a0, [[1, 1, 1], [2, 2, 2]])

    def test_shape_mismatch(self):
        red = self._reduced(5, BoundaryCondition.dirichlet())
        with pytest.raises(ShapeError):
            build_offset_matrices(red, red, 4, 3)

    def test_matrix_form_derivatives(self):
        # psi = f(x) + g(y) x (1 - x)^2 has constant x-face data for
        # Dirichlet at x=0 and Neumann at x=1; the y analogue likewise.
        nx, ny = 8, 7
        x, y = chebyshev_lobatto_points(nx), chebyshev_lobatto_points(ny)
        f = lambda s: 1.0 + 2.0 * s - s**3
        df = lambda s: 2.0 - 3.0 * s**2
        g = lambda s: s**2 - 0.5
        bump = lambda s: s * (1 - s) ** 2
        dbump = lambda s: (1 - s) ** 2 - 2 * s * (1 - s)
        bc_x = BoundaryCondition(Face("dirichlet", f(0.0)), Face("neumann", df(1.0)))
        bc_y = BoundaryCondition.dirichlet(0.3, -0.2)
        red_x = reduce_operator(build_dq_operator(x), bc_x)
        red_y = reduce_operator(build_dq_operator(y), bc_y)
        xi, yi = np.meshgrid(x[1:-1], y[1:-1], indexing="ij")
        psi = f(xi) + g(yi) * bump(xi)
        ox, oy = build_offset_matrices(red_x, red_y, nx - 2, ny - 2)
        np.testing.assert_allclose(red_x.a_bar @ psi + ox.a0, df(xi) + g(yi) * dbump(xi), atol=1e-10)
        h = lambda s: 0.3 - 0.5 * s
        chi = h(yi) + (xi**2 + 1.0) * yi * (1 - yi)
        np.testing.assert_allclose(chi @ red_y.a_bar.T + oy.a0.T,
                                   -0.5 + (xi**2 + 1.0) * (1 - 2 * yi), atol=1e-10)


class TestReconstruct:
    def _setup(self, bc_x, bc_y, n=7, m=6):
        x, y = chebyshev_lobatto_points(n), chebyshev_lobatto_points(m)
        return (x, y, reduce_operator(build_dq_operator(x), bc_x),
                reduce_operator(build_dq_operator(y), bc_y))

    def test_zero(self):
        bc = BoundaryCondition.dirichlet()
        _, _, rx, ry = self._setup(bc, bc)
        assert not reconstruct_full_field(np.zeros((5, 4)), rx, ry, bc, bc).any()

    def test_parabola_boundary_zeros(self):
        bc = BoundaryCondition.dirichlet()
        x, y, rx, ry = self._setup(bc, bc)
        field = np.outer(x * (1 - x), np.ones_like(y))
        full = reconstruct_full_field(field[1:-1, 1:-1], rx, ry, bc, bc)
        assert not full[[0, -1], :].any() and not full[:, [0, -1]].any()
        np.testing.assert_array_equal(full[1:-1, 1:-1], field[1:-1, 1:-1])

    def test_neumann_face_quadrature(self, rng):
        bc_x = BoundaryCondition(Face("dirichlet", 0.5), Face("neumann", 2.0))
        bc_y = BoundaryCondition(Face("neumann", -1.0), Face("dirichlet", 0.0))
        x, y, rx, ry = self._setup(bc_x, bc_y)
        full = reconstruct_full_field(rng.standard_normal((5, 4)), rx, ry, bc_x, bc_y)
        ax = build_dq_operator(x).a
        ay = build_dq_operator(y).a
        np.testing.assert_allclose(ax[-1] @ full[:, 1:-1], 2.0, atol=1e-10)
        np.testing.assert_allclose(full[1:-1, :] @ ay[0], -1.0, atol=1e-10)
        np.testing.assert_array_equal(full[0, 1:-1], 0.5)

    def test_corner_coherence(self, rng):
        bc = BoundaryCondition.dirichlet(1.25, 1.25)
        _, _, rx, ry = self._setup(bc, bc)
        inner = rng.standard_normal((5, 4))
        np.testing.assert_array_equal(
            reconstruct_full_field(inner, rx, ry, bc, bc, order="xy"),
            reconstruct_full_field(inner, rx, ry, bc, bc, order="yx"),
        )

    def test_shape_mismatch(self):
        bc = BoundaryCondition.dirichlet()
        _, _, rx, ry = self._setup(bc, bc)
        with pytest.raises(ShapeError):
            reconstruct_full_field(np.zeros((4, 4)), rx, ry)
