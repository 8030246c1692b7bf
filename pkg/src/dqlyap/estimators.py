"""
Estimator-style wrappers around the DQ problem classes.

``fit`` builds the grid, reduces the boundaries and factorizes the
Sylvester operators; ``predict`` maps a source term to the full-grid field
and can be called repeatedly without refactorizing.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .boundary import BoundaryCondition, build_offset_matrices, reconstruct_full_field, reduce_operator
from .dq import GridAxis, build_dq_operator
from .exceptions import ParameterError
from .problems import SOLVE_METHODS, sample_field
from .sylvester import SylvesterSolver

__all__ = ["PoissonDQ", "ConvectionDiffusionDQ"]


class _SteadyDQ(BaseEstimator):
    def _axes(self):
        sizes = self.n_points if np.ndim(self.n_points) else (self.n_points, self.n_points)
        if len(sizes) != 2:
            raise ParameterError("n_points must be an int or a pair")
        return [GridAxis.from_kind(self.grid, int(s)) for s in sizes]

    def _fit_operators(self, g_fn, r_fn, q_fn):
        if self.method not in SOLVE_METHODS:
            raise ParameterError(f"unknown method {self.method!r}")
        bc_x = self.bc_x or BoundaryCondition.dirichlet()
        bc_y = self.bc_y or BoundaryCondition.dirichlet()
        ax, ay = self._axes()
        self.axes_ = (ax, ay)
        self.bcs_ = (bc_x, bc_y)
        self.red_x_ = reduce_operator(build_dq_operator(ax.points), bc_x)
        self.red_y_ = reduce_operator(build_dq_operator(ay.points), bc_y)
        n, m = self.red_x_.n_interior, self.red_y_.n_interior
        off_x, off_y = build_offset_matrices(self.red_x_, self.red_y_, n, m)
        self.g_ = g_fn(self.red_x_.b_bar, n)
        self.r_ = r_fn(self.red_y_.b_bar)
        self.q_offset_ = q_fn(off_x.b0, off_y.b0.T)
        method = "centro-split" if self.method == "auto" else self.method
        self.solver_ = SylvesterSolver(method).fit(self.g_, self.r_)
        self.report_ = None
        return self

    def _rhs(self, source):
        raise NotImplementedError

    def predict(self, source=None):
        """Full-grid field for ``source`` (interior array, callable, scalar or None)."""
        check_is_fitted(self, "solver_")
        ax, ay = self.axes_
        s = sample_field(source, ax.interior, ay.interior)
        sol = self.solver_.solve(self._rhs(s))
        self.report_ = sol.report
        return reconstruct_full_field(sol.x, self.red_x_, self.red_y_, *self.bcs_)

    def transform(self, source=None):
        return self.predict(source)

    @property
    def grid_points_(self):
        check_is_fitted(self, "axes_")
        return tuple(ax.points for ax in self.axes_)


class PoissonDQ(_SteadyDQ):
    """``phi_xx + beta^2 phi_yy + S = 0`` on the unit square."""

    def __init__(self, n_points=11, grid="chebyshev", beta=1.0, bc_x=None, bc_y=None, method="auto"):
        self.n_points = n_points
        self.grid = grid
        self.beta = beta
        self.bc_x = bc_x
        self.bc_y = bc_y
        self.method = method

    def fit(self, X=None, y=None):
        if not self.beta > 0:
            raise ParameterError("beta must be positive")
        b2 = self.beta**2
        return self._fit_operators(
            lambda bx, n: bx,
            lambda by: b2 * by.T,
            lambda b0x, b0y: -(b0x + b2 * b0y),
        )

    def _rhs(self, s):
        return self.q_offset_ - s


class ConvectionDiffusionDQ(_SteadyDQ):
    """``alpha phi_xx + beta phi_yy - phi / (4 alpha) = f`` on the unit square."""

    def __init__(self, n_points=11, grid="chebyshev", alpha=1.0, beta=1.0, bc_x=None, bc_y=None,
                 method="auto"):
        self.n_points = n_points
        self.grid = grid
        self.alpha = alpha
        self.beta = beta
        self.bc_x = bc_x
        self.bc_y = bc_y
        self.method = method

    def fit(self, X=None, y=None):
        if self.alpha == 0:
            raise ParameterError("alpha must be nonzero")
        a, b = self.alpha, self.beta
        return self._fit_operators(
            lambda bx, n: a * bx - np.eye(n) / (4.0 * a),
            lambda by: b * by.T,
            lambda b0x, b0y: -(a * b0x + b * b0y),
        )

    def _rhs(self, f):
        return self.q_offset_ + f
