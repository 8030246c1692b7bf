"""
Solvers for the Sylvester equation ``G @ X + X @ R = Q``.

Four methods share one estimator, :class:`SylvesterSolver`:

``bartels-stewart``
    Real Schur forms of ``G`` and ``R``, transformed right-hand side,
    block back-substitution on the quasi-triangular factors, back
    transformation.
``hessenberg-schur``
    As above but ``G`` is only reduced to Hessenberg form; each column
    (pair) of the transformed problem becomes a banded linear system.
``kronecker-gauss``
    The ``nm x nm`` system ``(I_m (x) G + R^T (x) I_n) vec(X) = vec(Q)``
    solved by Gaussian elimination.  Used as the reference solution.
``centro-split``
    Half-size decoupling of centrosymmetric ``G`` and ``R``; see
    :mod:`dqlyap.centrosym`.

``fit(G, R)`` does the factorization work and ``transform(Q)`` the work
per right-hand side, so a fitted solver can be reused across many
right-hand sides (time stepping).
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import NoUniqueSolutionError, ParameterError, ShapeError, SingularMatrixError, SizeError
from .linalg import (
    FlopCounter,
    as_matrix,
    hessenberg,
    kron,
    lower_banded_solve,
    lu_factor,
    lu_solve,
    lu_solve_factored,
    matmul,
    real_schur,
    schur_blocks,
    schur_eigenvalues,
    vec_stack,
    vec_unstack,
)

__all__ = [
    "METHODS",
    "SylvesterProblem",
    "SolveReport",
    "SylvesterSolution",
    "SylvesterSolver",
    "solve_sylvester",
    "solve_bartels_stewart",
    "solve_hessenberg_schur",
    "solve_kronecker_baseline",
    "flop_model",
    "relative_residual",
]

METHODS = ("bartels-stewart", "hessenberg-schur", "kronecker-gauss", "centro-split")
COLLISION_TOL = 1e-12
MAX_KRONECKER_UNKNOWNS = 4096

# Instrumented-count calibration, coefficients of (n^3, m^3, n^2 m, n m^2);
# least-squares fit on random dense operators with n, m in {8, ..., 32}.
_CALIBRATION = {
    "bartels-stewart": (14.7, 14.7, 2.2, 2.2),
    "hessenberg-schur": (2.2, 14.9, 6.5, 0.2),
}


@dataclass(frozen=True)
class SylvesterProblem:
    """The triple ``(G, R, Q)`` of ``G X + X R = Q``."""

    g: np.ndarray
    r: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        g = as_matrix(self.g, "G", square=True)
        r = as_matrix(self.r, "R", square=True)
        q = as_matrix(self.q, "Q")
        if q.shape != (g.shape[0], r.shape[0]):
            raise ShapeError(
                f"Q has shape {q.shape}, expected {(g.shape[0], r.shape[0])}"
            )
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "q", q)

    @property
    def shape(self):
        return self.q.shape


@dataclass
class SolveReport:
    method: str
    counted_multiplications: int
    model_multiplications: float
    wall_time: float
    relative_residual: float
    note: str | None = None

    def to_dict(self):
        return asdict(self)


@dataclass
class SylvesterSolution:
    x: np.ndarray
    report: SolveReport


def relative_residual(g, r, q, x) -> float:
    """``||G X + X R - Q||_F / max(||Q||_F, eps)``; exactly 0 for an exact solve."""
    res = np.linalg.norm(g @ x + x @ r - q)
    return 0.0 if res == 0.0 else float(res / max(np.linalg.norm(q), np.finfo(float).eps))


def _rthr(n, m):
    return n**3 + 4.0 / 3.0 * m**3 + 7.0 * n**2 * m + 5.0 * n * m**2 + n**2


def flop_model(method: str, n: int, m: int) -> float:
    """Modelled scalar-multiplication count for an ``n x m`` Sylvester solve.

    ``r-thr`` and ``kronecker-gauss`` are analytic counts; ``centro-split``
    is twice the ``r-thr`` count at half size.  ``bartels-stewart`` and
    ``hessenberg-schur`` return the calibration curve of this package's
    instrumented implementations.
    """
    if n < 1 or m < 1:
        raise ParameterError("n and m must be positive")
    if method == "r-thr":
        return _rthr(n, m)
    if method == "kronecker-gauss":
        return (n * m) ** 3 / 3.0
    if method == "centro-split":
        return 2.0 * _rthr(n / 2.0, m / 2.0)
    if method in _CALIBRATION:
        c = _CALIBRATION[method]
        return c[0] * n**3 + c[1] * m**3 + c[2] * n * n * m + c[3] * n * m * m
    raise ParameterError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Building blocks shared with the centrosymmetric solver
# ---------------------------------------------------------------------------

def check_spectra(schur_g, schur_r, scale, tol=COLLISION_TOL, blocks=None):
    """Raise if an eigenvalue of G equals an eigenvalue of -R."""
    gre, gim = schur_eigenvalues(schur_g.t)
    rre, rim = schur_eigenvalues(schur_r.t)
    gap = np.hypot(gre[:, None] + rre[None, :], gim[:, None] + rim[None, :])
    i, j = np.unravel_index(np.argmin(gap), gap.shape)
    if gap[i, j] <= tol * scale:
        pair = ((float(gre[i]), float(gim[i])), (float(rre[j]), float(rim[j])))
        raise NoUniqueSolutionError(
            f"eigenvalue {pair[0]} of G collides with eigenvalue {pair[1]} of -R "
            f"(gap {gap[i, j]:.3e})",
            eigenvalues=pair,
            blocks=blocks,
        )


def _small_sylvester(s, t, rhs, counter):
    p, q = rhs.shape
    if p == 1 and q == 1:
        denom = s[0, 0] + t[0, 0]
        if denom == 0.0:
            raise NoUniqueSolutionError("zero diagonal sum in back-substitution")
        if counter is not None:
            counter.add(1)
        return rhs / denom
    system = kron(np.eye(q), s) + kron(t.T, np.eye(p))
    try:
        y = lu_solve(system, vec_stack(rhs), counter)
    except SingularMatrixError as exc:
        raise NoUniqueSolutionError("singular block system in back-substitution") from exc
    return vec_unstack(y, (p, q))


def solve_quasi_triangular(s, t, f, counter=None):
    """Solve ``S Y + Y T = F`` with ``S`` and ``T`` upper quasi-triangular."""
    n, m = f.shape
    y = np.zeros((n, m))
    s_blocks = schur_blocks(s)
    for j0, q in schur_blocks(t):
        cols = slice(j0, j0 + q)
        rhs = f[:, cols].copy()
        if j0 > 0:
            rhs -= matmul(y[:, :j0], t[:j0, cols], counter)
        for i0, p in reversed(s_blocks):
            rows = slice(i0, i0 + p)
            r = rhs[rows]
            if i0 + p < n:
                r = r - matmul(s[rows, i0 + p:], y[i0 + p:, cols], counter)
            y[rows, cols] = _small_sylvester(s[rows, rows], t[cols, cols], r, counter)
    return y


def solve_hessenberg_triangular(h, t, f, counter=None):
    """Solve ``H Y + Y T = F`` with ``H`` upper Hessenberg, ``T`` quasi-triangular."""
    n, m = f.shape
    y = np.zeros((n, m))
    eye = np.eye(n)
    for j0, q in schur_blocks(t):
        cols = slice(j0, j0 + q)
        rhs = f[:, cols].copy()
        if j0 > 0:
            rhs -= matmul(y[:, :j0], t[:j0, cols], counter)
        try:
            if q == 1:
                y[:, j0] = lower_banded_solve(h + t[j0, j0] * eye, rhs[:, 0], 1, counter)
            else:
                (t11, t12), (t21, t22) = t[cols, cols]
                z = np.zeros((2 * n, 2 * n))
                z[0::2, 0::2] = h + t11 * eye
                z[1::2, 1::2] = h + t22 * eye
                z[0::2, 1::2] = t21 * eye
                z[1::2, 0::2] = t12 * eye
                rv = np.empty(2 * n)
                rv[0::2], rv[1::2] = rhs[:, 0], rhs[:, 1]
                sol = lower_banded_solve(z, rv, 2, counter)
                y[:, j0], y[:, j0 + 1] = sol[0::2], sol[1::2]
        except SingularMatrixError as exc:
            raise NoUniqueSolutionError(
                f"G and -R share an eigenvalue (singular system for column {j0})"
            ) from exc
    return y


def schur_solve(u, s, v, t, q, counter, triangular_solve=solve_quasi_triangular,
                v_in=None, u_out=None):
    """Steps 2-4 given ``G = u s u^T`` and ``R = v t v^T``.

    ``v_in`` and ``u_out`` replace ``v`` in the forward transform and ``u``
    in the back transform; the split solver passes row-scaled copies.
    """
    f = matmul(matmul(u.T, q, counter), v if v_in is None else v_in, counter)
    y = triangular_solve(s, t, f, counter)
    return matmul(matmul(u if u_out is None else u_out, y, counter), v.T, counter)


# ---------------------------------------------------------------------------
# Estimator
# ---------------------------------------------------------------------------

class SylvesterSolver(BaseEstimator):
    """Factorize ``(G, R)`` once, then solve ``G X + X R = Q`` for any ``Q``.

    Parameters
    ----------
    method : str
        One of :data:`METHODS`.
    collision_tol : float
        Relative tolerance of the eigenvalue-collision test done after the
        Schur reductions.
    max_unknowns : int
        Size cap for ``kronecker-gauss``.

    Attributes
    ----------
    method_ : str
        Method actually used (``centro-split`` falls back to
        ``bartels-stewart`` when an operand is not centrosymmetric).
    note_ : str or None
        Reason for a fallback.
    factor_multiplications_ : int
        Multiplications spent in :meth:`fit`.
    """

    def __init__(self, method="bartels-stewart", collision_tol=COLLISION_TOL,
                 max_unknowns=MAX_KRONECKER_UNKNOWNS):
        self.method = method
        self.collision_tol = collision_tol
        self.max_unknowns = max_unknowns

    def fit(self, G, R):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}; expected one of {METHODS}")
        g = as_matrix(G, "G", square=True)
        r = as_matrix(R, "R", square=True)
        self.g_, self.r_ = g, r
        self.n_, self.m_ = g.shape[0], r.shape[0]
        self.note_ = None
        scale = np.linalg.norm(g) + np.linalg.norm(r)
        counter = FlopCounter()
        method = self.method
        if method == "centro-split":
            from .centrosym import CentroFactorization, classify_symmetry

            tags = (classify_symmetry(g).tag, classify_symmetry(r).tag)
            if tags == ("centrosymmetric", "centrosymmetric"):
                self.centro_ = CentroFactorization(g, r, counter, self.collision_tol)
            else:
                method = "bartels-stewart"
                self.note_ = (
                    f"operands not both centrosymmetric (G: {tags[0]}, R: {tags[1]}); "
                    "solved by bartels-stewart"
                )
        if method == "bartels-stewart":
            self.schur_g_ = real_schur(g, counter=counter)
            self.schur_r_ = real_schur(r, counter=counter)
            check_spectra(self.schur_g_, self.schur_r_, scale, self.collision_tol)
        elif method == "hessenberg-schur":
            self.hess_g_ = hessenberg(g, counter)
            self.schur_r_ = real_schur(r, counter=counter)
        elif method == "kronecker-gauss":
            size = self.n_ * self.m_
            if size > self.max_unknowns:
                raise SizeError(
                    f"{size} unknowns exceed the Kronecker cap of {self.max_unknowns}"
                )
            system = kron(np.eye(self.m_), g) + kron(r.T, np.eye(self.n_))
            try:
                self.lu_ = lu_factor(system, counter)
            except SingularMatrixError as exc:
                raise NoUniqueSolutionError(
                    "assembled Kronecker system is singular"
                ) from exc
        self.method_ = method
        self.factor_multiplications_ = counter.multiplications
        return self

    def _solve(self, q, counter):
        method = self.method_
        if method == "bartels-stewart":
            sg, sr = self.schur_g_, self.schur_r_
            return schur_solve(sg.u, sg.t, sr.u, sr.t, q, counter)
        if method == "hessenberg-schur":
            h, p = self.hess_g_
            sr = self.schur_r_
            return schur_solve(p, h, sr.u, sr.t, q, counter, solve_hessenberg_triangular)
        if method == "kronecker-gauss":
            lu, piv = self.lu_
            x = lu_solve_factored(lu, piv, vec_stack(q), counter)
            return vec_unstack(x, q.shape)
        return self.centro_.solve(q, counter)

    def solve(self, Q) -> SylvesterSolution:
        """Solve for one right-hand side.

        The report counts only the work done for this right-hand side; the
        factorization cost is in ``factor_multiplications_``.
        """
        check_is_fitted(self, "method_")
        q = as_matrix(Q, "Q")
        if q.shape != (self.n_, self.m_):
            raise ShapeError(f"Q has shape {q.shape}, expected {(self.n_, self.m_)}")
        counter = FlopCounter()
        start = time.perf_counter()
        x = self._solve(q, counter)
        elapsed = time.perf_counter() - start
        report = SolveReport(
            method=self.method_,
            counted_multiplications=counter.multiplications,
            model_multiplications=flop_model(self.method_, self.n_, self.m_),
            wall_time=elapsed,
            relative_residual=relative_residual(self.g_, self.r_, q, x),
            note=self.note_,
        )
        return SylvesterSolution(x=x, report=report)

    def transform(self, Q):
        return self.solve(Q).x


def solve_sylvester(p: SylvesterProblem, method="bartels-stewart", **params) -> SylvesterSolution:
    """One-shot solve; the report includes the factorization work and time."""
    start = time.perf_counter()
    solver = SylvesterSolver(method=method, **params).fit(p.g, p.r)
    sol = solver.solve(p.q)
    sol.report.counted_multiplications += solver.factor_multiplications_
    sol.report.wall_time = time.perf_counter() - start
    return sol


def solve_bartels_stewart(p: SylvesterProblem) -> SylvesterSolution:
    return solve_sylvester(p, "bartels-stewart")


def solve_hessenberg_schur(p: SylvesterProblem) -> SylvesterSolution:
    return solve_sylvester(p, "hessenberg-schur")


def solve_kronecker_baseline(p: SylvesterProblem, max_unknowns=MAX_KRONECKER_UNKNOWNS) -> SylvesterSolution:
    return solve_sylvester(p, "kronecker-gauss", max_unknowns=max_unknowns)
