"""
DQ discretizations of the Poisson and convection-diffusion equations as
Sylvester equations ``G X + X R = Q``.

The unknown is the interior field: rows follow x, columns follow y
(``n = Nx - 2`` by ``m = Ny - 2``).

Poisson::

    phi_xx + beta^2 phi_yy + S = 0
    ->  B_x phi + phi (beta^2 B_y^T) = -(S + B0_x + beta^2 B0_y^T)

Steady convection-diffusion (diffusion form, optional source ``f``)::

    alpha phi_xx + beta phi_yy - phi / (4 alpha) = f
    ->  (alpha B_x - I / (4 alpha)) phi + phi (beta B_y^T)
            = f - alpha B0_x - beta B0_y^T

3-D steady convection-diffusion ``c_x = beta c_yy + gamma c_zz``: the
(x, y) plane is column-stacked into one long axis, giving::

    (I_y (x) A_x - beta B_y (x) I_x) C - C (gamma B_z^T)
            = gamma B0_z^T - vec(A0_x - beta B0_y^T)
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .boundary import (
    BoundaryCondition,
    Face,
    ReducedOperator,
    build_offset_matrices,
    reconstruct_full_field,
    reduce_operator,
)
from .dq import GridSpec, build_dq_operator
from .exceptions import NoUniqueSolutionError, ParameterError, ShapeError, SizeError
from .linalg import FlopCounter, as_matrix, kron, matmul, vec_stack
from .sylvester import (
    SolveReport,
    SylvesterProblem,
    SylvesterSolver,
    flop_model,
    solve_sylvester,
)

__all__ = [
    "PoissonSpec",
    "ConvDiffSpec",
    "ConvDiff3dSpec",
    "TransientSpec",
    "FieldSolution",
    "TransientResult",
    "assemble_poisson",
    "solve_poisson",
    "assemble_convdiff",
    "solve_convdiff",
    "assemble_convdiff3d",
    "solve_convdiff3d",
    "step_transient",
    "manufactured_poisson",
    "manufactured_convdiff",
    "sample_field",
    "full_field",
]

MAX_3D_UNKNOWNS = 4096
SOLVE_METHODS = ("auto", "bartels-stewart", "hessenberg-schur", "kronecker-gauss", "centro-split")


def _dirichlet():
    return BoundaryCondition.dirichlet()


@dataclass(frozen=True)
class PoissonSpec:
    grid: GridSpec
    beta: float = 1.0
    source: object = None
    bc_x: BoundaryCondition = field(default_factory=_dirichlet)
    bc_y: BoundaryCondition = field(default_factory=_dirichlet)

    def __post_init__(self):
        if len(self.grid.axes) != 2:
            raise ParameterError("Poisson problems need a 2-axis grid")
        if not self.beta > 0:
            raise ParameterError("aspect ratio beta must be positive")


@dataclass(frozen=True)
class ConvDiffSpec:
    grid: GridSpec
    alpha: float = 1.0
    beta: float = 1.0
    source: object = None
    bc_x: BoundaryCondition = field(default_factory=_dirichlet)
    bc_y: BoundaryCondition = field(default_factory=_dirichlet)

    def __post_init__(self):
        if len(self.grid.axes) != 2:
            raise ParameterError("convection-diffusion problems need a 2-axis grid")
        if self.alpha == 0:
            raise ParameterError("alpha must be nonzero")


@dataclass(frozen=True)
class ConvDiff3dSpec:
    grid: GridSpec
    beta: float = 1.0
    gamma: float = 1.0
    bc_x: BoundaryCondition = field(
        default_factory=lambda: BoundaryCondition(Face("dirichlet", 0.0), Face("neumann", 0.0))
    )
    bc_y: BoundaryCondition = field(default_factory=_dirichlet)
    bc_z: BoundaryCondition = field(default_factory=_dirichlet)
    max_unknowns: int = MAX_3D_UNKNOWNS

    def __post_init__(self):
        if len(self.grid.axes) != 3:
            raise ParameterError("3-D problems need a 3-axis grid")


@dataclass(frozen=True)
class TransientSpec:
    steady: ConvDiffSpec
    initial: object
    dt: float
    steps: int
    scheme: str = "backward-euler"

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt * self.steps)):
            raise ParameterError("dt must be positive and dt * steps finite")
        if self.steps < 1:
            raise ParameterError("steps must be positive")
        if self.scheme not in ("backward-euler", "rk4"):
            raise ParameterError(f"unknown scheme {self.scheme!r}")


@dataclass
class FieldSolution:
    """Solved field on the full grid plus the interior block that was solved for."""

    field: np.ndarray
    interior: np.ndarray
    report: SolveReport


@dataclass
class TransientResult:
    trajectory: list
    times: np.ndarray
    report: SolveReport
    factor_multiplications: int = 0
    step_multiplications: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def sample_field(source, *axes_points) -> np.ndarray:
    """Evaluate ``source`` on the tensor grid of ``axes_points``.

    ``source`` may be None (zero), a scalar, a callable of the coordinate
    arrays, or an array already of the right shape.
    """
    shape = tuple(len(p) for p in axes_points)
    if source is None:
        return np.zeros(shape)
    if callable(source):
        coords = np.meshgrid(*axes_points, indexing="ij")
        values = np.broadcast_to(np.asarray(source(*coords), dtype=np.float64), shape)
        return np.array(values)
    if np.isscalar(source):
        return np.full(shape, float(source))
    arr = np.asarray(source, dtype=np.float64)
    if arr.shape != shape:
        raise ShapeError(f"source has shape {arr.shape}, expected {shape}")
    return arr.copy()


def _reduce(axis, bc) -> ReducedOperator:
    return reduce_operator(build_dq_operator(axis.points), bc)


def _interior_points(grid):
    return [ax.interior for ax in grid.axes]


def _solve(problem, method):
    if method not in SOLVE_METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {SOLVE_METHODS}")
    return solve_sylvester(problem, "centro-split" if method == "auto" else method)


def manufactured_poisson(beta=1.0):
    """``(exact, source)`` for ``phi = sin(pi x) sin(pi y)`` with zero Dirichlet data."""

    def exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def source(x, y):
        return np.pi**2 * (1.0 + beta**2) * exact(x, y)

    return exact, source


def manufactured_convdiff(alpha=1.0, beta=1.0):
    """``(exact, source)`` for the convection-diffusion form with ``f`` on the right."""

    def exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def source(x, y):
        return -((alpha + beta) * np.pi**2 + 1.0 / (4.0 * alpha)) * exact(x, y)

    return exact, source


# ---------------------------------------------------------------------------
# 2-D Poisson
# ---------------------------------------------------------------------------

def _poisson_parts(spec: PoissonSpec):
    ax, ay = spec.grid.axes
    red_x, red_y = _reduce(ax, spec.bc_x), _reduce(ay, spec.bc_y)
    n, m = red_x.n_interior, red_y.n_interior
    off_x, off_y = build_offset_matrices(red_x, red_y, n, m)
    s = sample_field(spec.source, *_interior_points(spec.grid))
    b2 = spec.beta**2
    q = -(s + off_x.b0 + b2 * off_y.b0.T)
    return SylvesterProblem(red_x.b_bar, b2 * red_y.b_bar.T, q), red_x, red_y


def assemble_poisson(spec: PoissonSpec) -> SylvesterProblem:
    return _poisson_parts(spec)[0]


def solve_poisson(spec: PoissonSpec, method="auto") -> FieldSolution:
    """Solve and reconstruct the full-grid field.

    ``method="auto"`` uses the centrosymmetric split when both operators
    pass the symmetry test, otherwise bartels-stewart.
    """
    problem, red_x, red_y = _poisson_parts(spec)
    sol = _solve(problem, method)
    full = reconstruct_full_field(sol.x, red_x, red_y, spec.bc_x, spec.bc_y)
    return FieldSolution(field=full, interior=sol.x, report=sol.report)


# ---------------------------------------------------------------------------
# 2-D steady convection-diffusion
# ---------------------------------------------------------------------------

def _convdiff_parts(spec: ConvDiffSpec):
    ax, ay = spec.grid.axes
    red_x, red_y = _reduce(ax, spec.bc_x), _reduce(ay, spec.bc_y)
    n, m = red_x.n_interior, red_y.n_interior
    off_x, off_y = build_offset_matrices(red_x, red_y, n, m)
    f = sample_field(spec.source, *_interior_points(spec.grid))
    alpha, beta = spec.alpha, spec.beta
    g = alpha * red_x.b_bar - np.eye(n) / (4.0 * alpha)
    r = beta * red_y.b_bar.T
    q = f - alpha * off_x.b0 - beta * off_y.b0.T
    return SylvesterProblem(g, r, q), red_x, red_y


def assemble_convdiff(spec: ConvDiffSpec) -> SylvesterProblem:
    return _convdiff_parts(spec)[0]


def solve_convdiff(spec: ConvDiffSpec, method="auto") -> FieldSolution:
    problem, red_x, red_y = _convdiff_parts(spec)
    sol = _solve(problem, method)
    full = reconstruct_full_field(sol.x, red_x, red_y, spec.bc_x, spec.bc_y)
    return FieldSolution(field=full, interior=sol.x, report=sol.report)


def full_field(spec, interior) -> np.ndarray:
    """Reconstruct the full 2-D grid field of ``spec`` from its interior block."""
    ax, ay = spec.grid.axes
    red_x, red_y = _reduce(ax, spec.bc_x), _reduce(ay, spec.bc_y)
    return reconstruct_full_field(interior, red_x, red_y, spec.bc_x, spec.bc_y)


# ---------------------------------------------------------------------------
# 3-D steady convection-diffusion
# ---------------------------------------------------------------------------

def _convdiff3d_parts(spec: ConvDiff3dSpec):
    ax, ay, az = spec.grid.axes
    nx, ny, nz = spec.grid.interior_shape
    if nx * ny * nz > spec.max_unknowns:
        raise SizeError(
            f"{nx * ny * nz} interior unknowns exceed the cap of {spec.max_unknowns}"
        )
    red_x, red_y, red_z = _reduce(ax, spec.bc_x), _reduce(ay, spec.bc_y), _reduce(az, spec.bc_z)
    off_x, off_y = build_offset_matrices(red_x, red_y, nx, ny)
    # column-stacked (x, y) plane: vec(A C) = (I (x) A) vec C, vec(C B^T) = (B (x) I) vec C
    g = kron(np.eye(ny), red_x.a_bar) - spec.beta * kron(red_y.b_bar, np.eye(nx))
    r = -spec.gamma * red_z.b_bar.T
    plane = vec_stack(off_x.a0 - spec.beta * off_y.b0.T)
    q = spec.gamma * np.repeat(red_z.b_offset[None, :], nx * ny, axis=0) - plane
    return SylvesterProblem(g, r, q), (red_x, red_y, red_z)


def assemble_convdiff3d(spec: ConvDiff3dSpec) -> SylvesterProblem:
    return _convdiff3d_parts(spec)[0]


def _extend(arr, red, axis):
    moved = np.moveaxis(arr, axis, 0)
    inner = moved.reshape(moved.shape[0], -1)
    faces = red.boundary_values(inner).reshape((2,) + moved.shape[1:])
    full = np.concatenate([faces[:1], moved, faces[1:]], axis=0)
    return np.moveaxis(full, 0, axis)


def solve_convdiff3d(spec: ConvDiff3dSpec, method="bartels-stewart") -> FieldSolution:
    """Solve the 3-D problem; ``field`` has shape ``(Nx, Ny, Nz)``."""
    problem, reds = _convdiff3d_parts(spec)
    sol = _solve(problem, method)
    nx, ny, nz = spec.grid.interior_shape
    interior = sol.x.reshape(nx, ny, nz, order="F")
    full = interior
    for axis, red in enumerate(reds):
        full = _extend(full, red, axis)
    return FieldSolution(field=full, interior=interior, report=sol.report)


# ---------------------------------------------------------------------------
# transient convection-diffusion
# ---------------------------------------------------------------------------

def step_transient(spec: TransientSpec) -> TransientResult:
    """Integrate ``d phi/dt = G phi + phi R - Q`` from ``spec.initial``.

    ``G``, ``R`` and ``Q`` are those of the steady problem, so the steady
    solution is a fixed point.  Backward Euler solves one Sylvester
    equation per step with a single up-front factorization; ``rk4`` uses
    four right-hand-side evaluations per step.
    """
    problem, _, _ = _convdiff_parts(spec.steady)
    g, r, q = problem.g, problem.r, problem.q
    phi = as_matrix(spec.initial, "initial")
    if phi.shape != q.shape:
        raise ShapeError(f"initial field has shape {phi.shape}, expected {q.shape}")
    n, m = q.shape
    dt = float(spec.dt)
    start = time.perf_counter()
    trajectory = [phi.copy()]
    step_counts = []
    factor = 0
    worst = 0.0
    if spec.scheme == "backward-euler":
        inv_dt = 1.0 / dt
        try:
            solver = SylvesterSolver("bartels-stewart").fit(inv_dt * np.eye(n) - g, -r)
        except NoUniqueSolutionError as exc:
            exc.hint = f"the step matrix is singular at dt={dt:g}; try a smaller dt"
            raise
        factor = solver.factor_multiplications_
        for _ in range(spec.steps):
            rhs = inv_dt * phi - q
            sol = solver.solve(rhs)
            worst = max(worst, sol.report.relative_residual)
            step_counts.append(sol.report.counted_multiplications + n * m)
            phi = sol.x
            trajectory.append(phi)
    else:
        for _ in range(spec.steps):
            counter = FlopCounter()

            def rate(y):
                return matmul(g, y, counter) + matmul(y, r, counter) - q

            k1 = rate(phi)
            k2 = rate(phi + 0.5 * dt * k1)
            k3 = rate(phi + 0.5 * dt * k2)
            k4 = rate(phi + dt * k3)
            phi = phi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            counter.add(8 * n * m)
            step_counts.append(counter.multiplications)
            trajectory.append(phi)
    elapsed = time.perf_counter() - start
    report = SolveReport(
        method=spec.scheme,
        counted_multiplications=factor + sum(step_counts),
        model_multiplications=flop_model("bartels-stewart", n, m) if factor else float("nan"),
        wall_time=elapsed,
        relative_residual=worst if factor else float("nan"),
        note=("largest per-step solve residual" if factor
              else "explicit scheme, no linear solve to check"),
    )
    return TransientResult(
        trajectory=trajectory,
        times=dt * np.arange(spec.steps + 1),
        report=report,
        factor_multiplications=factor,
        step_multiplications=step_counts,
    )
