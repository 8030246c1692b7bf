"""Differential quadrature discretizations solved as Sylvester matrix equations."""
from .boundary import BoundaryCondition, Face, build_offset_matrices, reconstruct_full_field, reduce_operator
from .centrosym import classify_symmetry, split_centrosymmetric, solve_sylvester_centro
from .dq import DqOperator, GridAxis, GridSpec, build_dq_operator
from .estimators import ConvectionDiffusionDQ, PoissonDQ
from .exceptions import (
    ConvergenceError,
    DQError,
    IllConditionedGridError,
    NoUniqueSolutionError,
    ParameterError,
    ShapeError,
    SingularMatrixError,
    SizeError,
    SymmetryError,
    UnsupportedBoundaryError,
)
from .linalg import FlopCounter, real_schur
from .problems import (
    ConvDiff3dSpec,
    ConvDiffSpec,
    PoissonSpec,
    TransientSpec,
    assemble_convdiff,
    assemble_convdiff3d,
    assemble_poisson,
    solve_convdiff,
    solve_convdiff3d,
    solve_poisson,
    step_transient,
)
from .sylvester import SylvesterProblem, SylvesterSolver, flop_model, solve_sylvester

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "Face",
    "build_offset_matrices",
    "reconstruct_full_field",
    "reduce_operator",
    "classify_symmetry",
    "split_centrosymmetric",
    "solve_sylvester_centro",
    "DqOperator",
    "GridAxis",
    "GridSpec",
    "build_dq_operator",
    "ConvectionDiffusionDQ",
    "PoissonDQ",
    "ConvergenceError",
    "DQError",
    "IllConditionedGridError",
    "NoUniqueSolutionError",
    "ParameterError",
    "ShapeError",
    "SingularMatrixError",
    "SizeError",
    "SymmetryError",
    "UnsupportedBoundaryError",
    "FlopCounter",
    "real_schur",
    "ConvDiff3dSpec",
    "ConvDiffSpec",
    "PoissonSpec",
    "TransientSpec",
    "assemble_convdiff",
    "assemble_convdiff3d",
    "assemble_poisson",
    "solve_convdiff",
    "solve_convdiff3d",
    "solve_poisson",
    "step_transient",
    "SylvesterProblem",
    "SylvesterSolver",
    "flop_model",
    "solve_sylvester",
]
