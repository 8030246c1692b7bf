"""Exception hierarchy shared by every module of the package."""


class DQError(Exception):
    """Base class for all errors raised by :mod:`dqlyap`."""


class ShapeError(DQError, ValueError):
    """Operand shapes are inconsistent."""


class ParameterError(DQError, ValueError):
    """A scalar parameter is outside its admissible range."""


class SingularMatrixError(DQError, ArithmeticError):
    """A pivot fell below the singularity tolerance."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NoUniqueSolutionError(SingularMatrixError):
    """The Sylvester equation has no unique solution.

    ``eigenvalues`` holds the colliding pair ``(lambda_g, lambda_r)`` as
    ``(re, im)`` tuples when it is known, ``blocks`` the sub-problem
    indices for split solves and ``hint`` an optional remedy.
    """

    def __init__(self, message, eigenvalues=None, blocks=None, hint=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.blocks = blocks
        self.hint = hint


class ConvergenceError(DQError, ArithmeticError):
    """QR iteration did not converge; ``index`` is the stuck subdiagonal row."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class IllConditionedGridError(DQError, ValueError):
    """Collocation points are (nearly) coincident."""


class UnsupportedBoundaryError(DQError, ValueError):
    """Boundary-condition combination without an elimination recipe."""


class SymmetryError(DQError, ValueError):
    """Operand lacks the symmetry a structured routine requires."""


class SizeError(DQError, ValueError):
    """Problem exceeds a configured size cap."""
