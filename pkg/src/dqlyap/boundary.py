"""
Elimination of boundary values from DQ operators.

Along one axis the two boundary values are affine functions of the
interior values: ``phi_b = recovery @ phi_int + recovery_offset``.  A
Dirichlet face contributes its value directly.  A Neumann face
contributes the row of the first-derivative weights at that face solved
for the face value, the other face being Dirichlet.  Substituting the
recovery map into the interior rows of ``a`` and ``b`` gives the
modified interior operators and their offset vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dq import DqOperator
from .exceptions import ShapeError, SingularMatrixError, UnsupportedBoundaryError

__all__ = [
    "Face",
    "BoundaryCondition",
    "ReducedOperator",
    "OffsetMatrices",
    "reduce_operator",
    "build_offset_matrices",
    "reconstruct_full_field",
]

NEUMANN_PIVOT_TOL = 1e-10
FACE_KINDS = ("dirichlet", "neumann")


@dataclass(frozen=True)
class Face:
    """Condition on one face: a value for Dirichlet, a slope for Neumann."""

    kind: str = "dirichlet"
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in FACE_KINDS:
            raise UnsupportedBoundaryError(f"unknown face kind {self.kind!r}")
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class BoundaryCondition:
    left: Face = Face()
    right: Face = Face()

    def __post_init__(self):
        if self.left.kind == "neumann" and self.right.kind == "neumann":
            raise UnsupportedBoundaryError(
                "Neumann conditions on both faces of an axis are not supported"
            )

    @classmethod
    def dirichlet(cls, left=0.0, right=0.0) -> "BoundaryCondition":
        return cls(Face("dirichlet", left), Face("dirichlet", right))

    @property
    def symmetric(self) -> bool:
        """True when the condition is invariant under ``x -> 1 - x``."""
        return self.left == self.right


@dataclass(frozen=True)
class ReducedOperator:
    """Interior-only operators after boundary elimination.

    ``a_bar @ phi + a_offset`` approximates the first derivative at the
    interior points, ``b_bar @ phi + b_offset`` the second.
    """

    a_bar: np.ndarray
    b_bar: np.ndarray
    a_offset: np.ndarray
    b_offset: np.ndarray
    recovery: np.ndarray
    recovery_offset: np.ndarray

    @property
    def n_interior(self) -> int:
        return self.a_bar.shape[0]

    def boundary_values(self, interior):
        """Face values ``(left, right)`` for interior data (vector or columns)."""
        return self.recovery @ interior + (
            self.recovery_offset if np.ndim(interior) == 1
            else self.recovery_offset[:, None]
        )


@dataclass(frozen=True)
class OffsetMatrices:
    """Offset vectors stacked into constant-column matrices."""

    a0: np.ndarray
    b0: np.ndarray


def reduce_operator(op: DqOperator, bc: BoundaryCondition) -> ReducedOperator:
    a, b = op.a, op.b
    n_pts = a.shape[0]
    if n_pts < 3:
        raise ShapeError("boundary reduction needs at least 3 points")
    left, right = bc.left, bc.right
    if left.kind == "neumann" and right.kind == "neumann":
        raise UnsupportedBoundaryError(
            "Neumann conditions on both faces of an axis are not supported"
        )
    inner = slice(1, n_pts - 1)
    n = n_pts - 2
    recovery = np.zeros((2, n))
    offset = np.zeros(2)
    scale = np.abs(a).sum(axis=1).max()
    if right.kind == "neumann":
        pivot = a[-1, -1]
        if abs(pivot) <= NEUMANN_PIVOT_TOL * scale:
            raise SingularMatrixError("Neumann pivot at the right face vanishes")
        offset[0] = left.value
        recovery[1] = -a[-1, inner] / pivot
        offset[1] = (right.value - a[-1, 0] * left.value) / pivot
    elif left.kind == "neumann":
        pivot = a[0, 0]
        if abs(pivot) <= NEUMANN_PIVOT_TOL * scale:
            raise SingularMatrixError("Neumann pivot at the left face vanishes")
        offset[1] = right.value
        recovery[0] = -a[0, inner] / pivot
        offset[0] = (left.value - a[0, -1] * right.value) / pivot
    else:
        offset[:] = left.value, right.value

    def _reduce(w):
        edge = w[inner][:, [0, -1]]
        if not recovery.any():
            w_bar = w[inner, inner].copy()
        else:
            w_bar = w[inner, inner] + edge @ recovery
        return w_bar, edge @ offset

    a_bar, a_off = _reduce(a)
    b_bar, b_off = _reduce(b)
    return ReducedOperator(
        a_bar=a_bar,
        b_bar=b_bar,
        a_offset=a_off,
        b_offset=b_off,
        recovery=recovery,
        recovery_offset=offset,
    )


def _stack(vector, copies):
    return np.repeat(np.asarray(vector, dtype=np.float64)[:, None], copies, axis=1)


def build_offset_matrices(red_x: ReducedOperator, red_y: ReducedOperator, n: int, m: int):
    """Offset matrices for the matrix-form derivative formulas on an n x m field.

    Returns ``(x_offsets, y_offsets)``.  ``x_offsets.a0`` is ``n x m`` with
    every column equal to the x offset vector; ``y_offsets.a0`` is ``m x n``
    and enters the y-derivative transposed::

        d/dx psi   ~ a_bar_x @ psi + x_offsets.a0
        d/dy psi   ~ psi @ a_bar_y.T + y_offsets.a0.T
    """
    if red_x.n_interior != n or red_y.n_interior != m:
        raise ShapeError(
            f"reduced operators have sizes ({red_x.n_interior}, {red_y.n_interior}), "
            f"field is {n} x {m}"
        )
    return (
        OffsetMatrices(_stack(red_x.a_offset, m), _stack(red_x.b_offset, m)),
        OffsetMatrices(_stack(red_y.a_offset, n), _stack(red_y.b_offset, n)),
    )


def reconstruct_full_field(interior, red_x, red_y, bc_x=None, bc_y=None, order="xy"):
    """Extend an interior field with its recovered boundary values.

    ``order`` selects which axis is extended first; it decides the corner
    values when the face data disagree there.  ``bc_x``/``bc_y`` are
    accepted for symmetry with :func:`reduce_operator` and only checked for
    consistency, the recovery maps already encode them.
    """
    interior = np.asarray(interior, dtype=np.float64)
    n, m = red_x.n_interior, red_y.n_interior
    if interior.shape != (n, m):
        raise ShapeError(f"interior field has shape {interior.shape}, expected {(n, m)}")
    for bc, red in ((bc_x, red_x), (bc_y, red_y)):
        if bc is not None:
            for face, idx in ((bc.left, 0), (bc.right, 1)):
                if face.kind == "dirichlet" and not red.recovery[idx].any():
                    if red.recovery_offset[idx] != face.value:
                        raise ShapeError("boundary condition does not match reduction")
    if order not in ("xy", "yx"):
        raise ValueError("order must be 'xy' or 'yx'")
    full = np.zeros((n + 2, m + 2))
    full[1:-1, 1:-1] = interior
    if order == "xy":
        full[[0, -1], 1:-1] = red_x.boundary_values(interior)
        full[:, [0, -1]] = red_y.boundary_values(full[:, 1:-1].T).T
    else:
        full[1:-1, [0, -1]] = red_y.boundary_values(interior.T).T
        full[[0, -1], :] = red_x.boundary_values(full[1:-1, :])
    return full
