"""Collocation grids and differential quadrature weighting matrices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import IllConditionedGridError, ParameterError

__all__ = [
    "GridAxis",
    "GridSpec",
    "DqOperator",
    "chebyshev_lobatto_points",
    "uniform_points",
    "build_dq_operator",
]

SYMMETRY_TOL = 1e-14
MIN_SPACING = 1e-12
GRID_KINDS = ("chebyshev", "uniform", "explicit")


def chebyshev_lobatto_points(n: int) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto points mapped to ``[0, 1]``."""
    if n < 2:
        raise ParameterError(f"need at least 2 points, got {n}")
    i = np.arange(n)
    x = 0.5 * (1.0 - np.cos(np.pi * i / (n - 1)))
    # make the mirror relation exact
    x = 0.5 * (x + (1.0 - x[::-1]))
    x[0], x[-1] = 0.0, 1.0
    return x


def uniform_points(n: int) -> np.ndarray:
    if n < 2:
        raise ParameterError(f"need at least 2 points, got {n}")
    x = np.arange(n) / (n - 1)
    x[-1] = 1.0
    return x


@dataclass(frozen=True)
class GridAxis:
    """Point set along one axis of the unit domain."""

    points: np.ndarray
    kind: str = "explicit"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise ParameterError("an axis needs a 1-D array of at least 2 points")
        if pts[0] != 0.0 or pts[-1] != 1.0:
            raise ParameterError("axis points must start at 0 and end at 1")
        if not np.all(np.diff(pts) > 0):
            raise ParameterError("axis points must be strictly increasing")
        if self.kind not in GRID_KINDS:
            raise ParameterError(f"unknown grid kind {self.kind!r}")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_kind(cls, kind: str, n: int) -> "GridAxis":
        if kind == "chebyshev":
            return cls(chebyshev_lobatto_points(n), "chebyshev")
        if kind == "uniform":
            return cls(uniform_points(n), "uniform")
        raise ParameterError(f"cannot generate points for grid kind {kind!r}")

    @property
    def n_points(self) -> int:
        return self.points.size

    @property
    def n_interior(self) -> int:
        return self.points.size - 2

    @property
    def interior(self) -> np.ndarray:
        return self.points[1:-1]

    @property
    def symmetric(self) -> bool:
        return bool(np.all(np.abs(self.points + self.points[::-1] - 1.0) <= SYMMETRY_TOL))


@dataclass(frozen=True)
class GridSpec:
    """Tensor-product grid on the unit square or cube."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 3:
            raise ParameterError("a grid has 1 to 3 axes")
        for ax in axes:
            if ax.n_points < 3:
                raise ParameterError("every axis needs at least 3 points")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def regular(cls, n_points, kind="chebyshev", ndim=2) -> "GridSpec":
        """Grid with the same point family on every axis.

        ``n_points`` is an int or one int per axis.
        """
        if np.isscalar(n_points):
            n_points = (int(n_points),) * ndim
        return cls(tuple(GridAxis.from_kind(kind, int(n)) for n in n_points))

    @property
    def shape(self):
        return tuple(ax.n_points for ax in self.axes)

    @property
    def interior_shape(self):
        return tuple(ax.n_interior for ax in self.axes)


@dataclass(frozen=True)
class DqOperator:
    """First (``a``) and second (``b``) derivative weights on one axis."""

    a: np.ndarray
    b: np.ndarray
    points: np.ndarray = field(repr=False)

    @property
    def n_points(self) -> int:
        return self.points.size


def build_dq_operator(points) -> DqOperator:
    """DQ weighting matrices on ``points``.

    ``a[i, j]`` is the derivative at ``x_i`` of the ``j``-th Lagrange
    cardinal polynomial; ``b = a @ a``.
    """
    if isinstance(points, GridAxis):
        points = points.points
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ParameterError("need a 1-D point set with at least 2 points")
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.min(np.abs(diff)) < MIN_SPACING:
        raise IllConditionedGridError(
            f"points closer than {MIN_SPACING:g}; weights would be ill-conditioned"
        )
    # M'(x_i) = prod_{k != i} (x_i - x_k)
    mprime = np.prod(diff, axis=1)
    a = (mprime[:, None] / mprime[None, :]) / diff
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, -a.sum(axis=1))
    b = a @ a
    return DqOperator(a=a, b=b, points=x.copy())
