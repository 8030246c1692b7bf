"""
Dense real linear algebra with multiplication counting.

Matrices are plain ``float64`` :class:`numpy.ndarray` objects.  numpy is
used for storage and slice arithmetic only; every factorization here
(partial-pivot LU, Householder Hessenberg reduction, Francis double-shift
QR) is written out so that the scalar multiplications it performs can be
tallied in a :class:`FlopCounter`.  Divisions are tallied as
multiplications.  Additions are free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConvergenceError, ShapeError, SingularMatrixError

__all__ = [
    "FlopCounter",
    "SchurForm",
    "as_matrix",
    "matmul",
    "lu_factor",
    "lu_solve_factored",
    "lu_solve",
    "lower_banded_solve",
    "hessenberg",
    "real_schur",
    "schur_blocks",
    "schur_eigenvalues",
    "kron",
    "vec_stack",
    "vec_unstack",
    "exchange_matrix",
]

#: Deflation threshold relative to the neighbouring diagonal entries.
DEFLATION_TOL = 1e-14
#: LU pivots below ``PIVOT_TOL * ||a||_inf`` are treated as zero.
PIVOT_TOL = 1e-13
_SAFE_LOW, _SAFE_HIGH = 1e-100, 1e100


class FlopCounter:
    """Accumulator of scalar multiplications.

    A counter only grows.  Passing ``None`` wherever a counter is accepted
    disables counting.
    """

    __slots__ = ("multiplications",)

    def __init__(self, multiplications: int = 0):
        if multiplications < 0:
            raise ValueError("multiplications must be non-negative")
        self.multiplications = int(multiplications)

    def add(self, count) -> None:
        count = int(count)
        if count < 0:
            raise ValueError("cannot add a negative count")
        self.multiplications += count

    def __repr__(self):
        return f"FlopCounter(multiplications={self.multiplications})"


def _tally(counter, count):
    if counter is not None:
        counter.add(count)


@dataclass(frozen=True)
class SchurForm:
    """Real Schur decomposition ``source = u @ t @ u.T``."""

    u: np.ndarray
    t: np.ndarray
    source_dim: int

    @property
    def blocks(self):
        return schur_blocks(self.t)

    def eigenvalues(self):
        return schur_eigenvalues(self.t)


def as_matrix(a, name="matrix", square=False) -> np.ndarray:
    """Validate ``a`` as a finite 2-D float64 array.

    Scalars and 1-D inputs are not promoted; a 1-D vector must be reshaped
    by the caller so that row/column orientation is explicit.
    """
    try:
        arr = check_array(
            a,
            dtype=np.float64,
            ensure_2d=True,
            ensure_all_finite=True,
            ensure_min_samples=1,
            ensure_min_features=1,
            input_name=name,
            copy=False,
        )
    except ValueError as exc:
        if "Expected 2D array" in str(exc):
            raise ShapeError(f"{name} must be 2-D, got shape {np.shape(a)}") from exc
        raise
    if square and arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {arr.shape}")
    return arr


def matmul(a, b, counter: FlopCounter | None = None) -> np.ndarray:
    """Matrix product; tallies ``a.rows * a.cols * b.cols`` multiplications."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply shapes {a.shape} and {b.shape}")
    _tally(counter, a.shape[0] * a.shape[1] * b.shape[1])
    return a @ b


# ---------------------------------------------------------------------------
# Gaussian elimination
# ---------------------------------------------------------------------------

def lu_factor(a, counter=None, pivot_tol=PIVOT_TOL):
    """LU factorization with partial pivoting.

    Returns ``(lu, piv)`` where ``lu`` holds the unit lower factor below the
    diagonal and the upper factor on and above it, and ``piv[k]`` is the row
    swapped with row ``k`` at step ``k``.

    Raises
    ------
    SingularMatrixError
        If a pivot is at most ``pivot_tol * ||a||_inf``.
    """
    lu = np.array(as_matrix(a, "a", square=True), dtype=np.float64, copy=True)
    n = lu.shape[0]
    threshold = pivot_tol * np.abs(lu).sum(axis=1).max()
    piv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= threshold:
            raise SingularMatrixError(
                f"matrix is singular to working precision at column {k}", index=k
            )
        if p != k:
            lu[[k, p], :] = lu[[p, k], :]
        piv[k] = p
        if k + 1 < n:
            lu[k + 1:, k] /= lu[k, k]
            lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
            r = n - k - 1
            _tally(counter, r + r * r)
    return lu, piv


def lu_solve_factored(lu, piv, rhs, counter=None) -> np.ndarray:
    """Solve with factors produced by :func:`lu_factor`."""
    n = lu.shape[0]
    x = np.array(rhs, dtype=np.float64, copy=True)
    vector = x.ndim == 1
    if vector:
        x = x[:, None]
    if x.shape[0] != n:
        raise ShapeError(f"rhs has {x.shape[0]} rows, expected {n}")
    m = x.shape[1]
    for k in range(n):
        if piv[k] != k:
            x[[k, piv[k]], :] = x[[piv[k], k], :]
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        if k + 1 < n:
            x[k] -= lu[k, k + 1:] @ x[k + 1:]
        x[k] /= lu[k, k]
    # n(n-1)/2 forward, n(n-1)/2 backward, n divisions, per column
    _tally(counter, n * n * m)
    return x[:, 0] if vector else x


def lu_solve(a, rhs, counter=None) -> np.ndarray:
    """Solve ``a @ x = rhs`` by Gaussian elimination with partial pivoting."""
    a = as_matrix(a, "a", square=True)
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != a.shape[0]:
        raise ShapeError(f"rhs has {rhs.shape[0]} rows, a has {a.shape[0]}")
    lu, piv = lu_factor(a, counter)
    return lu_solve_factored(lu, piv, rhs, counter)


def lower_banded_solve(a, rhs, lower, counter=None, pivot_tol=PIVOT_TOL):
    """Solve ``a @ x = rhs`` for ``a`` with ``lower`` nonzero subdiagonals.

    Partial pivoting is restricted to the band, so the elimination costs
    ``O(lower * n**2)`` instead of ``O(n**3)``.  Used for the Hessenberg
    systems of the Hessenberg-Schur method.
    """
    u = np.array(a, dtype=np.float64, copy=True)
    x = np.array(rhs, dtype=np.float64, copy=True)
    n = u.shape[0]
    vector = x.ndim == 1
    if vector:
        x = x[:, None]
    threshold = pivot_tol * np.abs(u).sum(axis=1).max()
    mults = 0
    for k in range(n):
        stop = min(k + lower + 1, n)
        p = k + int(np.argmax(np.abs(u[k:stop, k])))
        if abs(u[p, k]) <= threshold:
            raise SingularMatrixError(
                f"banded matrix is singular to working precision at column {k}",
                index=k,
            )
        if p != k:
            u[[k, p], k:] = u[[p, k], k:]
            x[[k, p]] = x[[p, k]]
        if k + 1 < stop:
            l = u[k + 1:stop, k] / u[k, k]
            u[k + 1:stop, k + 1:] -= np.outer(l, u[k, k + 1:])
            x[k + 1:stop] -= np.outer(l, x[k])
            r = stop - k - 1
            mults += r + r * (n - k - 1) + r * x.shape[1]
    for k in range(n - 1, -1, -1):
        if k + 1 < n:
            x[k] -= u[k, k + 1:] @ x[k + 1:]
        x[k] /= u[k, k]
    mults += (n * (n - 1) // 2 + n) * x.shape[1]
    _tally(counter, mults)
    return x[:, 0] if vector else x


# ---------------------------------------------------------------------------
# Householder reflectors
# ---------------------------------------------------------------------------

def _house(x, counter):
    """Householder vector ``v`` (``v[0] == 1``) and ``beta * v`` for ``x``.

    ``(I - outer(bv, v)) @ x`` is a multiple of ``e_1``; ``bv`` is None when
    ``x`` is already one.
    """
    p = x.shape[0]
    sc = float(np.abs(x).max()) if p else 0.0
    if 0.0 < sc and not _SAFE_LOW <= sc <= _SAFE_HIGH:
        # v does not depend on the scale of x; rescale so x @ x cannot underflow
        x = x / sc
        _tally(counter, p)
    sigma = float(x[1:] @ x[1:])
    v = np.array(x, dtype=np.float64, copy=True)
    v[0] = 1.0
    _tally(counter, p - 1)
    if sigma == 0.0:
        return v, None
    x0 = float(x[0])
    mu = math.sqrt(x0 * x0 + sigma)
    v0 = x0 - mu if x0 <= 0.0 else -sigma / (x0 + mu)
    beta = 2.0 * v0 * v0 / (sigma + v0 * v0)
    v[1:] = x[1:] / v0
    _tally(counter, 5 + 2 * (p - 1) + 1)
    return v, beta * v


def _reflect_left(block, v, bv, counter):
    # block <- (I - bv v^T) block; v[0] == 1 saves c products in v @ block
    if bv is None or block.size == 0:
        return
    block -= np.outer(bv, v @ block)
    p, c = block.shape
    _tally(counter, (2 * p - 1) * c)


def _reflect_right(block, v, bv, counter):
    if bv is None or block.size == 0:
        return
    block -= np.outer(block @ v, bv)
    r, p = block.shape
    _tally(counter, (2 * p - 1) * r)


def hessenberg(a, counter=None):
    """Householder reduction ``a = u @ h @ u.T`` with ``h`` upper Hessenberg."""
    h = np.array(as_matrix(a, "a", square=True), dtype=np.float64, copy=True)
    n = h.shape[0]
    u = np.eye(n)
    for k in range(n - 2):
        v, bv = _house(h[k + 1:, k], counter)
        _reflect_left(h[k + 1:, k:], v, bv, counter)
        _reflect_right(h[:, k + 1:], v, bv, counter)
        _reflect_right(u[:, k + 1:], v, bv, counter)
        h[k + 2:, k] = 0.0
    return h, u


# ---------------------------------------------------------------------------
# Real Schur decomposition
# ---------------------------------------------------------------------------

def _split_real_pair(h, u, k, counter):
    """Triangularize the 2x2 block at ``k`` if its eigenvalues are real.

    Returns True when the block was split.
    """
    a, b, c, d = h[k, k], h[k, k + 1], h[k + 1, k], h[k + 1, k + 1]
    if c == 0.0:
        return True
    p = 0.5 * (a - d)
    disc = p * p + b * c
    _tally(counter, 3)
    if disc < 0.0:
        return False
    root = math.sqrt(disc)
    z = p + math.copysign(root, p)
    # eigenvector (lambda - d, c) of the block for lambda = d + z
    r = math.hypot(z, c)
    cs, sn = z / r, c / r
    rot = np.array([[cs, -sn], [sn, cs]])
    n = h.shape[0]
    h[k:k + 2, k:] = rot.T @ h[k:k + 2, k:]
    h[:k + 2, k:k + 2] = h[:k + 2, k:k + 2] @ rot
    u[:, k:k + 2] = u[:, k:k + 2] @ rot
    h[k + 1, k] = 0.0
    _tally(counter, 4 + 4 * (n - k) + 4 * (k + 2) + 4 * n)
    return True


def real_schur(a, max_iter=None, tol=DEFLATION_TOL, counter=None) -> SchurForm:
    """Real Schur decomposition by the Francis double-shift QR algorithm.

    The matrix is first reduced to Hessenberg form; implicit double-shift
    sweeps then drive the subdiagonal to zero.  ``h[i+1, i]`` is deflated
    once ``|h[i+1, i]| <= tol * (|h[i, i]| + |h[i+1, i+1]|)``, or once it
    falls below unit roundoff times ``||a||_F``.  An
    exceptional shift is used after every 10 sweeps without deflation.
    2x2 diagonal blocks with real eigenvalues are split by a rotation, so
    every remaining 2x2 block carries a complex-conjugate pair.

    Parameters
    ----------
    a : (n, n) array_like
    max_iter : int, optional
        Total sweep budget.  Defaults to ``30 * n``.
    tol : float
        Relative deflation threshold.
    counter : FlopCounter, optional

    Returns
    -------
    SchurForm
        ``a = u @ t @ u.T`` with ``u`` orthogonal.

    Raises
    ------
    ConvergenceError
        When the sweep budget is exhausted; ``index`` names the row whose
        subdiagonal entry did not deflate.
    """
    a = as_matrix(a, "a", square=True)
    n = a.shape[0]
    if max_iter is None:
        max_iter = 30 * max(n, 1)
    amax = float(np.abs(a).max()) if n else 0.0
    scale = 1.0
    if 0.0 < amax and not _SAFE_LOW <= amax <= _SAFE_HIGH:
        scale = amax
        a = a / scale
        _tally(counter, n * n)
    h, u = hessenberg(a, counter)
    # absolute floor: entries below unit roundoff of the whole matrix are noise
    floor = np.finfo(float).eps * np.linalg.norm(a)
    hi = n - 1
    stalled = 0
    sweeps = 0
    while hi >= 0:
        l = hi
        while l > 0:
            s = abs(h[l - 1, l - 1]) + abs(h[l, l])
            if s == 0.0:
                s = np.abs(h[: hi + 1, : hi + 1]).sum()
            if abs(h[l, l - 1]) <= max(tol * s, floor):
                h[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            hi -= 1
            stalled = 0
            continue
        if l == hi - 1:
            _split_real_pair(h, u, hi - 1, counter)
            hi -= 2
            stalled = 0
            continue
        if sweeps >= max_iter:
            raise ConvergenceError(
                f"QR iteration did not converge after {sweeps} sweeps; "
                f"subdiagonal entry at row {hi} is stuck",
                index=hi,
            )
        sweeps += 1
        stalled += 1
        _francis_sweep(h, u, l, hi, exceptional=stalled % 10 == 0, counter=counter)
    # bulge-chasing leaves roundoff below the first subdiagonal
    h[np.tril_indices(n, -2)] = 0.0
    if scale != 1.0:
        h *= scale
        _tally(counter, n * (n + 1) // 2 + n)
    return SchurForm(u=u, t=h, source_dim=n)


def _francis_sweep(h, u, l, hi, exceptional, counter):
    # The first column of the shift polynomial is quadratic in the entries;
    # scaling the active window keeps it from underflowing on tiny blocks.
    sc = np.abs(h[l:hi + 1, l:hi + 1]).max()
    a, b, c, d = (h[hi - 1, hi - 1] / sc, h[hi - 1, hi] / sc,
                  h[hi, hi - 1] / sc, h[hi, hi] / sc)
    h00, h01, h10 = h[l, l] / sc, h[l, l + 1] / sc, h[l + 1, l] / sc
    h11, h21 = h[l + 1, l + 1] / sc, h[l + 2, l + 1] / sc
    _tally(counter, 9)
    if exceptional:
        s = (abs(h[hi, hi - 1]) + abs(h[hi - 1, hi - 2])) / sc
        tr = 1.5 * s
        det = s * s
        _tally(counter, 3)
    else:
        tr = a + d
        det = a * d - b * c
        _tally(counter, 2)
    x = h00 * h00 + h01 * h10 - tr * h00 + det
    y = h10 * (h00 + h11 - tr)
    z = h10 * h21
    _tally(counter, 5)
    for k in range(l, hi - 1):
        v, bv = _house(np.array([x, y, z]), counter)
        r = max(l, k - 1)
        _reflect_left(h[k:k + 3, r:], v, bv, counter)
        rr = min(k + 3, hi)
        _reflect_right(h[: rr + 1, k:k + 3], v, bv, counter)
        _reflect_right(u[:, k:k + 3], v, bv, counter)
        if k > l:
            h[k + 1:k + 3, k - 1] = 0.0
        x = h[k + 1, k]
        y = h[k + 2, k]
        if k < hi - 2:
            z = h[k + 3, k]
    v, bv = _house(np.array([x, y]), counter)
    _reflect_left(h[hi - 1:hi + 1, hi - 2:], v, bv, counter)
    _reflect_right(h[: hi + 1, hi - 1:hi + 1], v, bv, counter)
    _reflect_right(u[:, hi - 1:hi + 1], v, bv, counter)
    h[hi, hi - 2] = 0.0


def schur_blocks(t):
    """Diagonal block structure of a quasi-triangular matrix.

    Returns a list of ``(start, size)`` pairs with ``size`` in ``{1, 2}``.
    """
    n = t.shape[0]
    blocks = []
    k = 0
    while k < n:
        if k + 1 < n and t[k + 1, k] != 0.0:
            blocks.append((k, 2))
            k += 2
        else:
            blocks.append((k, 1))
            k += 1
    return blocks


def schur_eigenvalues(t):
    """Eigenvalues of a quasi-triangular matrix as ``(re, im)`` arrays."""
    n = t.shape[0]
    re = np.empty(n)
    im = np.zeros(n)
    for start, size in schur_blocks(t):
        if size == 1:
            re[start] = t[start, start]
            continue
        a, b = t[start, start], t[start, start + 1]
        c, d = t[start + 1, start], t[start + 1, start + 1]
        p = 0.5 * (a - d)
        disc = p * p + b * c
        mid = 0.5 * (a + d)
        if disc >= 0.0:
            root = math.sqrt(disc)
            re[start], re[start + 1] = mid + root, mid - root
        else:
            root = math.sqrt(-disc)
            re[start] = re[start + 1] = mid
            im[start], im[start + 1] = root, -root
    return re, im


# ---------------------------------------------------------------------------
# Kronecker products and vec stacking
# ---------------------------------------------------------------------------

def kron(a, b) -> np.ndarray:
    """Kronecker product ``[a_ij * b]``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    p, q = a.shape
    r, s = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(p * r, q * s)


def vec_stack(m) -> np.ndarray:
    """Column-stack ``m`` into an ``(rows * cols, 1)`` vector.

    With this convention ``vec(A @ X @ B.T) == kron(B, A) @ vec(X)``.
    """
    m = as_matrix(m, "m")
    return m.reshape(-1, 1, order="F").copy()


def vec_unstack(v, shape) -> np.ndarray:
    """Inverse of :func:`vec_stack`."""
    v = np.asarray(v, dtype=np.float64)
    rows, cols = shape
    if v.size != rows * cols or (v.ndim == 2 and 1 not in v.shape) or v.ndim > 2:
        raise ShapeError(f"cannot unstack array of shape {v.shape} into {shape}")
    return v.reshape(rows, cols, order="F").copy()


def exchange_matrix(n) -> np.ndarray:
    """The ``n x n`` anti-identity ``J``."""
    return np.eye(n)[::-1].copy()
