"""
Centrosymmetric structure and the half-size split Sylvester solve.

A centrosymmetric ``M`` (``J M J == M``) is block-diagonalized by the
orthogonal ``K`` whose columns are ``(e_i + J e_i)/sqrt(2)`` for the
leading half, the middle unit vector for odd order, then
``(e_i - J e_i)/sqrt(2)``.  The solver never forms ``K``: it works with
the unnormalized sum/difference transform, which costs only additions,
and folds the normalization into one halving on each side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NoUniqueSolutionError, ShapeError, SymmetryError
from .linalg import as_matrix, real_schur
from .sylvester import (
    COLLISION_TOL,
    SylvesterProblem,
    SylvesterSolution,
    check_spectra,
    schur_solve,
    solve_sylvester,
)

__all__ = [
    "SymmetryClass",
    "CentroSplit",
    "CentroFactorization",
    "classify_symmetry",
    "centro_transform",
    "split_centrosymmetric",
    "solve_sylvester_centro",
]

SYMMETRY_TOL = 1e-12
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SymmetryClass:
    tag: str
    exchange_dim: int


@dataclass(frozen=True)
class CentroSplit:
    transform: np.ndarray
    blocks: tuple


def classify_symmetry(m, tol=SYMMETRY_TOL) -> SymmetryClass:
    """Tag ``m`` as centrosymmetric, skew-centrosymmetric or none."""
    m = as_matrix(m, "m", square=True)
    flipped = m[::-1, ::-1]
    bound = tol * np.linalg.norm(m)
    if np.linalg.norm(flipped - m) <= bound:
        tag = "centrosymmetric"
    elif np.linalg.norm(flipped + m) <= bound:
        tag = "skew-centrosymmetric"
    else:
        tag = "none"
    return SymmetryClass(tag=tag, exchange_dim=m.shape[0])


def centro_transform(n: int) -> np.ndarray:
    """Dense orthogonal ``K`` for order ``n`` (for inspection and tests)."""
    k, odd = divmod(n, 2)
    cols = []
    for i in range(k):
        c = np.zeros(n)
        c[i] = c[n - 1 - i] = _INV_SQRT2
        cols.append(c)
    if odd:
        c = np.zeros(n)
        c[k] = 1.0
        cols.append(c)
    for i in range(k):
        c = np.zeros(n)
        c[i], c[n - 1 - i] = _INV_SQRT2, -_INV_SQRT2
        cols.append(c)
    return np.column_stack(cols)


def _fold(a):
    """Rows of ``S @ a`` as ``(sym, anti)``; no multiplications.

    ``S`` is ``K`` with its columns unnormalized and transposed: pair rows
    ``e_i + e_{n-1-i}`` (middle row ``e_k`` appended for odd order), then
    ``e_i - e_{n-1-i}``.  ``S^{-1} = S^T W`` with ``W`` halving the pair
    rows.
    """
    n = a.shape[0]
    k, odd = divmod(n, 2)
    top, bottom = a[:k], a[::-1][:k]
    sym = top + bottom
    if odd:
        sym = np.concatenate([sym, a[k:k + 1]])
    return sym, top - bottom


def _unfold(sym, anti):
    """Rows of ``S^T @ [sym; anti]``; inverse of :func:`_fold` up to ``W``."""
    k = anti.shape[0]
    odd = sym.shape[0] - k
    out = np.empty((2 * k + odd,) + sym.shape[1:])
    out[:k] = sym[:k] + anti
    out[k + odd:] = (sym[:k] - anti)[::-1]
    if odd:
        out[k] = sym[k]
    return out


def _halve_rows(a, n_rows, counter):
    """Copy of ``a`` with its leading ``n_rows`` rows halved (``W a``)."""
    a = a.copy()
    a[:n_rows] *= 0.5
    if counter is not None:
        counter.add(n_rows * a.shape[1])
    return a


def _blocks(m):
    """Diagonal blocks of ``S m S^{-1}`` for centrosymmetric ``m``.

    Pair-pair entries are ``A + B J`` and ``A - B J``; for odd order the
    middle column of the first block is doubled.  Only additions.
    """
    n = m.shape[0]
    k, odd = divmod(n, 2)
    a = m[:k, :k]
    bj = m[:k, ::-1][:, :k]
    b1 = np.empty((k + odd, k + odd))
    b1[:k, :k] = a + bj
    if odd:
        b1[:k, k] = m[:k, k] + m[:k, k]
        b1[k, :k] = m[k, :k]
        b1[k, k] = m[k, k]
    return b1, a - bj


def split_centrosymmetric(m) -> CentroSplit:
    """Block-diagonalize a centrosymmetric matrix into two half-size blocks.

    The blocks have orders ``ceil(n/2)`` and ``floor(n/2)`` and satisfy
    ``K.T @ m @ K == block_diag(*blocks)``.
    """
    m = as_matrix(m, "m", square=True)
    tag = classify_symmetry(m).tag
    if tag != "centrosymmetric":
        raise SymmetryError(f"matrix is {tag}, not centrosymmetric")
    k = centro_transform(m.shape[0])
    half = (m.shape[0] + 1) // 2
    full = k.T @ m @ k
    blocks = (full[:half, :half].copy(), full[half:, half:].copy())
    return CentroSplit(transform=k, blocks=blocks)


class CentroFactorization:
    """Schur factors of the four half-size blocks of centrosymmetric G and R."""

    def __init__(self, g, r, counter=None, collision_tol=COLLISION_TOL):
        for name, mat in (("G", g), ("R", r)):
            tag = classify_symmetry(mat).tag
            if tag != "centrosymmetric":
                raise SymmetryError(f"{name} is {tag}, not centrosymmetric")
        self.n, self.m = g.shape[0], r.shape[0]
        self.g_pairs, self.r_pairs = self.n // 2, self.m // 2
        g_blocks = _blocks(g)
        r_blocks = _blocks(r)
        self.schur_g = [real_schur(b, counter=counter) if b.size else None for b in g_blocks]
        self.schur_r = [real_schur(b, counter=counter) if b.size else None for b in r_blocks]
        # W_G and W_R folded into the Schur vectors once: X~ W_R and W_G X~
        # become row scalings of v (forward) and u (back)
        self.u_out = [None if sg is None else _halve_rows(sg.u, len(sg.u) if i else self.g_pairs, counter)
                      for i, sg in enumerate(self.schur_g)]
        self.v_in = [None if sr is None else _halve_rows(sr.u, len(sr.u) if j else self.r_pairs, counter)
                     for j, sr in enumerate(self.schur_r)]
        scale = np.linalg.norm(g) + np.linalg.norm(r)
        for i, sg in enumerate(self.schur_g):
            for j, sr in enumerate(self.schur_r):
                if sg is not None and sr is not None:
                    check_spectra(sg, sr, scale, collision_tol, blocks=(i, j))

    def solve(self, q, counter=None):
        if q.shape != (self.n, self.m):
            raise ShapeError(f"Q has shape {q.shape}, expected {(self.n, self.m)}")
        # Q~ = S_G Q S_R^T, split into four blocks; W_R and W_G live in v_in, u_out
        parts = [_fold(half.T) for half in _fold(q)]
        solved = []
        for i, sg in enumerate(self.schur_g):
            row = []
            for j, sr in enumerate(self.schur_r):
                rhs = parts[i][j].T
                if rhs.size == 0:
                    row.append(rhs)
                    continue
                try:
                    x = schur_solve(sg.u, sg.t, sr.u, sr.t, rhs, counter,
                                    v_in=self.v_in[j], u_out=self.u_out[i])
                except NoUniqueSolutionError as exc:
                    exc.blocks = (i, j)
                    raise
                row.append(x)
            solved.append(row)
        # X = S_G^T (W_G X~) S_R
        halves = [_unfold(row[0].T, row[1].T).T for row in solved]
        return _unfold(halves[0], halves[1])


def solve_sylvester_centro(p: SylvesterProblem) -> SylvesterSolution:
    """Split solve; falls back to bartels-stewart when the symmetry test fails."""
    return solve_sylvester(p, "centro-split")
