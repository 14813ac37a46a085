"""Sparse assembly and symmetric positive-definite solves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

RESIDUAL_RTOL = 1e-10
_REFINE_STEPS = 3
_SINGULAR_PIVOT_RATIO = 1e-14


class SolverError(RuntimeError):
    """Raised when a linear system cannot be solved to the required accuracy."""


@dataclass(frozen=True)
class TripletList:
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    shape: tuple[int, int]


def compress(t: TripletList) -> sp.csc_matrix:
    """Build a CSC matrix from triplets, summing duplicate entries."""
    rows = np.asarray(t.rows, dtype=np.int64).ravel()
    cols = np.asarray(t.cols, dtype=np.int64).ravel()
    vals = np.asarray(t.vals, dtype=float).ravel()
    nrows, ncols = t.shape
    if not (rows.size == cols.size == vals.size):
        raise ValueError("triplet arrays must have equal lengths")
    if rows.size:
        if rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols:
            raise ValueError(f"triplet index out of range for shape {t.shape}")
    m = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsc()
    m.sum_duplicates()
    return m


def _relative_residual(M, x, b) -> float:
    bnorm = np.linalg.norm(b)
    return np.linalg.norm(M @ x - b) / max(bnorm, np.finfo(float).tiny)


class SpdFactor:
    """Sparse LDL-type factorization of an SPD matrix, reusable for several right-hand sides.

    SuperLU is run with diagonal pivoting and a symmetric ordering, which
    for a symmetric matrix yields ``P M P^T = L U`` with ``diag(U)`` equal to
    the pivots of an LDL^T factorization.  All pivots positive certifies
    positive definiteness; anything else is reported as a :class:`SolverError`.
    """

    def __init__(self, M, name: str = "matrix"):
        M = sp.csc_matrix(M, dtype=float)
        self.name = name
        n, ncols = M.shape
        if n != ncols:
            raise SolverError(f"{name}: matrix is not square, shape {M.shape}")
        if n == 0:
            raise SolverError(f"{name}: empty system")
        if not np.all(np.isfinite(M.data)):
            raise SolverError(f"{name}: matrix contains NaN or Inf")
        scale = abs(M).max()
        if scale == 0.0:
            raise SolverError(f"{name}: zero matrix is singular")
        asym = abs(M - M.T).max() if M.nnz else 0.0
        if asym > 1e-12 * scale:
            raise SolverError(f"{name}: matrix is not symmetric (max |M - M^T| = {asym:.3e})")
        try:
            lu = spla.splu(
                M,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:
            raise SolverError(f"{name}: factorization failed ({exc}); matrix is singular") from exc
        pivots = lu.U.diagonal()
        if not np.array_equal(lu.perm_r, lu.perm_c) or not np.all(pivots > 0):
            raise SolverError(
                f"{name}: matrix is not positive definite "
                f"(smallest pivot {pivots.min():.3e}); check boundary conditions"
            )
        if pivots.min() <= _SINGULAR_PIVOT_RATIO * pivots.max():
            raise SolverError(
                f"{name}: matrix is numerically singular "
                f"(pivot ratio {pivots.min() / pivots.max():.3e}); check boundary conditions"
            )
        self.M = M
        self._lu = lu

    @property
    def shape(self):
        return self.M.shape

    def solve(self, b, rtol: float = RESIDUAL_RTOL) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape != (self.M.shape[0],):
            raise ValueError(f"{self.name}: right-hand side has shape {b.shape}, expected ({self.M.shape[0]},)")
        if not np.all(np.isfinite(b)):
            raise SolverError(f"{self.name}: right-hand side contains NaN or Inf")
        if not np.any(b):
            return np.zeros_like(b)
        x = self._lu.solve(b)
        res = _relative_residual(self.M, x, b)
        for _ in range(_REFINE_STEPS):
            if res <= rtol:
                break
            x = x + self._lu.solve(b - self.M @ x)
            res = _relative_residual(self.M, x, b)
        if not (res <= rtol):
            raise SolverError(f"{self.name}: relative residual {res:.3e} exceeds {rtol:.1e}")
        return x


def spd_solve(M, b, rtol: float = RESIDUAL_RTOL) -> np.ndarray:
    """Solve ``M x = b`` for symmetric positive-definite sparse ``M``."""
    return SpdFactor(M).solve(b, rtol=rtol)


def partition_solve(M, fixed, fixed_values, rhs=None, name: str = "system"):
    """Solve ``M x = rhs`` with Dirichlet data by reduction to the free DOFs.

    Returns ``(x, factor, free)`` where ``factor`` factorizes ``M[free, free]``
    so callers can reuse it (e.g. for an adjoint solve).
    """
    M = sp.csc_matrix(M)
    n = M.shape[0]
    fixed = np.asarray(fixed, dtype=np.int64)
    free = np.setdiff1d(np.arange(n), fixed)
    x = np.zeros(n)
    x[fixed] = fixed_values
    b = np.zeros(n) if rhs is None else np.asarray(rhs, dtype=float)
    if free.size == 0:
        return x, None, free
    Mff = M[free][:, free]
    factor = SpdFactor(Mff, name=name)
    bf = b[free] - M[free][:, fixed] @ x[fixed] if fixed.size else b[free]
    x[free] = factor.solve(bf)
    return x, factor, free
