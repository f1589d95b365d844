"""SSOR preconditioning M = (D + L) D^{-1} (D + U) for quaternion systems.

Built from the splitting A = D + L + U (diagonal, strictly lower, strictly
upper).  Application is two quaternion triangular solves and a diagonal
scaling; the adjoint solve (needed because the processes also apply the
adjoint of the preconditioned operator) uses the conjugate-transposed
factors.  Row i of a triangular solve isolates the unknown as
x_i = a_ii^{-1} (r_i - sum_{j} a_ij x_j): coefficients multiply unknowns
from the left, matching the matvec convention.
"""

from __future__ import annotations

import numpy as np

from .quat import QVector
from .operators import QSparseMatrix

__all__ = ["SsorPreconditioner", "ssor_build"]


def _row_qprod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise Hamilton products of two (k, 4) component stacks."""
    a0, a1, a2, a3 = a[:, 0], a[:, 1], a[:, 2], a[:, 3]
    b0, b1, b2, b3 = b[:, 0], b[:, 1], b[:, 2], b[:, 3]
    return np.column_stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ])


def _qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of two 4-component rows."""
    return _row_qprod(a[None, :], b[None, :])[0]


def _forward_solve(tri: QSparseMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve T x = rhs for lower-triangular T with its diagonal stored last
    in each row (sorted column indices)."""
    n = tri.shape[0]
    x = np.zeros_like(rhs)
    indptr, indices, values = tri.indptr, tri.indices, tri.values
    for i in range(n):
        lo, hi = indptr[i], indptr[i + 1]
        acc = rhs[i].copy()
        if hi - lo > 1:
            prods = _row_qprod(values[lo:hi - 1], x[indices[lo:hi - 1]])
            acc -= prods.sum(axis=0)
        d = values[hi - 1]
        dinv = np.array([d[0], -d[1], -d[2], -d[3]]) / (d @ d)
        x[i] = _qmul(dinv, acc)
    return x


def _backward_solve(tri: QSparseMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve T x = rhs for upper-triangular T with its diagonal stored first
    in each row."""
    n = tri.shape[0]
    x = np.zeros_like(rhs)
    indptr, indices, values = tri.indptr, tri.indices, tri.values
    for i in range(n - 1, -1, -1):
        lo, hi = indptr[i], indptr[i + 1]
        acc = rhs[i].copy()
        if hi - lo > 1:
            prods = _row_qprod(values[lo + 1:hi], x[indices[lo + 1:hi]])
            acc -= prods.sum(axis=0)
        d = values[lo]
        dinv = np.array([d[0], -d[1], -d[2], -d[3]]) / (d @ d)
        x[i] = _qmul(dinv, acc)
    return x


class SsorPreconditioner:
    """Factored form of M = (D + L) D^{-1} (D + U)."""

    def __init__(self, lower: QSparseMatrix, diag: QVector, upper: QSparseMatrix):
        self.lower = lower        # D + L
        self.upper = upper        # D + U
        self.diag = diag
        self.shape = lower.shape
        self._adj_lower = None    # (D + U)*, lower triangular
        self._adj_upper = None    # (D + L)*, upper triangular

    def solve(self, r: QVector) -> QVector:
        """z = M^{-1} r via forward solve, diagonal scale, backward solve."""
        if r.n != self.shape[0]:
            raise ValueError(f"dimension mismatch: {self.shape} vs {r.n}")
        y = _forward_solve(self.lower, r.data)
        t = _row_qprod(self.diag.data, y)
        return QVector(_backward_solve(self.upper, t))

    def solve_adjoint(self, r: QVector) -> QVector:
        """z = M^{-*} r, using M* = (D + U)* D^{-*} (D + L)*."""
        if r.n != self.shape[0]:
            raise ValueError(f"dimension mismatch: {self.shape} vs {r.n}")
        if self._adj_lower is None:
            self._adj_lower = self.upper.adjoint_matrix()
            self._adj_upper = self.lower.adjoint_matrix()
        y = _forward_solve(self._adj_lower, r.data)
        conj_diag = self.diag.conj()
        t = _row_qprod(conj_diag.data, y)
        return QVector(_backward_solve(self._adj_upper, t))

    def apply(self, x: QVector) -> QVector:
        """M x, for verification: (D + L) applied to D^{-1} (D + U) x."""
        u = self.upper.apply(x)
        dinv = np.column_stack([
            self.diag.data[:, 0], -self.diag.data[:, 1],
            -self.diag.data[:, 2], -self.diag.data[:, 3],
        ]) / (self.diag.data ** 2).sum(axis=1, keepdims=True)
        t = QVector(_row_qprod(dinv, u.data))
        return self.lower.apply(t)


def ssor_build(A) -> SsorPreconditioner:
    """Split A = D + L + U and build the SSOR factors.

    Parameters
    ----------
    A : QSparseMatrix or operator with to_sparse()

    Raises
    ------
    ValueError
        If any diagonal entry is missing or zero (the row is reported).
    """
    if not isinstance(A, QSparseMatrix):
        A = A.to_sparse()
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    n = A.shape[0]
    rows = np.repeat(np.arange(n), np.diff(A.indptr))
    cols = A.indices
    diag_mask = rows == cols
    diag_rows = rows[diag_mask]
    present = np.zeros(n, dtype=bool)
    present[diag_rows] = True
    if not present.all():
        missing = int(np.argmin(present))
        raise ValueError(f"missing diagonal entry in row {missing}")
    diag_vals = np.zeros((n, 4))
    diag_vals[diag_rows] = A.values[diag_mask]
    norms = (diag_vals ** 2).sum(axis=1)
    if np.any(norms == 0.0):
        row = int(np.argmin(norms > 0.0))
        raise ValueError(f"zero diagonal entry in row {row}")
    lower_mask = cols <= rows
    upper_mask = cols >= rows
    lower = QSparseMatrix.from_coo(rows[lower_mask], cols[lower_mask],
                                   A.values[lower_mask], A.shape)
    upper = QSparseMatrix.from_coo(rows[upper_mask], cols[upper_mask],
                                   A.values[upper_mask], A.shape)
    return SsorPreconditioner(lower, QVector(diag_vals), upper)
