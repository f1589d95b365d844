"""Sparse and structured quaternion linear operators.

Every operator exposes ``shape``, ``apply`` and ``apply_adjoint`` under
right-module semantics: (A x)_i = sum_j A_ij * x_j.  Componentwise storage
makes each quaternion matvec a fixed pattern of real matvecs (the
first-block-column product of the real counterpart), so nothing is ever
expanded to 4n x 4n.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .quat import Quaternion, QVector, QDenseMatrix

__all__ = [
    "QLinearOperator",
    "QSparseMatrix",
    "DenseOperator",
    "ChannelScaled",
    "KronToeplitz",
    "LeftPreconditioned",
]


class QLinearOperator:
    """Abstract square quaternion linear map with forward and adjoint apply."""

    shape: tuple

    @property
    def n(self) -> int:
        return self.shape[0]

    def apply(self, x: QVector) -> QVector:
        raise NotImplementedError

    def apply_adjoint(self, x: QVector) -> QVector:
        raise NotImplementedError

    def to_sparse(self) -> "QSparseMatrix":
        raise NotImplementedError(f"{type(self).__name__} has no sparse assembly")

    def _check(self, x: QVector):
        if x.n != self.shape[1]:
            raise ValueError(f"dimension mismatch: operator {self.shape}, vector {x.n}")


def _hamilton_combine(m0, m1, m2, m3, xd: np.ndarray) -> np.ndarray:
    """y = M x for componentwise maps m_c, given x components (n, 4)."""
    x0, x1, x2, x3 = xd[:, 0], xd[:, 1], xd[:, 2], xd[:, 3]
    y0 = m0(x0) - m1(x1) - m2(x2) - m3(x3)
    y1 = m0(x1) + m1(x0) + m2(x3) - m3(x2)
    y2 = m0(x2) - m1(x3) + m2(x0) + m3(x1)
    y3 = m0(x3) + m1(x2) - m2(x1) + m3(x0)
    return np.column_stack([y0, y1, y2, y3])


class QSparseMatrix(QLinearOperator):
    """CSR quaternion sparse matrix: one sparsity pattern, four value arrays.

    Parameters
    ----------
    indptr, indices : int arrays
        Shared CSR structure; column indices sorted within each row.
    values : (nnz, 4) float array
        Quaternion value per stored entry.
    shape : (m, n)
    """

    def __init__(self, indptr, indices, values, shape):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != 4:
            raise ValueError("values must be (nnz, 4)")
        self.shape = tuple(shape)
        self._parts = [
            sparse.csr_matrix(
                (self.values[:, c], self.indices, self.indptr), shape=self.shape
            )
            for c in range(4)
        ]
        self._adj_parts = None
        for row in range(self.shape[0]):
            cols = self.indices[self.indptr[row]:self.indptr[row + 1]]
            if cols.size and (np.any(np.diff(cols) <= 0) or cols[-1] >= self.shape[1]
                              or cols[0] < 0):
                raise ValueError(f"row {row}: column indices not strictly "
                                 f"increasing or out of range")

    @classmethod
    def from_coo(cls, rows, cols, values, shape) -> "QSparseMatrix":
        """Build from coordinate data; duplicates summed, explicit zeros kept."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64).reshape(-1, 4)
        keys = rows * shape[1] + cols
        uniq, inv = np.unique(keys, return_inverse=True)
        vals = np.zeros((uniq.size, 4))
        np.add.at(vals, inv, values)
        urows, ucols = uniq // shape[1], uniq % shape[1]
        indptr = np.zeros(shape[0] + 1, dtype=np.int64)
        np.add.at(indptr[1:], urows, 1)
        return cls(np.cumsum(indptr), ucols, vals, shape)

    @classmethod
    def from_dense(cls, M: QDenseMatrix, tol: float = 0.0) -> "QSparseMatrix":
        comps = M.data
        mask = np.abs(comps).max(axis=2) > tol
        rows, cols = np.nonzero(mask)
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        vals = comps[rows, cols, :]
        indptr = np.zeros(M.shape[0] + 1, dtype=np.int64)
        np.add.at(indptr[1:], rows, 1)
        indptr = np.cumsum(indptr)
        return cls(indptr, cols, vals, M.shape)

    @classmethod
    def from_real(cls, A0, coeffs=(1.0, 0.0, 0.0, 0.0)) -> "QSparseMatrix":
        """Quaternion matrix c0*A0 + c1*A0 i + c2*A0 j + c3*A0 k."""
        A0 = sparse.csr_matrix(A0)
        A0.sort_indices()
        vals = np.outer(A0.data, np.asarray(coeffs, dtype=np.float64))
        return cls(A0.indptr, A0.indices, vals, A0.shape)

    @classmethod
    def identity(cls, n: int) -> "QSparseMatrix":
        vals = np.zeros((n, 4))
        vals[:, 0] = 1.0
        return cls(np.arange(n + 1), np.arange(n), vals, (n, n))

    @classmethod
    def diagonal(cls, d: QVector) -> "QSparseMatrix":
        n = d.n
        return cls(np.arange(n + 1), np.arange(n), d.data.copy(), (n, n))

    @property
    def nnz(self) -> int:
        return self.indices.size

    def component(self, c: int) -> sparse.csr_matrix:
        return self._parts[c]

    def apply(self, x: QVector) -> QVector:
        self._check(x)
        p = self._parts
        return QVector(_hamilton_combine(
            lambda v: p[0] @ v, lambda v: p[1] @ v,
            lambda v: p[2] @ v, lambda v: p[3] @ v, x.data))

    def apply_adjoint(self, x: QVector) -> QVector:
        if x.n != self.shape[0]:
            raise ValueError(f"dimension mismatch: operator {self.shape}, vector {x.n}")
        if self._adj_parts is None:
            # A* components: (A0^T, -A1^T, -A2^T, -A3^T)
            self._adj_parts = [self._parts[0].T.tocsr()] + [
                (-self._parts[c].T).tocsr() for c in (1, 2, 3)
            ]
        p = self._adj_parts
        return QVector(_hamilton_combine(
            lambda v: p[0] @ v, lambda v: p[1] @ v,
            lambda v: p[2] @ v, lambda v: p[3] @ v, x.data))

    def to_dense(self) -> QDenseMatrix:
        return QDenseMatrix(np.stack([p.toarray() for p in self._parts], axis=-1))

    def to_sparse(self) -> "QSparseMatrix":
        return self

    def adjoint_matrix(self) -> "QSparseMatrix":
        """Assembled A* (conjugate transpose) with the transposed pattern."""
        # identical input patterns transpose to identical output patterns,
        # so the four data arrays stay aligned
        parts = []
        for c in range(4):
            t = self._parts[c].T.tocsr()
            t.sort_indices()
            parts.append(t)
        vals = np.column_stack([parts[0].data, -parts[1].data,
                                -parts[2].data, -parts[3].data])
        return QSparseMatrix(parts[0].indptr, parts[0].indices, vals,
                             (self.shape[1], self.shape[0]))

    def __repr__(self):
        return f"QSparseMatrix(shape={self.shape}, nnz={self.nnz})"


class DenseOperator(QLinearOperator):
    """Operator view of a dense quaternion matrix."""

    def __init__(self, M: QDenseMatrix):
        self.M = M
        self.shape = M.shape
        self._adj = None

    def apply(self, x: QVector) -> QVector:
        self._check(x)
        return self.M.matvec(x)

    def apply_adjoint(self, x: QVector) -> QVector:
        if self._adj is None:
            self._adj = self.M.adjoint()
        return self._adj.matvec(x)

    def to_sparse(self) -> QSparseMatrix:
        return QSparseMatrix.from_dense(self.M)


class ChannelScaled(QLinearOperator):
    """A = c0*A0 + c1*A0 i + c2*A0 j + c3*A0 k for a real sparse A0.

    Entries are A0_rs * q with q = c0 + c1 i + c2 j + c3 k, so a matvec is
    one entrywise left multiplication by q followed by four real matvecs.
    """

    def __init__(self, A0, coeffs=(1.0, 2.0, -1.5, 0.5)):
        A0 = sparse.csr_matrix(A0)
        if A0.shape[0] != A0.shape[1]:
            raise ValueError(f"A0 must be square, got {A0.shape}")
        self.A0 = A0
        self._A0T = None
        self.coeffs = tuple(float(c) for c in coeffs)
        self.q = Quaternion(*self.coeffs)
        self.shape = A0.shape

    def apply(self, x: QVector) -> QVector:
        self._check(x)
        u = x.left_mul(self.q)
        return QVector(np.column_stack([self.A0 @ u.data[:, c] for c in range(4)]))

    def apply_adjoint(self, x: QVector) -> QVector:
        self._check(x)
        if self._A0T is None:
            self._A0T = self.A0.T.tocsr()
        u = x.left_mul(self.q.conj())
        return QVector(np.column_stack([self._A0T @ u.data[:, c] for c in range(4)]))

    def to_sparse(self) -> QSparseMatrix:
        return QSparseMatrix.from_real(self.A0, self.coeffs)


class KronToeplitz(QLinearOperator):
    """A = q * (B1 kron B2) on length n^2 quaternion vectors.

    The Kronecker product is never formed: per component,
    (B1 kron B2) vec(X) = vec(B2 X B1^T) with column-stacking vec.  The
    optional channel coefficients give A = c0*A0 + c1*A0 i + c2*A0 j +
    c3*A0 k exactly as in ChannelScaled.
    """

    def __init__(self, B1, B2, coeffs=(1.0, 0.0, 0.0, 0.0)):
        B1 = np.asarray(B1, dtype=np.float64)
        B2 = np.asarray(B2, dtype=np.float64)
        if B1.ndim != 2 or B1.shape[0] != B1.shape[1]:
            raise ValueError("B1 must be square")
        if B2.ndim != 2 or B2.shape[0] != B2.shape[1]:
            raise ValueError("B2 must be square")
        if B1.shape != B2.shape:
            raise ValueError("B1 and B2 must have the same size")
        self.B1, self.B2 = B1, B2
        self.grid = B1.shape[0]
        self.coeffs = tuple(float(c) for c in coeffs)
        self.q = Quaternion(*self.coeffs)
        n2 = self.grid * self.grid
        self.shape = (n2, n2)

    def _kron_apply(self, v: np.ndarray, transpose: bool) -> np.ndarray:
        n = self.grid
        X = v.reshape(n, n, order="F")
        if transpose:
            Y = self.B2.T @ X @ self.B1
        else:
            Y = self.B2 @ X @ self.B1.T
        return Y.reshape(-1, order="F")

    def apply(self, x: QVector) -> QVector:
        self._check(x)
        u = x.left_mul(self.q)
        return QVector(np.column_stack(
            [self._kron_apply(u.data[:, c], False) for c in range(4)]))

    def apply_adjoint(self, x: QVector) -> QVector:
        self._check(x)
        u = x.left_mul(self.q.conj())
        return QVector(np.column_stack(
            [self._kron_apply(u.data[:, c], True) for c in range(4)]))

    def to_sparse(self) -> QSparseMatrix:
        A0 = sparse.kron(sparse.csr_matrix(self.B1), sparse.csr_matrix(self.B2),
                         format="csr")
        return QSparseMatrix.from_real(A0, self.coeffs)


class LeftPreconditioned(QLinearOperator):
    """A' = M^{-1} A for a left preconditioner with solve/solve_adjoint."""

    def __init__(self, M, A: QLinearOperator):
        self.M = M
        self.A = A
        self.shape = A.shape

    def apply(self, x: QVector) -> QVector:
        return self.M.solve(self.A.apply(x))

    def apply_adjoint(self, x: QVector) -> QVector:
        # (M^{-1} A)* = A* M^{-*}
        return self.A.apply_adjoint(self.M.solve_adjoint(x))
