"""Shared test utilities: random instances and real-counterpart oracles.

"Well conditioned" random systems are iid N(0, 1/n) quaternion entries plus
a +shift real diagonal, which keeps condition numbers at a few for any n
used in the suite.
"""

import numpy as np

from qkrylov import (
    QDenseMatrix, QVector, DenseOperator,
    real_counterpart, first_block_column,
)


def random_qmatrix(n: int, seed: int, shift: float = 3.0) -> QDenseMatrix:
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(n, n, 4)) / np.sqrt(n)
    data[np.arange(n), np.arange(n), 0] += shift
    return QDenseMatrix(data)


def random_operator(n: int, seed: int, shift: float = 3.0) -> DenseOperator:
    return DenseOperator(random_qmatrix(n, seed, shift))


def random_qvector(n: int, seed: int) -> QVector:
    rng = np.random.default_rng(seed)
    return QVector(rng.normal(size=(n, 4)))


def counterpart_solve(M: QDenseMatrix, b: QVector) -> QVector:
    """Direct solve of A x = b through the 4n x 4n real counterpart."""
    R = real_counterpart(M)
    col = np.linalg.solve(R, first_block_column(b))
    return QVector.from_counterpart_column(np.asarray(col).ravel())


def counterpart_lstsq_min(H: QDenseMatrix, beta: float) -> float:
    """min_z || beta e1 - H z ||_2 via the real-counterpart least squares."""
    R = real_counterpart(H)
    rows, cols = H.shape
    rhs = np.zeros(4 * rows)
    rhs[0] = beta  # e1 stacks into the first entry of the w block
    sol, *_ = np.linalg.lstsq(R, rhs, rcond=None)
    return float(np.linalg.norm(rhs - R @ sol))


def operator_matrix(op, n: int) -> QDenseMatrix:
    """Materialize any operator densely by applying it to basis vectors."""
    cols = []
    for j in range(n):
        e = QVector.zeros(n)
        e.data[j, 0] = 1.0
        cols.append(op.apply(e))
    return QDenseMatrix.from_columns(cols)
