import numpy as np
import pytest

from qkrylov import (
    QVector, QDenseMatrix, QSparseMatrix,
    ssor_build, qqmr2, pqqmr2,
)

from helpers import random_qvector


def random_sparse_with_unit_diag(n, seed, density=0.3):
    rng = np.random.default_rng(seed)
    dense = rng.normal(size=(n, n, 4)) * (rng.random((n, n, 1)) < density)
    d = rng.normal(size=(n, 4))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    dense[np.arange(n), np.arange(n)] = d
    return QSparseMatrix.from_dense(QDenseMatrix(dense)), QDenseMatrix(dense)


class TestBuild:
    def test_diagonal_matrix_gives_diagonal_m(self):
        rng = np.random.default_rng(0)
        d = QVector(rng.normal(size=(5, 4)) + np.array([2.0, 0, 0, 0]))
        A = QSparseMatrix.diagonal(d)
        M = ssor_build(A)
        x = random_qvector(5, 1)
        # L = U = 0 so M = D: apply is plain diagonal multiply
        assert (M.apply(x) - A.apply(x)).norm() < 1e-12

    def test_identity(self):
        A = QSparseMatrix.identity(4)
        M = ssor_build(A)
        x = random_qvector(4, 2)
        assert (M.apply(x) - x).norm() < 1e-14
        assert (M.solve(x) - x).norm() < 1e-14

    def test_missing_diagonal_reports_row(self):
        vals = np.zeros((2, 4))
        vals[:, 0] = 1.0
        A = QSparseMatrix.from_coo([0, 1], [0, 0], vals, (2, 2))
        with pytest.raises(ValueError, match="row 1"):
            ssor_build(A)

    def test_zero_diagonal_reports_row(self):
        vals = np.zeros((2, 4))
        vals[0, 0] = 1.0  # second diagonal entry is exactly zero
        A = QSparseMatrix.from_coo([0, 1], [0, 1], vals, (2, 2))
        with pytest.raises(ValueError, match="row 1"):
            ssor_build(A)


class TestApplyInverse:
    def test_factored_apply_matches_dense_product(self):
        A, dense = random_sparse_with_unit_diag(10, 3)
        M = ssor_build(A)
        # explicit (D+L) D^{-1} (D+U) via dense quaternion products
        n = 10
        DL = QDenseMatrix.zeros(n, n)
        DU = QDenseMatrix.zeros(n, n)
        Dinv = QDenseMatrix.zeros(n, n)
        for i in range(n):
            for j in range(n):
                q = dense.entry(i, j)
                if j <= i:
                    DL.set_entry(i, j, q)
                if j >= i:
                    DU.set_entry(i, j, q)
            Dinv.set_entry(i, i, dense.entry(i, i).inverse())
        Mdense = DL @ Dinv @ DU
        x = random_qvector(n, 4)
        assert (M.apply(x) - Mdense.matvec(x)).norm() < 1e-10

    def test_inverse_round_trip(self):
        A, _ = random_sparse_with_unit_diag(12, 5)
        M = ssor_build(A)
        x = random_qvector(12, 6)
        assert (M.solve(M.apply(x)) - x).norm() < 1e-10 * max(1.0, x.norm())
        assert (M.apply(M.solve(x)) - x).norm() < 1e-10 * max(1.0, x.norm())

    def test_adjoint_solve_consistency(self):
        A, _ = random_sparse_with_unit_diag(9, 7)
        M = ssor_build(A)
        a = random_qvector(9, 8)
        b = random_qvector(9, 9)
        lhs = M.solve(a).inner(b)
        rhs = a.inner(M.solve_adjoint(b))
        assert abs(lhs - rhs) < 1e-9 * max(1.0, a.norm() * b.norm())

    def test_real_right_scaling_commutes(self):
        A, _ = random_sparse_with_unit_diag(8, 10)
        M = ssor_build(A)
        r = random_qvector(8, 11)
        c = 3.25
        assert (M.solve(r * c) - M.solve(r) * c).norm() < 1e-10

    def test_dimension_mismatch(self):
        A = QSparseMatrix.identity(4)
        M = ssor_build(A)
        with pytest.raises(ValueError):
            M.solve(QVector.zeros(5))


class TestTriangularExactness:
    def test_lower_triangular_system_converges_in_one_iteration(self):
        # for lower triangular A: U = D so M = (D+L) D^{-1} D = A exactly
        rng = np.random.default_rng(12)
        n = 10
        dense = np.tril(rng.normal(size=(n, n, 4)).transpose(2, 0, 1)).transpose(1, 2, 0)
        dense[np.arange(n), np.arange(n), 0] += 3.0
        A = QSparseMatrix.from_dense(QDenseMatrix(dense))
        b = random_qvector(n, 13)
        rep = pqqmr2(A, b)
        assert rep.converged
        assert rep.iterations == 1

    def test_preconditioned_identity_is_identity(self):
        A = QSparseMatrix.identity(6)
        b = random_qvector(6, 14)
        rep = pqqmr2(A, b)
        assert rep.converged and rep.iterations == 1
        plain = qqmr2(A, b)
        assert plain.iterations == rep.iterations
