import numpy as np
import pytest

from qkrylov import (
    Quaternion, QVector, QDenseMatrix, QSparseMatrix, DenseOperator,
    BreakdownPolicy, LanczosBiorth, ThreeTermBio, CoupledTwoTermBio,
    restart, run_with_restarts, bio_relation_residuals,
)
from qkrylov.bio import (
    OK, LUCKY, NEAR_BREAKDOWN, BreakdownError,
    assemble_tridiag, assemble_lower_bidiag, assemble_unit_upper_bidiag,
    gamma_factors, a_biorth_matrix,
)

from helpers import random_qmatrix, random_operator, random_qvector


def unit(v):
    return v / v.norm()


def hermitian_operator(n, seed):
    M = random_qmatrix(n, seed)
    H = QDenseMatrix((M.data + M.adjoint().data) / 2)
    return DenseOperator(H)


class TestLanczosBiorth:
    def test_requires_unit_pairing(self):
        v = unit(random_qvector(5, 0))
        with pytest.raises(ValueError):
            LanczosBiorth(DenseOperator(random_qmatrix(5, 1)), v, 2.0 * v)

    def test_identity_immediate_lucky_breakdown(self):
        v = unit(random_qvector(6, 2))
        proc = LanczosBiorth(QSparseMatrix.identity(6), v, v)
        assert proc.step() == LUCKY
        assert abs(proc.alphas[0] - Quaternion(1)) < 1e-12

    def test_biorthogonality(self):
        A = random_operator(6, 3)
        v = unit(random_qvector(6, 4))
        proc = LanczosBiorth(A, v, v, keep_basis=True)
        for _ in range(3):
            assert proc.step() == OK
        for i in range(4):
            for j in range(4):
                got = proc.vs[i].inner(proc.ws[j])
                want = Quaternion(1.0) if i == j else Quaternion()
                assert abs(got - want) < 1e-10

    def test_hermitian_collapse(self):
        A = hermitian_operator(7, 5)
        v = unit(random_qvector(7, 6))
        proc = LanczosBiorth(A, v, v, keep_basis=True)
        for _ in range(4):
            assert proc.step() == OK
        for vv, ww in zip(proc.vs, proc.ws):
            assert (vv - ww).norm() < 1e-9


class TestThreeTerm:
    def test_identity_lucky_at_step_one(self):
        v = unit(random_qvector(5, 0))
        proc = ThreeTermBio(QSparseMatrix.identity(5), v, v)
        rec = proc.step()
        assert rec.status == LUCKY
        assert abs(rec.alpha - Quaternion(1)) < 1e-12
        assert rec.rho_next < 1e-12

    def test_biconjugate_orthonormality(self):
        A = random_operator(8, 1)
        v = unit(random_qvector(8, 2))
        w = unit(random_qvector(8, 3))
        proc = ThreeTermBio(A, v, w, keep_basis=True)
        proc.run(4)
        assert proc.j == 4
        for i in range(5):
            for j in range(5):
                got = proc.vs[i].inner(proc.ws[j])
                if i == j:
                    assert abs(got - proc.sigmas[i]) < 1e-9
                else:
                    assert abs(got) < 1e-9
        # produced vectors stay unit norm, rho/eps are nonnegative
        for vv, ww in zip(proc.vs, proc.ws):
            assert vv.norm() == pytest.approx(1.0, rel=1e-12)
            assert ww.norm() == pytest.approx(1.0, rel=1e-12)
        assert all(r >= 0.0 for r in proc.rhos)
        assert all(e >= 0.0 for e in proc.epss)

    def test_v_side_relation(self):
        A = random_operator(8, 4)
        v = unit(random_qvector(8, 5))
        proc = ThreeTermBio(A, v, v, keep_basis=True)
        proc.run(4)
        V = QDenseMatrix.from_columns(proc.vs[:4])
        V1 = QDenseMatrix.from_columns(proc.vs[:5])
        H = assemble_tridiag(proc, 4)
        AV = QDenseMatrix.from_columns([A.apply(V.column(j)) for j in range(4)])
        assert (AV - V1 @ H).frobenius_norm() < 1e-10

    def test_relation_residuals_small(self):
        A = random_operator(10, 6)
        v = unit(random_qvector(10, 7))
        proc = ThreeTermBio(A, v, v, keep_basis=True)
        proc.run(5)
        res = bio_relation_residuals(A, proc)
        scale = 1e-8 * 10  # well under 1e-8 * ||A||_F
        for name, val in res.items():
            assert val < scale, name

    def test_relation_residuals_m1(self):
        A = random_operator(6, 8)
        v = unit(random_qvector(6, 9))
        proc = ThreeTermBio(A, v, v, keep_basis=True)
        proc.run(1)
        res = bio_relation_residuals(A, proc, m=1)
        for val in res.values():
            assert val < 1e-12

    def test_hermitian_streams_coincide(self):
        A = hermitian_operator(8, 10)
        v = unit(random_qvector(8, 11))
        proc = ThreeTermBio(A, v, v, keep_basis=True)
        proc.run(4)
        for vv, ww in zip(proc.vs, proc.ws):
            assert (vv - ww).norm() < 1e-9

    def test_gamma_factors_identity_when_rho_equals_eps(self):
        s = gamma_factors([2.0, 3.0], [2.0, 3.0], 3)
        assert np.array_equal(s, np.ones(3))


class TestCoupledTwoTerm:
    def test_first_step_uses_plain_vectors(self):
        A = random_operator(6, 0)
        v = unit(random_qvector(6, 1))
        w = unit(random_qvector(6, 2))
        proc = CoupledTwoTermBio(A, v, w, keep_basis=True)
        rec = proc.step()
        assert rec.status == OK
        assert (rec.p - proc.vs[0]).norm() < 1e-15
        assert (proc.qs[0] - proc.ws[0]).norm() < 1e-15
        assert abs(rec.mu1) == 0.0

    def test_a_biorthogonality(self):
        A = random_operator(8, 3)
        v = unit(random_qvector(8, 4))
        w = unit(random_qvector(8, 5))
        proc = CoupledTwoTermBio(A, v, w, keep_basis=True)
        proc.run(4)
        G = a_biorth_matrix(proc, 4)
        max_ell = max(abs(e) for e in proc.ells)
        for i in range(4):
            for j in range(4):
                if i == j:
                    assert abs(G.entry(i, i) - proc.ells[i]) < 1e-10
                else:
                    assert abs(G.entry(i, j)) < 1e-9 * max(1.0, max_ell)

    def test_streams_match_three_term(self):
        A = random_operator(8, 6)
        v = unit(random_qvector(8, 7))
        w = unit(random_qvector(8, 8))
        p3 = ThreeTermBio(A, v, w, keep_basis=True)
        p2 = CoupledTwoTermBio(A, v, w, keep_basis=True)
        p3.run(4)
        p2.run(4)
        for a, b in zip(p3.vs, p2.vs):
            assert (a - b).norm() < 1e-8
        for a, b in zip(p3.ws, p2.ws):
            assert (a - b).norm() < 1e-8

    def test_lu_coupling(self):
        A = random_operator(9, 9)
        v = unit(random_qvector(9, 10))
        p3 = ThreeTermBio(A, v, v)
        p2 = CoupledTwoTermBio(A, v, v)
        p3.run(5)
        p2.run(5)
        H = assemble_tridiag(p3, 5)
        L = assemble_lower_bidiag(p2, 5)
        U = assemble_unit_upper_bidiag(p2, 5)
        rel = (H - L @ U).frobenius_norm() / H.frobenius_norm()
        assert rel < 1e-8

    def test_identity_lucky(self):
        v = unit(random_qvector(5, 11))
        proc = CoupledTwoTermBio(QSparseMatrix.identity(5), v, v)
        rec = proc.step()
        assert rec.status == LUCKY


class TestBreakdownAndRestart:
    def test_near_breakdown_flagged_for_orthogonal_start(self):
        # w1 orthogonal to v1 plus a whisper of v1: sigma_1 below the floor
        A = random_operator(6, 12)
        rng = np.random.default_rng(13)
        v = unit(QVector(rng.normal(size=(6, 4))))
        w = QVector(rng.normal(size=(6, 4)))
        w = w - v.right_mul(w.inner(v))  # orthogonalize against v
        w = unit(w) + v * 1e-12
        with pytest.raises(ValueError):
            ThreeTermBio(A, v, unit(w))

    def test_restart_reseeds_from_current_pair(self):
        A = random_operator(8, 14)
        v = unit(random_qvector(8, 15))
        policy = BreakdownPolicy(sigma_tol=0.9, max_restarts=3)  # huge floor
        proc = CoupledTwoTermBio(A, v, v, policy=policy)
        rec = proc.step()
        assert rec.status == NEAR_BREAKDOWN
        fresh = restart(proc)
        assert fresh is not proc
        assert fresh.restarts == 1
        assert abs(fresh.sigma) > 0.0
        # reseeded start is the current pair, renormalized
        assert (fresh.v - proc.v).norm() < 1e-12

    def test_restart_noop_when_healthy(self):
        A = random_operator(6, 16)
        v = unit(random_qvector(6, 17))
        proc = CoupledTwoTermBio(A, v, v)
        proc.step()
        assert restart(proc) is proc

    def test_restart_budget_exhaustion(self):
        A = random_operator(6, 18)
        v = unit(random_qvector(6, 19))
        policy = BreakdownPolicy(sigma_tol=0.999999, max_restarts=1)
        with pytest.raises(BreakdownError):
            run_with_restarts(A, v, v, 5, policy=policy)

    def test_run_with_restarts_healthy(self):
        A = random_operator(8, 20)
        v = unit(random_qvector(8, 21))
        proc = run_with_restarts(A, v, v, 4)
        assert proc.j == 4

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            BreakdownPolicy(sigma_tol=0.0)


class TestAcrossSizes:
    @pytest.mark.parametrize("seed", range(5))
    def test_biorthogonality_random_sizes(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(10, 41))
        A = random_operator(n, 200 + seed)
        v = unit(QVector(rng.normal(size=(n, 4))))
        proc = ThreeTermBio(A, v, v, keep_basis=True)
        m = min(10, n)
        proc.run(m)
        assert proc.j == m
        worst = 0.0
        for i in range(m):
            for j in range(m):
                if i != j:
                    worst = max(worst, abs(proc.vs[i].inner(proc.ws[j])))
        assert worst < 1e-8
