import numpy as np
import pytest

from qkrylov import (
    Quaternion, QVector, QDenseMatrix, QSparseMatrix, DenseOperator,
    BreakdownPolicy, SolveOptions, SolveReport,
    qbicg, qqmr3, qqmr2, pqqmr3, pqqmr2, SOLVERS, residual_envelope_ok,
    gen_convection_diffusion,
)

from helpers import (
    random_qmatrix, random_operator, random_qvector,
    counterpart_solve, counterpart_lstsq_min,
)

ALL = ["qbicg", "qqmr3", "qqmr2", "pqqmr3", "pqqmr2"]


def gram_schmidt(vectors):
    basis = []
    for v in vectors:
        u = v.copy()
        for b in basis:
            u = u - b.right_mul(u.inner(b))
        basis.append(u / u.norm())
    return basis


def closure_system(n, m, seed):
    """A with an m-dimensional invariant subspace containing b, so both
    Krylov spaces close at exactly m."""
    rng = np.random.default_rng(seed)
    U = gram_schmidt([QVector(rng.normal(size=(n, 4))) for _ in range(m)])
    Umat = QDenseMatrix.from_columns(U)
    B = random_qmatrix(m, seed + 1)
    inner = Umat @ B @ Umat.adjoint()
    proj = Umat @ Umat.adjoint()
    Adata = inner.data - 2.0 * proj.data
    Adata[np.arange(n), np.arange(n), 0] += 2.0  # + 2 (I - U U*)
    A = QDenseMatrix(Adata)
    y = QVector(rng.normal(size=(m, 4)))
    b = Umat.matvec(y)
    return DenseOperator(A), b


class TestBasics:
    @pytest.mark.parametrize("name", ALL)
    def test_identity_single_iteration(self, name):
        A = QSparseMatrix.identity(7)
        b = random_qvector(7, 0)
        rep = SOLVERS[name](A, b)
        assert rep.converged
        assert rep.iterations == 1
        assert (rep.x - b).norm() < 1e-12
        assert rep.true_final_rr < 1e-12

    @pytest.mark.parametrize("name", ALL)
    def test_zero_rhs_returns_immediately(self, name):
        A = random_operator(5, 1)
        rep = SOLVERS[name](A, QVector.zeros(5))
        assert rep.converged
        assert rep.iterations == 0
        assert rep.x.norm() == 0.0

    def test_dimension_checks(self):
        A = random_operator(5, 2)
        with pytest.raises(ValueError):
            qqmr2(A, QVector.zeros(4))
        with pytest.raises(ValueError):
            qqmr2(A, QVector.zeros(5), x0=QVector.zeros(6))

    def test_max_iter_termination(self):
        A = random_operator(30, 3)
        b = random_qvector(30, 4)
        rep = qqmr2(A, b, opts=SolveOptions(tol=1e-14, max_iter=3))
        assert rep.termination == "max_iter"
        assert rep.iterations == 3

    def test_converged_implies_tolerance(self):
        A = random_operator(15, 5)
        b = random_qvector(15, 6)
        opts = SolveOptions(tol=1e-9)
        for name in ALL:
            rep = SOLVERS[name](A, b, opts=opts)
            assert rep.converged
            assert rep.final_rr <= 1e-9


class TestDiagonalOracle:
    def test_quaternion_diagonal_entrywise_solve(self):
        d = QVector.from_quaternions([
            Quaternion(1), Quaternion(2), Quaternion(0, 1, 0, 0),
            Quaternion(1, 0, 0, 1),
        ])
        A = QSparseMatrix.diagonal(d)
        b = random_qvector(4, 7)
        want = QVector.from_quaternions(
            [d[i].inverse() * b[i] for i in range(4)])
        for solver in (qqmr3, qqmr2):
            rep = solver(A, b, opts=SolveOptions(tol=1e-12))
            assert rep.iterations <= 4
            assert (rep.x - want).norm() / want.norm() < 1e-8


class TestCounterpartOracle:
    @pytest.mark.parametrize("seed", range(5))
    def test_all_solvers_match_direct_solve(self, seed):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(10, 51))
        M = random_qmatrix(n, seed)
        A = DenseOperator(M)
        b = QVector(rng.normal(size=(n, 4)))
        x_star = counterpart_solve(M, b)
        for name in ALL:
            rep = SOLVERS[name](A, b, opts=SolveOptions(tol=1e-9))
            assert rep.converged, name
            assert rep.iterations <= 4 * n, name
            err = (rep.x - x_star).norm() / x_star.norm()
            assert err < 1e-6, (name, err)


class TestEquivalence:
    @pytest.mark.parametrize("seed", range(3))
    def test_three_vs_two_term_trajectories(self, seed):
        n = 30
        A = random_operator(n, 40 + seed)
        b = random_qvector(n, 50 + seed)
        opts = SolveOptions(tol=1e-12, max_iter=25, record_history=True,
                            record_iterates=True)
        r3 = qqmr3(A, b, opts=opts)
        r2 = qqmr2(A, b, opts=opts)
        steps = min(len(r3.iterates), len(r2.iterates), 25)
        for j in range(steps):
            a, c = r3.iterates[j], r2.iterates[j]
            assert (a - c).norm() <= 1e-6 * max(1.0, a.norm())


class TestLuckyBreakdown:
    @pytest.mark.parametrize("m", [2, 3, 5])
    def test_exact_solution_at_closure(self, m):
        A, b = closure_system(12, m, seed=60 + m)
        for solver in (qqmr3, qqmr2):
            rep = solver(A, b, opts=SolveOptions(tol=1e-13))
            assert rep.iterations == m
            assert rep.true_final_rr < 1e-10
            assert rep.termination in ("converged", "breakdown")


class TestQuasiResidual:
    def test_identity_matches_dense_least_squares(self):
        n = 25
        A = random_operator(n, 70)
        b = random_qvector(n, 71)
        opts = SolveOptions(tol=1e-10, record_history=True)
        rep = qqmr3(A, b, opts=opts)
        beta = rep.beta
        for j in range(rep.iterations):
            cols = rep.columns[:j + 1]
            H = QDenseMatrix.zeros(j + 2, j + 1)
            for k, (tau, alpha, rho) in enumerate(cols):
                H.set_entry(k, k, alpha)
                H.set_entry(k + 1, k, Quaternion(rho))
                if k > 0:
                    H.set_entry(k - 1, k, tau)
            want = counterpart_lstsq_min(H, beta)
            got = rep.quasi_history[j] * beta
            assert got == pytest.approx(want, rel=1e-8, abs=1e-12)

    def test_two_term_variant_matches_dense_least_squares(self):
        n = 20
        A = random_operator(n, 72)
        b = random_qvector(n, 73)
        opts = SolveOptions(tol=1e-10, record_history=True)
        rep = qqmr2(A, b, opts=opts)
        beta = rep.beta
        for j in range(rep.iterations):
            cols = rep.columns[:j + 1]
            L = QDenseMatrix.zeros(j + 2, j + 1)
            for k, (tau1, rho) in enumerate(cols):
                L.set_entry(k, k, tau1)
                L.set_entry(k + 1, k, Quaternion(rho))
            want = counterpart_lstsq_min(L, beta)
            got = rep.quasi_history[j] * beta
            assert got == pytest.approx(want, rel=1e-8, abs=1e-12)


class TestEnvelope:
    @pytest.mark.parametrize("seed", range(3))
    def test_envelope_holds_on_converged_runs(self, seed):
        n = 25
        A = random_operator(n, 80 + seed)
        b = random_qvector(n, 90 + seed)
        opts = SolveOptions(tol=1e-9, record_history=True)
        for solver in (qqmr3, qqmr2, pqqmr3, pqqmr2):
            rep = solver(A, b, opts=opts)
            assert rep.converged
            assert residual_envelope_ok(rep)

    def test_requires_history(self):
        A = QSparseMatrix.identity(3)
        rep = qqmr2(A, random_qvector(3, 99))
        with pytest.raises(ValueError):
            residual_envelope_ok(rep)

    def test_trivial_cases(self):
        opts = SolveOptions(record_history=True)
        A = QSparseMatrix.identity(4)
        # zero-iteration run: the envelope holds vacuously
        rep0 = qqmr2(A, QVector.zeros(4), opts=opts)
        assert rep0.iterations == 0 and residual_envelope_ok(rep0)
        # identity system: both sides are zero at the single step
        rep1 = qqmr2(A, random_qvector(4, 98), opts=opts)
        assert rep1.iterations == 1 and residual_envelope_ok(rep1)
        assert rep1.quasi_history[0] < 1e-14


class TestQbicg:
    def test_hermitian_positive_definite_monotone_energy_error(self):
        rng = np.random.default_rng(100)
        n = 10
        C = QDenseMatrix(rng.normal(size=(n, n, 4)) / np.sqrt(n))
        Hdata = (C.adjoint() @ C).data
        Hdata[np.arange(n), np.arange(n), 0] += 1.0
        M = QDenseMatrix(Hdata)
        A = DenseOperator(M)
        b = QVector(rng.normal(size=(n, 4)))
        x_star = counterpart_solve(M, b)
        opts = SolveOptions(tol=1e-12, record_history=True, record_iterates=True)
        rep = qbicg(A, b, opts=opts)
        assert rep.converged
        errs = []
        for xj in rep.iterates:
            e = x_star - xj
            errs.append(A.apply(e).inner(e).w)
        for prev, cur in zip(errs, errs[1:]):
            assert cur <= prev * (1 + 1e-8)

    def test_breakdown_reported_not_raised(self):
        # skew-Hermitian-like system drives <r, r~> toward zero with rt = r
        data = np.zeros((2, 2, 4))
        data[0, 1, 1] = 1.0    # A = [[0, i], [i, 0]]
        data[1, 0, 1] = 1.0
        A = DenseOperator(QDenseMatrix(data))
        b = QVector.from_quaternions([Quaternion(1), Quaternion(1)])
        rep = qbicg(A, b, opts=SolveOptions(max_iter=50))
        assert rep.termination in ("breakdown", "converged", "max_iter")
        assert isinstance(rep, SolveReport)


class TestScalingConsistency:
    def test_real_rhs_scaling_scales_iterates(self):
        n = 18
        A = random_operator(n, 110)
        b = random_qvector(n, 111)
        c = 7.5
        opts = SolveOptions(tol=1e-9, record_history=True, record_iterates=True)
        r1 = qqmr2(A, b, opts=opts)
        r2 = qqmr2(A, b * c, opts=opts)
        assert r1.iterations == r2.iterations
        for a, s in zip(r1.residual_history, r2.residual_history):
            assert abs(a - s) < 1e-12
        for xa, xs in zip(r1.iterates, r2.iterates):
            assert (xa * c - xs).norm() < 1e-9 * max(1.0, xs.norm())


class TestRestarts:
    def test_forced_restarts_still_converge(self):
        n = 12
        A = random_operator(n, 120)
        b = random_qvector(n, 121)
        policy = BreakdownPolicy(sigma_tol=0.5, max_restarts=500)
        rep = qqmr2(A, b, opts=SolveOptions(tol=1e-8, policy=policy))
        assert rep.converged
        assert rep.restarts > 0
        assert rep.true_final_rr <= 1e-8

    def test_restart_exhaustion_reports_best_iterate(self):
        n = 12
        A = random_operator(n, 122)
        b = random_qvector(n, 123)
        policy = BreakdownPolicy(sigma_tol=0.5, max_restarts=1)
        rep = qqmr2(A, b, opts=SolveOptions(tol=1e-12, policy=policy))
        assert rep.termination == "restart_exhausted"
        assert rep.x.norm() > 0.0


class TestPreconditionedTrend:
    def test_ssor_cuts_iterations_on_stencil_system(self):
        prob = gen_convection_diffusion(grid=12, conv=1.0, seed=5)
        opts = SolveOptions(tol=1e-7)
        plain = qqmr2(prob.operator, prob.b, opts=opts)
        prec = pqqmr2(prob.operator, prob.b, opts=opts)
        assert plain.converged and prec.converged
        assert prec.iterations <= plain.iterations // 3
        assert prec.preconditioned_final_rr is not None
        assert prec.true_final_rr < 1e-5
