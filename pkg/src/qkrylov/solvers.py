"""Iterative solvers for non-Hermitian quaternion linear systems.

Five solvers share one reporting contract:

* ``qbicg``   — biconjugate gradients on the two-sided recurrence;
* ``qqmr3``   — quasi-minimal residual driven by the three-term process;
* ``qqmr2``   — quasi-minimal residual driven by the coupled two-term
  process (the robust variant);
* ``pqqmr3`` / ``pqqmr2`` — the same iterations applied to the left
  SSOR-preconditioned system A' = M^{-1} A.

Stopping: relative residual ||r_j|| / ||r_0|| <= tol (on the preconditioned
residual when preconditioned) or max_iter.  The residual recurrence is
refreshed from scratch every ``refresh_every`` iterations and at
termination, and reports always store recomputed values.  Near-breakdowns
of the orthonormalization restart the iteration from the current iterate;
exact (lucky) breakdowns deliver the exact solution and stop.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .quat import QVector
from .operators import QLinearOperator, LeftPreconditioned
from .bio import (
    LUCKY, NEAR_BREAKDOWN,
    BreakdownPolicy, ThreeTermBio, CoupledTwoTermBio,
)
from .givens import TridiagQR, BidiagQR
from .precond import SsorPreconditioner, ssor_build

__all__ = [
    "SolveOptions",
    "SolveReport",
    "qbicg",
    "qqmr3",
    "qqmr2",
    "pqqmr3",
    "pqqmr2",
    "SOLVERS",
    "residual_envelope_ok",
]

CONVERGED = "converged"
MAX_ITER = "max_iter"
BREAKDOWN = "breakdown"
RESTART_EXHAUSTED = "restart_exhausted"


@dataclass
class SolveOptions:
    """Shared solver knobs.

    tol is the relative-residual target; max_iter caps total iterations
    across restarts.  History recording keeps per-iteration residuals,
    quasi-residuals, rotation data and (optionally) iterates, at O(iters)
    extra memory.
    """

    tol: float = 1e-7
    max_iter: int = 5000
    policy: BreakdownPolicy = field(default_factory=BreakdownPolicy)
    record_history: bool = False
    record_iterates: bool = False
    record_rotations: bool = False
    refresh_every: int = 50

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class SolveReport:
    """Outcome of one solve.

    ``final_rr`` is the recomputed relative residual of the system the
    iteration actually ran on (the preconditioned one for pqqmr*);
    ``true_final_rr`` always refers to the original A x = b.  Histories are
    populated only with ``record_history``; ``step_in_segment`` gives the
    1-based step index within the current restart segment, which is the m
    entering the sqrt(m+1) quasi-residual envelope.
    """

    x: QVector
    iterations: int
    termination: str
    beta: float
    final_rr: float
    true_final_rr: float
    preconditioned_final_rr: float | None
    wall_time: float
    restarts: int = 0
    detail: str = ""
    residual_history: list | None = None
    quasi_history: list | None = None
    true_history: list | None = None
    time_history: list | None = None
    step_in_segment: list | None = None
    g12_history: list | None = None
    columns: list | None = None
    iterates: list | None = None
    rotations: list | None = None

    @property
    def converged(self) -> bool:
        return self.termination == CONVERGED

    def __repr__(self):
        return (f"SolveReport({self.termination}, iterations={self.iterations}, "
                f"true_rr={self.true_final_rr:.2e})")


class _Recorder:
    def __init__(self, opts: SolveOptions, orig, beta_orig, t0):
        self.on = opts.record_history
        self.orig = orig
        self.beta_orig = beta_orig
        self.t0 = t0
        self.residuals = [] if self.on else None
        self.quasis = [] if self.on else None
        self.trues = [] if self.on else None
        self.times = [] if self.on else None
        self.steps = [] if self.on else None
        self.g12 = [] if self.on else None
        self.columns = [] if self.on else None
        self.iterates = [] if (self.on and opts.record_iterates) else None
        self.rotations = [] if opts.record_rotations else None

    def record(self, rr, quasi, m_local, x, column, g12_abs, rotation):
        if not self.on:
            if rotation is not None and self.rotations is not None:
                self.rotations.append(rotation)
            return
        self.residuals.append(rr)
        self.quasis.append(quasi)
        self.steps.append(m_local)
        self.times.append((time.perf_counter() - self.t0) * 1e3)
        if column is not None:
            self.columns.append(column)
        if g12_abs is not None:
            self.g12.append(g12_abs)
        if self.orig is not None:
            A0, b0, beta_true = self.orig
            self.trues.append((b0 - A0.apply(x)).norm() / beta_true)
        if self.iterates is not None:
            self.iterates.append(x.copy())
        if rotation is not None and self.rotations is not None:
            self.rotations.append(rotation)


def _finalize(op, b, x, beta_orig, iters, termination, detail, recorder,
              restarts, t0, orig):
    final_r = (b - op.apply(x)).norm()
    final_rr = final_r / beta_orig if beta_orig > 0 else 0.0
    if orig is not None:
        A0, b0, beta_true = orig
        true_rr = (b0 - A0.apply(x)).norm() / beta_true if beta_true > 0 else 0.0
        prec_rr = final_rr
    else:
        true_rr = final_rr
        prec_rr = None
    rec = recorder
    return SolveReport(
        x=x, iterations=iters, termination=termination, beta=beta_orig,
        final_rr=final_rr, true_final_rr=true_rr,
        preconditioned_final_rr=prec_rr,
        wall_time=time.perf_counter() - t0, restarts=restarts, detail=detail,
        residual_history=rec.residuals, quasi_history=rec.quasis,
        true_history=rec.trues if rec.orig is not None else rec.residuals,
        time_history=rec.times, step_in_segment=rec.steps,
        g12_history=rec.g12, columns=rec.columns, iterates=rec.iterates,
        rotations=rec.rotations,
    )


def _prepare(A, b, x0):
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    if b.n != A.shape[0]:
        raise ValueError(f"dimension mismatch: A {A.shape}, b {b.n}")
    x = x0.copy() if x0 is not None else QVector.zeros(b.n)
    if x.n != b.n:
        raise ValueError(f"dimension mismatch: b {b.n}, x0 {x.n}")
    return x


def _qmr_loop(op, b, x0, opts, orig, two_term):
    t0 = time.perf_counter()
    x = _prepare(op, b, x0)
    r = b - op.apply(x)
    beta_orig = r.norm()
    recorder = _Recorder(opts, orig, beta_orig, t0)
    if beta_orig == 0.0:
        return _finalize(op, b, x, 0.0, 0, CONVERGED, "zero initial residual",
                         recorder, 0, t0, orig)
    iters = 0
    restarts = 0
    detail = ""
    while True:
        beta_seg = r.norm()
        if beta_seg / beta_orig <= opts.tol:
            return _finalize(op, b, x, beta_orig, iters, CONVERGED, detail,
                             recorder, restarts, t0, orig)
        v1 = r / beta_seg
        try:
            if two_term:
                bio = CoupledTwoTermBio(op, v1, v1, policy=opts.policy)
                qr = BidiagQR(beta_seg, opts.record_rotations)
            else:
                bio = ThreeTermBio(op, v1, v1, policy=opts.policy)
                qr = TridiagQR(beta_seg, opts.record_rotations)
        except ValueError:
            # <v1, w1> = 1 for v1 = w1, so this cannot trip; guard anyway
            return _finalize(op, b, x, beta_orig, iters, BREAKDOWN,
                             "degenerate start", recorder, restarts, t0, orig)
        d_prev = d_prev2 = QVector.zeros(b.n)
        ad_prev = ad_prev2 = QVector.zeros(b.n)
        m_local = 0
        need_restart = False
        while iters < opts.max_iter:
            rec = bio.step()
            if rec.status == NEAR_BREAKDOWN and (
                    (two_term and rec.tau1 is None) or (not two_term and rec.alpha is None)):
                need_restart = True
                break
            m_local += 1
            if two_term:
                kappa2, kappa1, gamma_j = qr.update(rec.tau1, rec.rho_next)
                d_j = (rec.p - d_prev.right_mul(kappa2)) / kappa1
                ad_j = (rec.ap - ad_prev.right_mul(kappa2)) / kappa1
                d_prev, ad_prev = d_j, ad_j
                column = (rec.tau1, rec.rho_next)
            else:
                eta3, eta2, eta1, gamma_j = qr.update(rec.tau, rec.alpha,
                                                      rec.rho_next)
                d_j = (rec.v - d_prev.right_mul(eta2)
                       - d_prev2.right_mul(eta3)) / eta1
                ad_j = (rec.av - ad_prev.right_mul(eta2)
                        - ad_prev2.right_mul(eta3)) / eta1
                d_prev2, d_prev = d_prev, d_j
                ad_prev2, ad_prev = ad_prev, ad_j
                column = (rec.tau, rec.alpha, rec.rho_next)
            x = x + d_j.right_mul(gamma_j)
            r = r - ad_j.right_mul(gamma_j)
            iters += 1
            if iters % opts.refresh_every == 0:
                r = b - op.apply(x)
            rr = r.norm() / beta_orig
            recorder.record(rr, qr.quasi_residual / beta_orig, m_local, x,
                            column, qr.g12_abs[-1],
                            qr.rotations[-1] if qr.rotations else None)
            if rr <= opts.tol:
                r = b - op.apply(x)
                if r.norm() / beta_orig <= opts.tol:
                    return _finalize(op, b, x, beta_orig, iters, CONVERGED,
                                     detail, recorder, restarts, t0, orig)
            if rec.status == LUCKY:
                # rho ~ 0 closes the solution-side Krylov space (iterate
                # exact); eps ~ 0 alone only terminates the shadow sequence
                detail = ("invariant subspace reached"
                          if rec.rho_next <= rec.eps_next
                          else "w-side recurrence terminated")
                return _finalize(op, b, x, beta_orig, iters, BREAKDOWN, detail,
                                 recorder, restarts, t0, orig)
            if rec.status == NEAR_BREAKDOWN:
                need_restart = True
                break
        if not need_restart:
            return _finalize(op, b, x, beta_orig, iters, MAX_ITER, detail,
                             recorder, restarts, t0, orig)
        restarts += 1
        if restarts > opts.policy.max_restarts:
            return _finalize(op, b, x, beta_orig, iters, RESTART_EXHAUSTED,
                             "near-breakdown persisted", recorder, restarts - 1,
                             t0, orig)
        detail = f"restarted {restarts}x on near-breakdown"
        r = b - op.apply(x)


def qqmr3(A: QLinearOperator, b: QVector, x0: QVector | None = None,
          opts: SolveOptions | None = None, _orig=None) -> SolveReport:
    """Quasi-minimal residual solve on the three-term recurrences.

    Parameters
    ----------
    A : QLinearOperator
        Square quaternion operator with forward and adjoint apply.
    b : QVector
    x0 : QVector, optional
        Initial guess (zero vector by default).
    opts : SolveOptions, optional

    Returns
    -------
    SolveReport
    """
    return _qmr_loop(A, b, x0, opts or SolveOptions(), _orig, two_term=False)


def qqmr2(A: QLinearOperator, b: QVector, x0: QVector | None = None,
          opts: SolveOptions | None = None, _orig=None) -> SolveReport:
    """Quasi-minimal residual solve on the coupled two-term recurrences."""
    return _qmr_loop(A, b, x0, opts or SolveOptions(), _orig, two_term=True)


def _preconditioned(inner, A, b, M, x0, opts):
    opts = opts or SolveOptions()
    if M is None:
        M = ssor_build(A)
    x = x0.copy() if x0 is not None else QVector.zeros(b.n)
    beta_true = (b - A.apply(x)).norm()
    if beta_true == 0.0:
        return inner(A, b, x0, opts)
    op = LeftPreconditioned(M, A)
    b_prime = M.solve(b)
    return inner(op, b_prime, x0, opts, _orig=(A, b, beta_true))


def pqqmr3(A: QLinearOperator, b: QVector, M: SsorPreconditioner | None = None,
           x0: QVector | None = None, opts: SolveOptions | None = None) -> SolveReport:
    """Left-preconditioned qqmr3 on A' = M^{-1} A.

    M defaults to the SSOR preconditioner built from A.  The stopping test
    runs on the preconditioned residual; the true residual is recomputed
    for the report (and per iteration under record_history).
    """
    return _preconditioned(qqmr3, A, b, M, x0, opts)


def pqqmr2(A: QLinearOperator, b: QVector, M: SsorPreconditioner | None = None,
           x0: QVector | None = None, opts: SolveOptions | None = None) -> SolveReport:
    """Left-preconditioned qqmr2 on A' = M^{-1} A."""
    return _preconditioned(qqmr2, A, b, M, x0, opts)


def qbicg(A: QLinearOperator, b: QVector, x0: QVector | None = None,
          opts: SolveOptions | None = None) -> SolveReport:
    """Biconjugate gradient iteration on the two-sided quaternion recurrence.

    Coefficients multiply from the right; the shadow-sequence coefficients
    are the order-preserved conjugates, which is what keeps the two-sided
    biorthogonality <r_i, r~_j> = 0 and <A p_i, p~_j> = 0 (i != j) intact
    over the skew field.  No residual minimization: convergence may be
    erratic compared to the quasi-minimal residual solvers.
    """
    opts = opts or SolveOptions()
    t0 = time.perf_counter()
    x = _prepare(A, b, x0)
    r = b - A.apply(x)
    beta = r.norm()
    recorder = _Recorder(opts, None, beta, t0)
    if beta == 0.0:
        return _finalize(A, b, x, 0.0, 0, CONVERGED, "zero initial residual",
                         recorder, 0, t0, None)
    rt = r.copy()
    p = r.copy()
    pt = rt.copy()
    delta = r.inner(rt)
    # breakdown = near-orthogonality, so floors scale with the norm products
    floor = opts.policy.sigma_tol
    iters = 0
    while iters < opts.max_iter:
        if abs(delta) < floor * max(np.finfo(float).tiny, r.norm() * rt.norm()):
            return _finalize(A, b, x, beta, iters, BREAKDOWN,
                             "<r, r~> vanished", recorder, 0, t0, None)
        ap = A.apply(p)
        omega = ap.inner(pt)
        if abs(omega) < floor * max(np.finfo(float).tiny, ap.norm() * pt.norm()):
            return _finalize(A, b, x, beta, iters, BREAKDOWN,
                             "<A p, p~> vanished", recorder, 0, t0, None)
        alpha = omega.inverse() * delta
        alpha_t = omega.conj_inverse() * delta.conj()
        x = x + p.right_mul(alpha)
        r = r - ap.right_mul(alpha)
        pt_a = A.apply_adjoint(pt)
        rt = rt - pt_a.right_mul(alpha_t)
        iters += 1
        if iters % opts.refresh_every == 0:
            r = b - A.apply(x)
        rr = r.norm() / beta
        recorder.record(rr, float("nan"), iters, x, None, None, None)
        if rr <= opts.tol:
            r = b - A.apply(x)
            if r.norm() / beta <= opts.tol:
                return _finalize(A, b, x, beta, iters, CONVERGED, "",
                                 recorder, 0, t0, None)
        delta_next = r.inner(rt)
        beta_c = delta.inverse() * delta_next
        beta_t = delta.conj_inverse() * delta_next.conj()
        p = r + p.right_mul(beta_c)
        pt = rt + pt.right_mul(beta_t)
        delta = delta_next
    return _finalize(A, b, x, beta, iters, MAX_ITER, "", recorder, 0, t0, None)


SOLVERS = {
    "qbicg": lambda A, b, x0=None, opts=None: qbicg(A, b, x0, opts),
    "qqmr3": lambda A, b, x0=None, opts=None: qqmr3(A, b, x0, opts),
    "qqmr2": lambda A, b, x0=None, opts=None: qqmr2(A, b, x0, opts),
    "pqqmr3": lambda A, b, x0=None, opts=None: pqqmr3(A, b, x0=x0, opts=opts),
    "pqqmr2": lambda A, b, x0=None, opts=None: pqqmr2(A, b, x0=x0, opts=opts),
}


def residual_envelope_ok(report: SolveReport, slack: float = 1.1) -> bool:
    """Check ||r_m|| <= slack * sqrt(m+1) * |gamma_{m+1}| at every step.

    Also verifies the rotation-product form of the same bound,
    ||r_m|| <= slack * sqrt(m+1) * prod |g12| * ||r_0||, using the recorded
    |g12| stream.  Requires a run with record_history=True on a
    quasi-minimal residual solver.
    """
    if report.residual_history is None or report.quasi_history is None:
        raise ValueError("run with record_history=True")
    prod = 1.0
    first_segment = True
    for i, m in enumerate(report.step_in_segment):
        if m == 1 and i > 0:
            first_segment = False  # product bound is scaled to the first r0
        bound = slack * ((m + 1) ** 0.5) * report.quasi_history[i] + 1e-14
        if report.residual_history[i] > bound:
            return False
        if first_segment:
            prod *= report.g12_history[i]
            bound_g = slack * ((m + 1) ** 0.5) * prod + 1e-14
            if report.residual_history[i] > bound_g:
                return False
    return True
