"""Quaternion biconjugate orthonormalization processes.

Three incremental processes over a pair of Krylov spaces K_m(A, v1) and
K_m(A*, w1):

* ``LanczosBiorth`` — the classical two-sided recurrence normalized so that
  <v_j, w_j> = 1;
* ``ThreeTermBio`` — both sequences kept at unit 2-norm, giving a
  tridiagonal recurrence matrix whose subdiagonal entries are the norms
  rho_{j+1} >= 0 (three-term recurrences);
* ``CoupledTwoTermBio`` — the mathematically equivalent coupled two-term
  form built on an auxiliary A-biorthogonal pair (p_j, q_j), which realizes
  the implicit bidiagonal LU split of the tridiagonal matrix.

Each ``step`` returns a record with the scalars the solvers consume and a
status: ``OK``, ``LUCKY`` (invariant subspace found, a happy exit) or
``NEAR_BREAKDOWN`` (a pivot scalar fell under its floor; remedied by
restarting the process).  Exact breakdown scalars never go below zero
because they are norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quat import Quaternion, QVector, QDenseMatrix

__all__ = [
    "OK",
    "LUCKY",
    "NEAR_BREAKDOWN",
    "BreakdownPolicy",
    "BreakdownError",
    "LanczosBiorth",
    "ThreeTermBio",
    "CoupledTwoTermBio",
    "restart",
    "run_with_restarts",
    "assemble_tridiag",
    "assemble_tridiag_w",
    "assemble_lower_bidiag",
    "assemble_unit_upper_bidiag",
    "gamma_factors",
    "bio_relation_residuals",
    "a_biorth_matrix",
]

OK = "ok"
LUCKY = "lucky"
NEAR_BREAKDOWN = "near_breakdown"

_SQRT_EPS = math.sqrt(np.finfo(np.float64).eps)
_LUCKY_FACTOR = 1e-12


@dataclass
class BreakdownPolicy:
    """Floors for the pivot scalars and the restart budget.

    The floors are relative: a scalar s trips a near-breakdown when
    |s| < tol * max(1, running max of |s| seen so far), which keeps badly
    scaled systems from triggering spurious restarts.
    """

    sigma_tol: float = _SQRT_EPS
    ell_tol: float = _SQRT_EPS
    max_restarts: int = 10

    def __post_init__(self):
        if self.sigma_tol <= 0 or self.ell_tol <= 0:
            raise ValueError("breakdown tolerances must be positive")

    def sigma_floor(self, running_max: float) -> float:
        return self.sigma_tol * max(1.0, running_max)

    def ell_floor(self, running_max: float) -> float:
        return self.ell_tol * max(1.0, running_max)


class BreakdownError(RuntimeError):
    """Restart budget exhausted without recovering the process."""


@dataclass
class ThreeTermStep:
    status: str
    v: QVector = None          # v_j entering the step
    av: QVector = None         # A v_j
    alpha: Quaternion = None   # diagonal recurrence coefficient
    tau: Quaternion = None     # superdiagonal entry of column j
    rho_next: float = 0.0      # subdiagonal entry (a norm)
    eps_next: float = 0.0
    sigma_next: Quaternion = None


@dataclass
class TwoTermStep:
    status: str
    p: QVector = None          # search direction p_j
    ap: QVector = None         # A p_j
    tau1: Quaternion = None    # lower-bidiagonal diagonal entry sigma_j^{-1} ell_j
    ell: Quaternion = None
    mu1: Quaternion = None     # unit-upper-bidiagonal superdiagonal entry
    rho_next: float = 0.0
    eps_next: float = 0.0
    sigma_next: Quaternion = None


def _unit(v: QVector) -> QVector:
    nrm = v.norm()
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / nrm


class LanczosBiorth:
    """Two-sided recurrence with <v_j, w_j> = 1 scaling.

    Requires <v1, w1> = 1 on entry.  Stops with LUCKY status when the
    cross inner product of the candidate pair vanishes.
    """

    def __init__(self, A, v1: QVector, w1: QVector, keep_basis: bool = False):
        s = v1.inner(w1)
        if abs(s - Quaternion(1.0)) > 1e-8:
            raise ValueError("initial vectors must satisfy <v1, w1> = 1")
        self.A = A
        self.v = v1.copy()
        self.w = w1.copy()
        self.v_prev = QVector.zeros(v1.n)
        self.w_prev = QVector.zeros(v1.n)
        self.beta = Quaternion()    # beta_j
        self.sigma = Quaternion()   # sigma_j
        self.j = 0
        self.alphas = []
        self.betas = []             # beta_2, beta_3, ...
        self.sigmas = []            # sigma_2, sigma_3, ...
        self.keep_basis = keep_basis
        self.vs = [self.v] if keep_basis else None
        self.ws = [self.w] if keep_basis else None

    def step(self) -> str:
        av = self.A.apply(self.v)
        alpha = av.inner(self.w)
        vbar = av - self.v.right_mul(alpha) - self.v_prev.right_mul(self.beta)
        wbar = (self.A.apply_adjoint(self.w)
                - self.w.right_mul(alpha.conj())
                - self.w_prev.right_mul(self.sigma))
        self.alphas.append(alpha)
        h = vbar.inner(wbar)
        sigma_next = math.sqrt(abs(h))
        if sigma_next <= _LUCKY_FACTOR * max(1.0, av.norm()):
            return LUCKY
        beta_next = h * (1.0 / sigma_next)
        w_next = wbar.right_mul(beta_next.conj_inverse())
        v_next = vbar / sigma_next
        self.v_prev, self.v = self.v, v_next
        self.w_prev, self.w = self.w, w_next
        self.beta = beta_next
        self.sigma = Quaternion(sigma_next)
        self.betas.append(beta_next)
        self.sigmas.append(Quaternion(sigma_next))
        self.j += 1
        if self.keep_basis:
            self.vs.append(self.v)
            self.ws.append(self.w)
        return OK


class ThreeTermBio:
    """Unit-norm biconjugate orthonormalization with three-term recurrences.

    Parameters
    ----------
    A : QLinearOperator
    v1, w1 : QVector
        Starting vectors; normalized here.  <v1, w1> must clear the sigma
        floor of the policy.
    policy : BreakdownPolicy, optional
    keep_basis : bool
        Retain all basis vectors (diagnostic mode used by the relation
        checks); the solvers run with the two-vector sliding window.
    """

    def __init__(self, A, v1: QVector, w1: QVector,
                 policy: BreakdownPolicy | None = None, keep_basis: bool = False):
        self.A = A
        self.policy = policy or BreakdownPolicy()
        self.v = _unit(v1)
        self.w = _unit(w1)
        self.v_prev = QVector.zeros(v1.n)
        self.w_prev = QVector.zeros(v1.n)
        sigma1 = self.v.inner(self.w)
        self.sigma_max = abs(sigma1)
        if abs(sigma1) < self.policy.sigma_floor(1.0):
            raise ValueError("<v1, w1> is (near) zero; cannot start the process")
        self.sigma = sigma1
        self.sigma_prev = None
        self.tau = Quaternion()   # tau_j, zero for j = 1
        self.rho = 0.0            # rho_j, zero for j = 1
        self.eps = 1.0            # eps_1 declared nonzero but never consumed
        self.j = 0
        self.status = OK
        # coefficient streams (scalars are cheap; kept unconditionally)
        self.alphas, self.alpha_bars = [], []
        self.rhos, self.epss = [], []            # rho_{j+1}, eps_{j+1}
        self.sigmas = [sigma1]                   # sigma_1, sigma_2, ...
        self.taus = []                           # tau_2, tau_3, ...
        self.keep_basis = keep_basis
        self.vs = [self.v] if keep_basis else None
        self.ws = [self.w] if keep_basis else None

    def step(self) -> ThreeTermStep:
        """Advance one step; on LUCKY/NEAR_BREAKDOWN the state is not advanced."""
        if self.status != OK:
            raise RuntimeError(f"process is in state '{self.status}'")
        v_j, w_j = self.v, self.w
        av = self.A.apply(v_j)
        s = av.inner(w_j)
        alpha = self.sigma.inverse() * s
        alpha_bar = self.sigma.conj_inverse() * s.conj()
        vbar = av - v_j.right_mul(alpha)
        if self.j > 0:
            vbar = vbar - self.v_prev.right_mul(self.tau)
        wbar = self.A.apply_adjoint(w_j) - w_j.right_mul(alpha_bar)
        if self.j > 0:
            w_coef = (self.sigma_prev.conj_inverse() * self.sigma.conj()) * self.rho
            wbar = wbar - self.w_prev.right_mul(w_coef)
        rho_next = vbar.norm()
        eps_next = wbar.norm()
        rec = ThreeTermStep(OK, v=v_j, av=av, alpha=alpha, tau=self.tau,
                            rho_next=rho_next, eps_next=eps_next)
        self.alphas.append(alpha)
        self.alpha_bars.append(alpha_bar)
        self.rhos.append(rho_next)
        self.epss.append(eps_next)
        lucky_floor = _LUCKY_FACTOR * max(1.0, av.norm())
        if rho_next <= lucky_floor or eps_next <= lucky_floor:
            rec.status = self.status = LUCKY
            return rec
        v_next = vbar / rho_next
        w_next = wbar / eps_next
        sigma_next = v_next.inner(w_next)
        rec.sigma_next = sigma_next
        if abs(sigma_next) < self.policy.sigma_floor(self.sigma_max):
            rec.status = self.status = NEAR_BREAKDOWN
            return rec
        tau_next = (self.sigma.inverse() * sigma_next) * eps_next
        self.v_prev, self.v = v_j, v_next
        self.w_prev, self.w = w_j, w_next
        self.sigma_prev, self.sigma = self.sigma, sigma_next
        self.rho, self.eps, self.tau = rho_next, eps_next, tau_next
        self.sigma_max = max(self.sigma_max, abs(sigma_next))
        self.sigmas.append(sigma_next)
        self.taus.append(tau_next)
        self.j += 1
        if self.keep_basis:
            self.vs.append(self.v)
            self.ws.append(self.w)
        return rec

    def run(self, m: int) -> str:
        for _ in range(m):
            if self.step().status != OK:
                break
        return self.status


class CoupledTwoTermBio:
    """Coupled two-term variant built on the A-biorthogonal pair (p_j, q_j).

    Equivalent to ThreeTermBio in exact arithmetic; the diagonal entries
    <A p_j, q_j> = ell_j and the coupling scalars realize the bidiagonal LU
    split of the tridiagonal recurrence matrix.
    """

    def __init__(self, A, v1: QVector, w1: QVector,
                 policy: BreakdownPolicy | None = None, keep_basis: bool = False):
        self.A = A
        self.policy = policy or BreakdownPolicy()
        self.v = _unit(v1)
        self.w = _unit(w1)
        sigma1 = self.v.inner(self.w)
        self.sigma_max = abs(sigma1)
        if abs(sigma1) < self.policy.sigma_floor(1.0):
            raise ValueError("<v1, w1> is (near) zero; cannot start the process")
        self.sigma = sigma1
        self.p_prev = QVector.zeros(v1.n)
        self.q_prev = QVector.zeros(v1.n)
        self.ell_prev = Quaternion()   # ell_0 = 0; the j = 1 coupling term is zero
        self.ell_max = 0.0
        self.rho = 0.0                 # rho_j
        self.eps = 0.0                 # eps_j
        self.j = 0
        self.status = OK
        self.ells, self.tau1s, self.mu1s = [], [], []
        self.rhos, self.epss = [], []
        self.sigmas = [sigma1]
        self.keep_basis = keep_basis
        self.vs = [self.v] if keep_basis else None
        self.ws = [self.w] if keep_basis else None
        self.ps = [] if keep_basis else None
        self.qs = [] if keep_basis else None
        self.aps = [] if keep_basis else None

    def step(self) -> TwoTermStep:
        if self.status != OK:
            raise RuntimeError(f"process is in state '{self.status}'")
        v_j, w_j = self.v, self.w
        if self.j == 0:
            mu1 = Quaternion()
            p_j, q_j = v_j.copy(), w_j.copy()
        else:
            mu1 = (self.ell_prev.inverse() * self.sigma) * self.eps
            mu2_scaled = (self.ell_prev.conj_inverse() * self.sigma.conj()) * self.rho
            p_j = v_j - self.p_prev.right_mul(mu1)
            q_j = w_j - self.q_prev.right_mul(mu2_scaled)
        ap = self.A.apply(p_j)
        ell = ap.inner(q_j)
        rec = TwoTermStep(OK, p=p_j, ap=ap, ell=ell, mu1=mu1)
        if abs(ell) < self.policy.ell_floor(self.ell_max):
            rec.status = self.status = NEAR_BREAKDOWN
            return rec
        tau1 = self.sigma.inverse() * ell
        rec.tau1 = tau1
        vbar = ap - v_j.right_mul(tau1)
        wbar = (self.A.apply_adjoint(q_j)
                - w_j.right_mul(self.sigma.conj_inverse() * ell.conj()))
        rho_next = vbar.norm()
        eps_next = wbar.norm()
        rec.rho_next, rec.eps_next = rho_next, eps_next
        lucky_floor = _LUCKY_FACTOR * max(1.0, ap.norm())
        if rho_next <= lucky_floor or eps_next <= lucky_floor:
            rec.status = self.status = LUCKY
            self._record(rec, p_j, q_j, ap)
            return rec
        v_next = vbar / rho_next
        w_next = wbar / eps_next
        sigma_next = v_next.inner(w_next)
        rec.sigma_next = sigma_next
        if abs(sigma_next) < self.policy.sigma_floor(self.sigma_max):
            rec.status = self.status = NEAR_BREAKDOWN
            return rec
        self._record(rec, p_j, q_j, ap)
        self.p_prev, self.q_prev = p_j, q_j
        self.ell_prev = ell
        self.v, self.w = v_next, w_next
        self.sigma = sigma_next
        self.rho, self.eps = rho_next, eps_next
        self.sigma_max = max(self.sigma_max, abs(sigma_next))
        self.ell_max = max(self.ell_max, abs(ell))
        self.sigmas.append(sigma_next)
        self.j += 1
        if self.keep_basis:
            self.vs.append(self.v)
            self.ws.append(self.w)
        return rec

    def _record(self, rec: TwoTermStep, p_j, q_j, ap):
        self.ells.append(rec.ell)
        self.tau1s.append(rec.tau1)
        self.mu1s.append(rec.mu1)
        self.rhos.append(rec.rho_next)
        self.epss.append(rec.eps_next)
        if self.keep_basis:
            self.ps.append(p_j)
            self.qs.append(q_j)
            self.aps.append(ap)

    def run(self, m: int) -> str:
        for _ in range(m):
            if self.step().status != OK:
                break
        return self.status


def restart(proc, policy: BreakdownPolicy | None = None):
    """Reseed a near-broken process from its current vector pair.

    Returns the process unchanged when it is healthy.  The fresh process is
    started with v1 = v_m, w1 = w_m (renormalized) and empty coefficient
    streams; the restart count rides on the ``restarts`` attribute.
    """
    if proc.status == OK:
        return proc
    policy = policy or proc.policy
    restarts = getattr(proc, "restarts", 0) + 1
    if restarts > policy.max_restarts:
        raise BreakdownError(
            f"near-breakdown persisted through {policy.max_restarts} restarts")
    try:
        fresh = type(proc)(proc.A, proc.v, proc.w, policy=policy,
                           keep_basis=proc.keep_basis)
    except ValueError as exc:
        # reseeded pair still pairs to (near) zero: restarting cannot help
        raise BreakdownError(f"restart failed: {exc}") from exc
    fresh.restarts = restarts
    return fresh


def run_with_restarts(A, v1: QVector, w1: QVector, m: int,
                      policy: BreakdownPolicy | None = None,
                      process=None):
    """Drive a process to m total steps, restarting on near-breakdowns.

    Returns the final process (its coefficient streams cover only the last
    segment).  Raises BreakdownError when the restart budget runs out.
    """
    cls = process or CoupledTwoTermBio
    policy = policy or BreakdownPolicy()
    proc = cls(A, v1, w1, policy=policy)
    done = 0
    while done < m:
        rec = proc.step()
        if rec.status == OK:
            done += 1
        elif rec.status == LUCKY:
            break
        else:
            proc = restart(proc, policy)  # raises when exhausted
    return proc


# ---------------------------------------------------------------------------
# assembly of the recurrence matrices and relation diagnostics
# ---------------------------------------------------------------------------


def assemble_tridiag(proc: ThreeTermBio, m: int | None = None,
                     extended: bool = True) -> QDenseMatrix:
    """Tridiagonal recurrence matrix from a three-term run.

    With ``extended`` the trailing row holds the closing norm rho_{m+1},
    giving the (m+1) x m matrix of the v-side relation A V_m = V_{m+1} H.
    """
    m = m if m is not None else proc.j
    rows = m + 1 if extended else m
    H = QDenseMatrix.zeros(rows, m)
    for i in range(m):
        H.set_entry(i, i, proc.alphas[i])
        if i + 1 < m:
            H.set_entry(i, i + 1, proc.taus[i])
        if i + 1 < rows:
            H.set_entry(i + 1, i, Quaternion(proc.rhos[i]))
    return H


def assemble_tridiag_w(proc: ThreeTermBio, m: int | None = None,
                       extended: bool = True) -> QDenseMatrix:
    """The w-side tridiagonal counterpart (alpha-bar diagonal).

    Superdiagonal entries are eps_l sigma_{l-1}^{-*} sigma_l^*; together with
    the diagonal Gamma scaling this reproduces the w recurrence coefficients.
    """
    m = m if m is not None else proc.j
    rows = m + 1 if extended else m
    Hb = QDenseMatrix.zeros(rows, m)
    for i in range(m):
        Hb.set_entry(i, i, proc.alpha_bars[i])
        if i + 1 < m:
            ell = i + 2  # column index in 1-based terms
            tau_bar = (proc.sigmas[ell - 2].conj_inverse()
                       * proc.sigmas[ell - 1].conj()) * proc.epss[ell - 2]
            Hb.set_entry(i, i + 1, tau_bar)
        if i + 1 < rows:
            Hb.set_entry(i + 1, i, Quaternion(proc.rhos[i]))
    return Hb


def assemble_lower_bidiag(proc: CoupledTwoTermBio, m: int | None = None,
                          extended: bool = True) -> QDenseMatrix:
    m = m if m is not None else proc.j
    rows = m + 1 if extended else m
    L = QDenseMatrix.zeros(rows, m)
    for i in range(m):
        L.set_entry(i, i, proc.tau1s[i])
        if i + 1 < rows:
            L.set_entry(i + 1, i, Quaternion(proc.rhos[i]))
    return L


def assemble_unit_upper_bidiag(proc: CoupledTwoTermBio,
                               m: int | None = None) -> QDenseMatrix:
    m = m if m is not None else proc.j
    U = QDenseMatrix.identity(m)
    for i in range(1, m):
        U.set_entry(i - 1, i, proc.mu1s[i])
    return U


def gamma_factors(rhos, epss, m: int) -> np.ndarray:
    """Real scalings s_1..s_m: s_1 = 1, s_i = s_{i-1} rho_i / eps_i."""
    s = np.ones(m)
    for i in range(1, m):
        s[i] = s[i - 1] * rhos[i - 1] / epss[i - 1]
    return s


def bio_relation_residuals(A, proc: ThreeTermBio, m: int | None = None) -> dict:
    """Frobenius-norm residuals of the four defining relations of the process.

    Requires a run with ``keep_basis=True``.  Returns the deviations of
    W*V from diag(sigma), of A V_m from V_{m+1} H, of A* W_m from the
    Gamma-scaled w-side relation, and of W* A V from D H.
    """
    if not proc.keep_basis:
        raise ValueError("process must be run with keep_basis=True")
    m = m if m is not None else proc.j
    if m < 1 or m > proc.j:
        raise ValueError(f"m must be in 1..{proc.j}")
    V = QDenseMatrix.from_columns(proc.vs[:m])
    V1 = QDenseMatrix.from_columns(proc.vs[:m + 1])
    W = QDenseMatrix.from_columns(proc.ws[:m])
    W1 = QDenseMatrix.from_columns(proc.ws[:m + 1])
    D = QDenseMatrix.zeros(m, m)
    for i in range(m):
        D.set_entry(i, i, proc.sigmas[i])
    H_ext = assemble_tridiag(proc, m)
    H_sq = assemble_tridiag(proc, m, extended=False)
    Hb_ext = assemble_tridiag_w(proc, m)

    r_wv = (W.adjoint() @ V - D).frobenius_norm()

    AV = QDenseMatrix.from_columns([A.apply(V.column(j)) for j in range(m)])
    r_av = (AV - V1 @ H_ext).frobenius_norm()

    s = gamma_factors(proc.rhos, proc.epss, m + 1)
    scaled = Hb_ext.copy()
    for i in range(m + 1):
        for j in range(m):
            q = scaled.entry(i, j) * (s[j] / s[i])
            scaled.set_entry(i, j, q)
    AW = QDenseMatrix.from_columns([A.apply_adjoint(W.column(j)) for j in range(m)])
    r_aw = (AW - W1 @ scaled).frobenius_norm()

    r_wav = (W.adjoint() @ AV - D @ H_sq).frobenius_norm()
    return {"wv_minus_diag": r_wv, "av_minus_vh": r_av,
            "aw_minus_w_scaled": r_aw, "wav_minus_dh": r_wav}


def a_biorth_matrix(proc: CoupledTwoTermBio, k: int | None = None) -> QDenseMatrix:
    """Matrix of cross terms <A p_c, q_r>; diagonal = ell, off-diagonal ~ 0."""
    if not proc.keep_basis:
        raise ValueError("process must be run with keep_basis=True")
    k = k if k is not None else len(proc.aps)
    G = QDenseMatrix.zeros(k, k)
    for c in range(k):
        for r in range(k):
            G.set_entry(r, c, proc.aps[c].inner(proc.qs[r]))
    return G
