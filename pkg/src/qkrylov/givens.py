"""Generalized quaternion Givens rotations and progressive QR updates.

A rotation is a unitary 2x2 quaternion block G built from a pair
(alpha, rho) with rho a nonnegative real; G* applied from the left
annihilates rho and leaves a positive real in its place.  The progressive
factorizations keep only the last one or two rotations, never the full Q:
``TridiagQR`` reduces the tridiagonal recurrence matrix column by column,
``BidiagQR`` does the same for the lower bidiagonal matrix of the coupled
two-term path.  Both carry the rotated right-hand side, whose trailing
entry magnitude is the quasi-residual norm.
"""

from __future__ import annotations

from .quat import Quaternion

__all__ = ["GivensRotation", "make_givens", "TridiagQR", "BidiagQR"]


class GivensRotation:
    """Active 2x2 block [[g11, g12], [g21, g22]] of a plane rotation."""

    __slots__ = ("g11", "g12", "g21", "g22")

    def __init__(self, g11, g12, g21, g22):
        self.g11 = g11
        self.g12 = g12
        self.g21 = g21
        self.g22 = g22

    def premul_adjoint(self, a: Quaternion, b: Quaternion):
        """G* [a; b] -> (top, bottom)."""
        return (self.g11.conj() * a + self.g21.conj() * b,
                self.g12.conj() * a + self.g22.conj() * b)

    def unitarity_defect(self) -> float:
        """Frobenius norm of G*G - I."""
        e11 = self.g11.conj() * self.g11 + self.g21.conj() * self.g21 - 1.0
        e12 = self.g11.conj() * self.g12 + self.g21.conj() * self.g22
        e21 = self.g12.conj() * self.g11 + self.g22.conj() * self.g21
        e22 = self.g12.conj() * self.g12 + self.g22.conj() * self.g22 - 1.0
        return (e11.abs2() + e12.abs2() + e21.abs2() + e22.abs2()) ** 0.5


def make_givens(alpha: Quaternion, rho: float) -> GivensRotation:
    """Rotation G with G*[alpha; rho] = [t; 0], t = sqrt(|alpha|^2 + rho^2) > 0.

    Parameters
    ----------
    alpha : Quaternion
        Rotated diagonal entry.
    rho : float
        Subdiagonal entry; a norm, so rho >= 0.

    Raises
    ------
    ValueError
        If both entries vanish (t = 0) or rho < 0.
    """
    rho = float(rho)
    if rho < 0.0:
        raise ValueError(f"rho must be a nonnegative real, got {rho}")
    abs_alpha = abs(alpha)
    t = (abs_alpha * abs_alpha + rho * rho) ** 0.5
    if t == 0.0:
        raise ValueError("degenerate rotation: both entries are zero")
    g11 = alpha / t
    g21 = Quaternion(rho / t)
    if abs_alpha <= rho:
        # g21 is a positive real here (rho >= |alpha| and t > 0 force rho > 0)
        g12 = Quaternion(rho / t)
        g22 = -g11.conj()
    else:
        g22 = Quaternion(abs_alpha / t)
        # g11/|g11| is the unit phase alpha/|alpha|
        g12 = alpha * (-rho / (abs_alpha * t))
    return GivensRotation(g11, g12, g21, g22)


class TridiagQR:
    """Progressive QR of the growing tridiagonal recurrence matrix.

    Feeding column j (entries tau_j, alpha_j above/on the diagonal and
    rho_{j+1} below) applies the two stored rotations, creates the new one,
    and rotates the right-hand side.  The upper factor has three diagonals:
    eta1 (positive real), eta2, eta3.
    """

    def __init__(self, beta: float, record_rotations: bool = False):
        self.gamma_next = Quaternion(float(beta))  # pending gamma_{j+1}
        self._rot_prev = None
        self._rot_prev2 = None
        self.step = 0
        self.g12_abs = []
        self.rotations = [] if record_rotations else None

    @property
    def quasi_residual(self) -> float:
        """|gamma_{j+1}| = min_z || beta e1 - H_{j+1,j} z ||_2 after j steps."""
        return abs(self.gamma_next)

    def update(self, tau_j: Quaternion, alpha_j: Quaternion, rho_next: float):
        """Returns (eta3, eta2, eta1, gamma_j) for column j = current step."""
        self.step += 1
        eta3 = Quaternion()
        top = tau_j
        if self._rot_prev2 is not None:
            eta3, top = self._rot_prev2.premul_adjoint(Quaternion(), tau_j)
        eta2 = Quaternion()
        alpha_hat = alpha_j
        if self._rot_prev is not None:
            eta2, alpha_hat = self._rot_prev.premul_adjoint(top, alpha_j)
        rot = make_givens(alpha_hat, rho_next)
        eta1_q = rot.g11.conj() * alpha_hat + rot.g21.conj() * Quaternion(rho_next)
        gamma_j, self.gamma_next = rot.premul_adjoint(self.gamma_next, Quaternion())
        self.g12_abs.append(abs(rot.g12))
        if self.rotations is not None:
            self.rotations.append(rot)
        self._rot_prev2 = self._rot_prev
        self._rot_prev = rot
        return eta3, eta2, eta1_q.w, gamma_j


class BidiagQR:
    """Progressive QR of the growing lower bidiagonal recurrence matrix.

    Columns carry (tau1_j on the diagonal, rho_{j+1} below); only the single
    stored rotation touches a new column, so the upper factor has two
    diagonals: kappa1 (positive real) and kappa2.
    """

    def __init__(self, beta: float, record_rotations: bool = False):
        self.gamma_next = Quaternion(float(beta))
        self._rot_prev = None
        self.step = 0
        self.g12_abs = []
        self.rotations = [] if record_rotations else None

    @property
    def quasi_residual(self) -> float:
        return abs(self.gamma_next)

    def update(self, tau1_j: Quaternion, rho_next: float):
        """Returns (kappa2, kappa1, gamma_j) for column j = current step."""
        self.step += 1
        kappa2 = Quaternion()
        diag = tau1_j
        if self._rot_prev is not None:
            kappa2, diag = self._rot_prev.premul_adjoint(Quaternion(), tau1_j)
        rot = make_givens(diag, rho_next)
        kappa1_q = rot.g11.conj() * diag + rot.g21.conj() * Quaternion(rho_next)
        gamma_j, self.gamma_next = rot.premul_adjoint(self.gamma_next, Quaternion())
        self.g12_abs.append(abs(rot.g12))
        if self.rotations is not None:
            self.rotations.append(rot)
        self._rot_prev = rot
        return kappa2, kappa1_q.w, gamma_j
