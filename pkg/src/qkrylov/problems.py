"""Experiment problem constructors and restoration quality metrics.

Three families:

* channel-scaled sparse systems: a real matrix replicated onto the four
  quaternion channels with fixed coefficients, random right-hand side;
* chaotic-signal filtering: a quaternion Toeplitz system relating a noisy
  delayed three-channel signal to its target, with the signal produced by
  integrating the Chen attractor;
* color-image deblurring: Kronecker products of banded Toeplitz blurs
  acting on vectorized images, single channel or all four channels.

Plus a convection-diffusion stencil generator used for the preconditioning
benchmarks, and PSNR / SSIM / relative-error metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .quat import QVector, QDenseMatrix
from .operators import QLinearOperator, DenseOperator, ChannelScaled, KronToeplitz
from .images import ColorImage

__all__ = [
    "Problem",
    "Trajectory",
    "gen_example1",
    "chen_rk4",
    "filter_matrix",
    "build_filter_system",
    "build_blur_single",
    "build_blur_multi",
    "blur_problem",
    "gen_convection_diffusion",
    "psnr",
    "ssim",
    "rel_error",
]

EXAMPLE1_COEFFS = (1.0, 2.0, -1.5, 0.5)


@dataclass
class Problem:
    """A quaternion linear system, optionally with known ground truth."""

    operator: QLinearOperator
    b: QVector
    truth: QVector | None = None
    label: str = ""

    def __post_init__(self):
        if self.operator.shape[0] != self.operator.shape[1]:
            raise ValueError(f"operator must be square, got {self.operator.shape}")
        if self.b.n != self.operator.shape[0]:
            raise ValueError("right-hand side length does not match the operator")


@dataclass
class Trajectory:
    """Samples of a 3-d signal at uniform step h over [0, T]."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __len__(self):
        return self.t.size


def gen_example1(A0, coeffs=EXAMPLE1_COEFFS, seed: int = 0,
                 label: str = "") -> Problem:
    """Channel-scaled system from a real sparse matrix.

    A = c0*A0 + c1*A0 i + c2*A0 j + c3*A0 k with the default coefficients
    (1, 2, -1.5, 0.5); all four components of b are uniform on [0, 1] from
    the seeded generator (same seed, bit-identical b).
    """
    A0 = sparse.csr_matrix(A0)
    op = ChannelScaled(A0, coeffs)
    rng = np.random.default_rng(seed)
    b = QVector(rng.uniform(0.0, 1.0, size=(A0.shape[0], 4)))
    return Problem(op, b, label=label or f"channel-scaled n={A0.shape[0]}")


def chen_rk4(T: float, h: float = 1e-3, init=(1.0, 1.0, 1.0),
             params=(35.0, 3.0, 28.0)) -> Trajectory:
    """Integrate the Chen attractor with classical fixed-step RK4.

    dx/dt = a(y - x); dy/dt = (c - a)x - xz + by; dz/dt = xy - bz with the
    usual chaotic parameters a=35, b=3, c=28.  Produces floor(T/h)+1
    samples; raises on divergence (non-finite state).
    """
    if h <= 0 or T < h:
        raise ValueError("need h > 0 and T >= h")
    a, b, c = params

    def f(s):
        x, y, z = s
        return np.array([a * (y - x), (c - a) * x - x * z + b * y, x * y - b * z])

    steps = int(math.floor(T / h + 1e-12))
    out = np.empty((steps + 1, 3))
    out[0] = init
    s = np.array(init, dtype=np.float64)
    for k in range(steps):
        k1 = f(s)
        k2 = f(s + 0.5 * h * k1)
        k3 = f(s + 0.5 * h * k2)
        k4 = f(s + h * k3)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(s)):
            raise FloatingPointError(f"trajectory diverged at step {k + 1}")
        out[k + 1] = s
    t = np.arange(steps + 1) * h
    return Trajectory(t, out[:, 0], out[:, 1], out[:, 2])


def filter_matrix(traj: Trajectory, p: int, q: int, noise_amp: float = 0.0,
                  seed: int = 0):
    """Assemble the (q+1) x (p+1) filter matrix and the target samples.

    The target signal y(s) carries the trajectory channels on (i, j, k); the
    input x(s) is the target delayed by one sample plus uniform noise in
    [-noise_amp, noise_amp] on all four components.  Row i, column j holds
    x(t0 + i - j), so entries are constant along diagonals.
    """
    n_samples = len(traj)
    t0 = p + 1  # earliest row time with all delayed inputs available
    if t0 + q > n_samples - 1:
        raise ValueError(
            f"trajectory too short: need at least {p + q + 2} samples, "
            f"got {n_samples}")
    rng = np.random.default_rng(seed)
    hi = t0 + q + 1
    xs = np.zeros((hi, 4))
    xs[1:, 1] = traj.x[:hi - 1]
    xs[1:, 2] = traj.y[:hi - 1]
    xs[1:, 3] = traj.z[:hi - 1]
    xs += rng.uniform(-noise_amp, noise_amp, size=(hi, 4))
    X = np.empty((q + 1, p + 1, 4))
    for i in range(q + 1):
        for j in range(p + 1):
            X[i, j] = xs[t0 + i - j]
    y = np.zeros((q + 1, 4))
    y[:, 1] = traj.x[t0:t0 + q + 1]
    y[:, 2] = traj.y[t0:t0 + q + 1]
    y[:, 3] = traj.z[t0:t0 + q + 1]
    return QDenseMatrix(X), QVector(y)


def build_filter_system(traj: Trajectory, p: int, q: int,
                        noise_amp: float = 0.0, seed: int = 0) -> Problem:
    """Square filter identification system (requires p == q)."""
    if p != q:
        raise ValueError("solvable filter systems are square; need p == q")
    X, y = filter_matrix(traj, p, q, noise_amp, seed)
    return Problem(DenseOperator(X), y, label=f"chen-filter n={p + 1}")


def build_blur_single(n: int, sigma: float = 1.0, r: int = 10, s: int = 7):
    """Banded Toeplitz blur pair: Gaussian within bandwidth r, flat average.

    B1[i, j] = exp(-(i-j)^2 / (2 sigma^2)) / (sigma sqrt(2 pi)) for
    |i - j| <= r, else 0.  B2 is the width-(2s-1) moving average,
    B2[i, j] = 1/(2s - 1) for |i - j| < s, so interior rows sum to 1 and
    s = 1 gives the identity.
    """
    idx = np.arange(n)
    d = idx[:, None] - idx[None, :]
    B1 = np.exp(-d.astype(np.float64) ** 2 / (2.0 * sigma * sigma)) \
        / (sigma * math.sqrt(2.0 * math.pi))
    B1[np.abs(d) > r] = 0.0
    B2 = np.where(np.abs(d) < s, 1.0 / (2.0 * s - 1.0), 0.0)
    return B1, B2


def build_blur_multi(n: int, s: int = 3) -> KronToeplitz:
    """Four-channel blur A = A0 (1 + i - j - k) with A0 the flat-band kron square."""
    _, B2 = build_blur_single(n, s=s)
    return KronToeplitz(B2, B2, coeffs=(1.0, 1.0, -1.0, -1.0))


def blur_problem(image: ColorImage, mode: str = "single", sigma: float = 1.0,
                 r: int = 10, s: int = 7) -> Problem:
    """Deblurring system b = A vec(image) with known ground truth."""
    n = image.size
    if mode == "single":
        B1, B2 = build_blur_single(n, sigma=sigma, r=r, s=s)
        op = KronToeplitz(B1, B2, coeffs=(1.0, 0.0, 0.0, 0.0))
    elif mode == "multi":
        op = build_blur_multi(n, s=s)
    else:
        raise ValueError(f"mode must be 'single' or 'multi', got '{mode}'")
    truth = image.to_qvector()
    b = op.apply(truth)
    return Problem(op, b, truth=truth, label=f"deblur-{mode} n={n}")


def gen_convection_diffusion(grid: int = 20, conv: float = 1.0,
                             shift: float = 0.0, flow: str = "uniform",
                             coeffs=EXAMPLE1_COEFFS, seed: int = 0) -> Problem:
    """Channel-scaled 2-d convection-diffusion 5-point stencil on a grid^2 mesh.

    Diffusion gives the symmetric (4, -1, ...) stencil, softened by an
    optional reaction ``shift`` on the diagonal.  ``flow="uniform"`` skews
    only the east/west couplings by conv/2; ``flow="rotating"`` uses the
    recirculating wind (y - 1/2, 1/2 - x) scaled by conv, the standard
    strongly nonsymmetric instance.
    """
    if flow not in ("uniform", "rotating"):
        raise ValueError(f"flow must be 'uniform' or 'rotating', got '{flow}'")
    n = grid * grid
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    for i in range(grid):
        for j in range(grid):
            k = i * grid + j
            if flow == "rotating":
                x = (j + 0.5) / grid
                y = (i + 0.5) / grid
                u = conv * (y - 0.5)
                v = conv * (0.5 - x)
            else:
                u, v = conv, 0.0
            add(k, k, 4.0 - shift)
            if i > 0:
                add(k, k - grid, -1.0 - v / 2.0)
            if i < grid - 1:
                add(k, k + grid, -1.0 + v / 2.0)
            if j > 0:
                add(k, k - 1, -1.0 - u / 2.0)
            if j < grid - 1:
                add(k, k + 1, -1.0 + u / 2.0)
    A0 = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    rng = np.random.default_rng(seed)
    b = QVector(rng.uniform(0.0, 1.0, size=(n, 4)))
    return Problem(ChannelScaled(A0, coeffs), b,
                   label=f"convection-diffusion n={n}")


def psnr(x_hat: QVector, x: QVector, d: float = 255.0) -> float:
    """Peak signal-to-noise ratio 10 log10(3 n^2 d^2 / ||x_hat - x||^2) in dB.

    Vectors are vectorized n x n images (length n^2); identical inputs give
    +inf.
    """
    if x_hat.n != x.n:
        raise ValueError("length mismatch")
    err2 = float(np.sum((x_hat.data - x.data) ** 2))
    if err2 == 0.0:
        return math.inf
    return 10.0 * math.log10(3.0 * x_hat.n * d * d / err2)


def ssim(x_hat: QVector, x: QVector, L: float = 255.0) -> float:
    """Single-window structural similarity over all four quaternion channels.

    Global means, variances and covariance of the concatenated component
    data, with c1 = (0.01 L)^2 and c2 = (0.03 L)^2.
    """
    if x_hat.n != x.n:
        raise ValueError("length mismatch")
    a = x_hat.data.ravel()
    b = x.data.ravel()
    mu1, mu2 = a.mean(), b.mean()
    var1 = a.var()
    var2 = b.var()
    cov = float(np.mean((a - mu1) * (b - mu2)))
    c1 = (0.01 * L) ** 2
    c2 = (0.03 * L) ** 2
    return ((2.0 * mu1 * mu2 + c1) * (2.0 * cov + c2)
            / ((mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2)))


def rel_error(x_hat: QVector, x: QVector) -> float:
    """||x_hat - x|| / ||x_hat|| (restoration error against the truth x_hat)."""
    return (x_hat - x).norm() / x_hat.norm()
