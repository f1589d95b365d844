"""Quaternion scalars, vectors, and small dense matrices.

Everything is stored componentwise in float64: a quaternion is
q = w + x*i + y*j + z*k with i^2 = j^2 = k^2 = ijk = -1.  Vectors live in a
right module, so scalar coefficients always multiply from the right and
``v * a`` means entrywise ``v_i * a``.  Inner products conjugate the second
argument: <x, y> = sum conj(y_i) * x_i.

The 4m x 4n real-counterpart representation (and its first block column) is
provided for oracles and tests only; solver kernels work componentwise and
never build it.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Quaternion",
    "QVector",
    "QDenseMatrix",
    "real_counterpart",
    "from_real_counterpart",
]


class Quaternion:
    """Scalar quaternion with components (w, x, y, z)."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        self.w = float(w)
        self.x = float(x)
        self.y = float(y)
        self.z = float(z)

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        return cls(a[0], a[1], a[2], a[3])

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def abs2(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self) -> float:
        return math.sqrt(self.abs2())

    def inverse(self) -> "Quaternion":
        """q^{-1} = conj(q) / |q|^2; raises on the zero quaternion."""
        n2 = self.abs2()
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return Quaternion(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    def conj_inverse(self) -> "Quaternion":
        """q^{-*} = q / |q|^2."""
        n2 = self.abs2()
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return Quaternion(self.w / n2, self.x / n2, self.y / n2, self.z / n2)

    def is_zero(self) -> bool:
        return self.w == 0.0 and self.x == 0.0 and self.y == 0.0 and self.z == 0.0

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self.w + other.w, self.x + other.x,
                              self.y + other.y, self.z + other.z)
        if isinstance(other, (int, float)):
            return Quaternion(self.w + other, self.x, self.y, self.z)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self.w - other.w, self.x - other.x,
                              self.y - other.y, self.z - other.z)
        if isinstance(other, (int, float)):
            return Quaternion(self.w - other, self.x, self.y, self.z)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(other - self.w, -self.x, -self.y, -self.z)
        return NotImplemented

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            a, b = self, other
            return Quaternion(
                a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
            )
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other,
                              self.y * other, self.z * other)
        return NotImplemented

    def __rmul__(self, other):
        # real scalars commute; quaternion * quaternion goes through __mul__
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other,
                              self.y * other, self.z * other)
        return NotImplemented

    def __truediv__(self, other):
        # division by a quaternion is ambiguous (left vs right); use inverse()
        if isinstance(other, (int, float)):
            return Quaternion(self.w / other, self.x / other,
                              self.y / other, self.z / other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, Quaternion):
            return (self.w == other.w and self.x == other.x
                    and self.y == other.y and self.z == other.z)
        if isinstance(other, (int, float)):
            return self.w == other and self.x == 0.0 and self.y == 0.0 and self.z == 0.0
        return NotImplemented

    def __hash__(self):
        return hash((self.w, self.x, self.y, self.z))

    def __repr__(self):
        return f"Quaternion({self.w:g}, {self.x:g}, {self.y:g}, {self.z:g})"

    def right_mult_matrix(self) -> np.ndarray:
        """4x4 real M with (q*a) components = q components (row) @ M, a = self."""
        a0, a1, a2, a3 = self.w, self.x, self.y, self.z
        return np.array([
            [a0, a1, a2, a3],
            [-a1, a0, -a3, a2],
            [-a2, a3, a0, -a1],
            [-a3, -a2, a1, a0],
        ])

    def left_mult_matrix(self) -> np.ndarray:
        """4x4 real L with (a*q) components = q components (row) @ L, a = self."""
        a0, a1, a2, a3 = self.w, self.x, self.y, self.z
        return np.array([
            [a0, a1, a2, a3],
            [-a1, a0, a3, -a2],
            [-a2, -a3, a0, a1],
            [-a3, a2, -a1, a0],
        ])


ZERO = Quaternion()
ONE = Quaternion(1.0)


def _inner_components(xd: np.ndarray, yd: np.ndarray) -> Quaternion:
    # <x, y> = sum conj(y_i) x_i over (n, 4) component arrays
    x0, x1, x2, x3 = xd[:, 0], xd[:, 1], xd[:, 2], xd[:, 3]
    y0, y1, y2, y3 = yd[:, 0], yd[:, 1], yd[:, 2], yd[:, 3]
    return Quaternion(
        np.dot(y0, x0) + np.dot(y1, x1) + np.dot(y2, x2) + np.dot(y3, x3),
        np.dot(y0, x1) - np.dot(y1, x0) - np.dot(y2, x3) + np.dot(y3, x2),
        np.dot(y0, x2) + np.dot(y1, x3) - np.dot(y2, x0) - np.dot(y3, x1),
        np.dot(y0, x3) - np.dot(y1, x2) + np.dot(y2, x1) - np.dot(y3, x0),
    )


class QVector:
    """Quaternion vector of length n, stored as an (n, 4) float64 array."""

    __slots__ = ("data",)

    def __init__(self, data):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != 4:
            raise ValueError(f"QVector expects an (n, 4) array, got {data.shape}")
        self.data = np.ascontiguousarray(data)

    @classmethod
    def zeros(cls, n: int) -> "QVector":
        return cls(np.zeros((n, 4)))

    @classmethod
    def from_components(cls, w, x, y, z) -> "QVector":
        return cls(np.column_stack([w, x, y, z]))

    @classmethod
    def from_real(cls, v) -> "QVector":
        v = np.asarray(v, dtype=np.float64).ravel()
        d = np.zeros((v.size, 4))
        d[:, 0] = v
        return cls(d)

    @classmethod
    def from_quaternions(cls, qs) -> "QVector":
        return cls(np.array([[q.w, q.x, q.y, q.z] for q in qs]))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, i: int) -> Quaternion:
        return Quaternion.from_array(self.data[i])

    def __setitem__(self, i: int, q: Quaternion):
        self.data[i] = (q.w, q.x, q.y, q.z)

    def copy(self) -> "QVector":
        return QVector(self.data.copy())

    def norm(self) -> float:
        # ||x||_2 = sqrt(sum |x_i|^2): Frobenius norm of the component array
        return float(np.linalg.norm(self.data))

    def inner(self, other: "QVector") -> Quaternion:
        """<self, other> = sum conj(other_i) * self_i."""
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return _inner_components(self.data, other.data)

    def right_mul(self, a: Quaternion) -> "QVector":
        """Entrywise self_i * a (scalar from the right)."""
        return QVector(self.data @ a.right_mult_matrix())

    def left_mul(self, a: Quaternion) -> "QVector":
        """Entrywise a * self_i (scalar from the left)."""
        return QVector(self.data @ a.left_mult_matrix())

    def __mul__(self, a):
        if isinstance(a, Quaternion):
            return self.right_mul(a)
        if isinstance(a, (int, float)):
            return QVector(self.data * a)
        return NotImplemented

    def __rmul__(self, a):
        if isinstance(a, (int, float)):
            return QVector(self.data * a)
        return NotImplemented

    def __truediv__(self, a):
        if isinstance(a, (int, float)):
            return QVector(self.data / a)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, QVector):
            return QVector(self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, QVector):
            return QVector(self.data - other.data)
        return NotImplemented

    def __neg__(self):
        return QVector(-self.data)

    def conj(self) -> "QVector":
        d = self.data.copy()
        d[:, 1:] *= -1.0
        return QVector(d)

    def counterpart_column(self) -> np.ndarray:
        """First block column of R(x): the (4n,) stack [x_w; x_x; x_y; x_z]."""
        return self.data.T.reshape(-1).copy()

    @classmethod
    def from_counterpart_column(cls, col) -> "QVector":
        col = np.asarray(col, dtype=np.float64).ravel()
        if col.size % 4:
            raise ValueError("column length must be a multiple of 4")
        return cls(col.reshape(4, -1).T)

    def __repr__(self):
        return f"QVector(n={self.n})"


def _qmatmul_components(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Hamilton product of (m,k,4) @ (k,n,4) component stacks."""
    a0, a1, a2, a3 = A[..., 0], A[..., 1], A[..., 2], A[..., 3]
    b0, b1, b2, b3 = B[..., 0], B[..., 1], B[..., 2], B[..., 3]
    c0 = a0 @ b0 - a1 @ b1 - a2 @ b2 - a3 @ b3
    c1 = a0 @ b1 + a1 @ b0 + a2 @ b3 - a3 @ b2
    c2 = a0 @ b2 - a1 @ b3 + a2 @ b0 + a3 @ b1
    c3 = a0 @ b3 + a1 @ b2 - a2 @ b1 + a3 @ b0
    return np.stack([c0, c1, c2, c3], axis=-1)


class QDenseMatrix:
    """Dense m x n quaternion matrix, stored as an (m, n, 4) float64 array.

    Intended for small factors, assembled bases, and oracle checks; large
    systems go through the sparse/structured operators.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != 4:
            raise ValueError(f"QDenseMatrix expects (m, n, 4), got {data.shape}")
        self.data = np.ascontiguousarray(data)

    @classmethod
    def zeros(cls, m: int, n: int) -> "QDenseMatrix":
        return cls(np.zeros((m, n, 4)))

    @classmethod
    def identity(cls, n: int) -> "QDenseMatrix":
        d = np.zeros((n, n, 4))
        d[np.arange(n), np.arange(n), 0] = 1.0
        return cls(d)

    @classmethod
    def from_real(cls, M) -> "QDenseMatrix":
        M = np.asarray(M, dtype=np.float64)
        d = np.zeros(M.shape + (4,))
        d[..., 0] = M
        return cls(d)

    @classmethod
    def from_columns(cls, cols) -> "QDenseMatrix":
        return cls(np.stack([c.data for c in cols], axis=1))

    @property
    def shape(self):
        return self.data.shape[:2]

    def entry(self, i: int, j: int) -> Quaternion:
        return Quaternion.from_array(self.data[i, j])

    def set_entry(self, i: int, j: int, q: Quaternion):
        self.data[i, j] = (q.w, q.x, q.y, q.z)

    def column(self, j: int) -> QVector:
        return QVector(self.data[:, j, :].copy())

    def copy(self) -> "QDenseMatrix":
        return QDenseMatrix(self.data.copy())

    def adjoint(self) -> "QDenseMatrix":
        d = self.data.transpose(1, 0, 2).copy()
        d[:, :, 1:] *= -1.0
        return QDenseMatrix(d)

    def matmul(self, other: "QDenseMatrix") -> "QDenseMatrix":
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
        return QDenseMatrix(_qmatmul_components(self.data, other.data))

    def __matmul__(self, other):
        if isinstance(other, QDenseMatrix):
            return self.matmul(other)
        if isinstance(other, QVector):
            return self.matvec(other)
        return NotImplemented

    def matvec(self, x: QVector) -> QVector:
        if self.shape[1] != x.n:
            raise ValueError(f"shape mismatch: {self.shape} @ ({x.n},)")
        out = _qmatmul_components(self.data, x.data[:, None, :])
        return QVector(out[:, 0, :])

    def __add__(self, other):
        if isinstance(other, QDenseMatrix):
            return QDenseMatrix(self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, QDenseMatrix):
            return QDenseMatrix(self.data - other.data)
        return NotImplemented

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def __repr__(self):
        return f"QDenseMatrix(shape={self.shape})"


def real_counterpart(M) -> np.ndarray:
    """4m x 4n real counterpart of a quaternion scalar/vector/matrix.

    Layout (per block row): [M0 -M1 -M2 -M3; M1 M0 -M3 M2; M2 M3 M0 -M1;
    M3 -M2 M1 M0].  Satisfies R(AB) = R(A) R(B) and R(A*) = R(A)^T.
    """
    if isinstance(M, Quaternion):
        comps = M.to_array().reshape(1, 1, 4)
    elif isinstance(M, QVector):
        comps = M.data[:, None, :]
    elif isinstance(M, QDenseMatrix):
        comps = M.data
    else:
        comps = np.asarray(M, dtype=np.float64)
    m0, m1, m2, m3 = comps[..., 0], comps[..., 1], comps[..., 2], comps[..., 3]
    return np.block([
        [m0, -m1, -m2, -m3],
        [m1, m0, -m3, m2],
        [m2, m3, m0, -m1],
        [m3, -m2, m1, m0],
    ])


def first_block_column(M) -> np.ndarray:
    """The 4m x n first block column [M0; M1; M2; M3] of the counterpart."""
    if isinstance(M, Quaternion):
        return M.to_array().reshape(4, 1)
    if isinstance(M, QVector):
        return M.counterpart_column().reshape(4 * M.n, 1)
    comps = M.data if isinstance(M, QDenseMatrix) else np.asarray(M)
    return np.vstack([comps[..., 0], comps[..., 1], comps[..., 2], comps[..., 3]])


def from_real_counterpart(R) -> QDenseMatrix:
    """Inverse of real_counterpart; exact (reads the first block column)."""
    R = np.asarray(R, dtype=np.float64)
    m4, n4 = R.shape
    if m4 % 4 or n4 % 4:
        raise ValueError("counterpart dimensions must be multiples of 4")
    m, n = m4 // 4, n4 // 4
    d = np.stack([R[c * m:(c + 1) * m, 0:n] for c in range(4)], axis=-1)
    return QDenseMatrix(d)
