"""Quaternion linear operators: sparse CSR, channel-scaled, Kronecker blur.

Each operator applies A and A* without ever forming a 4n x 4n real matrix;
the channel-scaled form is one entrywise quaternion scaling plus four real
sparse matvecs, and the Kronecker blur is two small dense products per
component.
"""

import numpy as np
from scipy import sparse

from qkrylov import (
    QVector, QSparseMatrix, ChannelScaled, KronToeplitz, Quaternion,
)

rng = np.random.default_rng(1)

# a quaternion CSR matrix: shared pattern, four value channels
A0 = sparse.random(200, 200, density=0.05, random_state=0, format="csr")
A0 = A0 + sparse.identity(200)
A = ChannelScaled(A0, coeffs=(1.0, 2.0, -1.5, 0.5))
x = QVector(rng.normal(size=(200, 4)))
y = QVector(rng.normal(size=(200, 4)))

# adjoint consistency <Ax, y> = <x, A*y> is the operator contract
lhs = A.apply(x).inner(y)
rhs = x.inner(A.apply_adjoint(y))
print("channel-scaled adjoint consistency:", abs(lhs - rhs))

# materialized CSR agrees with the implicit form
sp = A.to_sparse()
print("explicit CSR deviation:", (A.apply(x) - sp.apply(x)).norm())
print("nnz per channel:", sp.nnz)

# Kronecker blur on a 16x16 "image" (vector length 256)
n = 16
idx = np.arange(n)
band = np.abs(idx[:, None] - idx[None, :])
B1 = np.exp(-band.astype(float) ** 2 / 2.0)
B2 = np.where(band < 3, 1.0 / 5.0, 0.0)
K = KronToeplitz(B1, B2)
v = QVector(rng.normal(size=(n * n, 4)))
lhs = K.apply(v).inner(y := QVector(rng.normal(size=(n * n, 4))))
rhs = v.inner(K.apply_adjoint(y))
print("kronecker adjoint consistency:", abs(lhs - rhs))

dense = np.kron(B1, B2)
direct = np.column_stack([dense @ v.data[:, c] for c in range(4)])
print("matches explicit kronecker product:",
      np.abs(K.apply(v).data - direct).max())
