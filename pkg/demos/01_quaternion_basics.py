"""Quaternion scalars, vectors, and the real-counterpart contract.

Everything downstream rests on two facts demonstrated here: Hamilton
multiplication is non-commutative, and working componentwise on
quaternions is exactly equivalent to multiplying 4x-size real-counterpart
matrices (we only ever pay for the first block column).
"""

import numpy as np

from qkrylov import (
    Quaternion, QVector, QDenseMatrix,
    real_counterpart, first_block_column, from_real_counterpart,
)

i = Quaternion(0, 1, 0, 0)
j = Quaternion(0, 0, 1, 0)
k = Quaternion(0, 0, 0, 1)

print("unit table:  i*j =", i * j, "   j*i =", j * i)
print("(1+i)(1+j) =", Quaternion(1, 1, 0, 0) * Quaternion(1, 0, 1, 0))

q = Quaternion(1, 1, 1, 1)
print("\n|1+i+j+k| =", abs(q), "  inverse =", q.inverse())
print("q * q^-1  =", q * q.inverse())

# right-module inner product: the conjugate rides on the second argument
x = QVector.from_quaternions([Quaternion(1, 1, 0, 0), j])
y = QVector.from_quaternions([Quaternion(1), k])
print("\n<x, y> =", x.inner(y), "   <y, x> =", y.inner(x), " (conjugates)")

# the real counterpart is a multiplicative homomorphism...
rng = np.random.default_rng(0)
A = QDenseMatrix(rng.normal(size=(3, 3, 4)))
B = QDenseMatrix(rng.normal(size=(3, 3, 4)))
err = np.abs(real_counterpart(A) @ real_counterpart(B)
             - real_counterpart(A @ B)).max()
print(f"\n||R(A)R(B) - R(AB)||_max = {err:.2e}")

# ...and matvecs only ever need the first block column
v = QVector(rng.normal(size=(3, 4)))
err = np.abs(real_counterpart(A) @ first_block_column(v)
             - first_block_column(A.matvec(v))).max()
print(f"first-block-column matvec deviation = {err:.2e}")

back = from_real_counterpart(real_counterpart(A))
print("round trip exact:", np.array_equal(back.data, A.data))
