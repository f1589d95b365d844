"""All five solvers on one random non-Hermitian quaternion system.

The quasi-minimal residual solvers damp the oscillations bicg is prone to;
the two-term variant additionally tends to be the cheaper of the two.  The
final answers are cross-checked against a dense real-counterpart solve.
"""

import numpy as np

from qkrylov import (
    QVector, QDenseMatrix, DenseOperator, SolveOptions,
    qbicg, qqmr3, qqmr2, pqqmr3, pqqmr2, residual_envelope_ok,
    real_counterpart, first_block_column,
)

rng = np.random.default_rng(3)
n = 60
data = rng.normal(size=(n, n, 4)) / np.sqrt(n)
data[np.arange(n), np.arange(n), 0] += 3.0
M = QDenseMatrix(data)
A = DenseOperator(M)
b = QVector(rng.normal(size=(n, 4)))

col = np.linalg.solve(real_counterpart(M), first_block_column(b))
x_star = QVector.from_counterpart_column(np.asarray(col).ravel())

opts = SolveOptions(tol=1e-9, record_history=True)
print(f"{'solver':>8s} {'iters':>6s} {'final rr':>10s} {'err vs direct':>14s}")
for name, solver in [("qbicg", qbicg), ("qqmr3", qqmr3), ("qqmr2", qqmr2),
                     ("pqqmr3", pqqmr3), ("pqqmr2", pqqmr2)]:
    rep = solver(A, b, opts=opts)
    err = (rep.x - x_star).norm() / x_star.norm()
    print(f"{name:>8s} {rep.iterations:6d} {rep.true_final_rr:10.2e} "
          f"{err:14.2e}   ({rep.termination})")

rep = qqmr2(A, b, opts=opts)
print("\nquasi-residual envelope ||r_m|| <= 1.1 sqrt(m+1) |gamma_{m+1}|:",
      residual_envelope_ok(rep))
print("first five (true rr, quasi rr) pairs:")
for rr, qr in list(zip(rep.residual_history, rep.quasi_history))[:5]:
    print(f"  {rr:.3e}  {qr:.3e}")
