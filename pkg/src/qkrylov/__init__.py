"""Structure-preserving quaternion Krylov solvers.

Non-Hermitian quaternion linear systems A x = b are solved without the 4x
real-dimension expansion: all kernels work componentwise on (w, x, y, z)
float64 data, which is equivalent to propagating only the first block
columns of the real-counterpart representation.
"""

from .quat import (
    Quaternion,
    QVector,
    QDenseMatrix,
    real_counterpart,
    first_block_column,
    from_real_counterpart,
)
from .operators import (
    QLinearOperator,
    QSparseMatrix,
    DenseOperator,
    ChannelScaled,
    KronToeplitz,
    LeftPreconditioned,
)
from .mmio import read_matrix_market, MatrixMarketError
from .givens import GivensRotation, make_givens, TridiagQR, BidiagQR
from .bio import (
    BreakdownPolicy,
    LanczosBiorth,
    ThreeTermBio,
    CoupledTwoTermBio,
    restart,
    run_with_restarts,
    bio_relation_residuals,
)
from .precond import SsorPreconditioner, ssor_build
from .solvers import (
    SolveOptions,
    SolveReport,
    qbicg,
    qqmr3,
    qqmr2,
    pqqmr3,
    pqqmr2,
    SOLVERS,
    residual_envelope_ok,
)
from .problems import (
    Problem,
    Trajectory,
    gen_example1,
    chen_rk4,
    filter_matrix,
    build_filter_system,
    build_blur_single,
    build_blur_multi,
    blur_problem,
    gen_convection_diffusion,
    psnr,
    ssim,
    rel_error,
)
from .images import (
    ColorImage,
    read_ppm,
    write_ppm,
    read_pgm,
    write_pgm,
    read_qimg4,
    write_qimg4,
    bundled_image_path,
    synthetic_image,
)

__version__ = "0.1.0"
