"""Forward-mode derivatives of truncated SVDs and eigendecompositions.

Two routes to the same tangents: an explicit path that consumes the
discarded factors, and an iterative path that replaces them with deflated
shifted solves against the original matrix.  A finite-difference harness
cross-checks both against central differences on gauge-invariant
quantities.
"""

from .config import GradConfig
from .decomp import (
    EVD_PROVIDERS,
    SVD_PROVIDERS,
    FullEvd,
    FullSvd,
    SvdDiscarded,
    SvdKept,
    full_evd,
    full_svd,
    hermitian_jacobi_evd,
    jacobi_svd,
    orthonormal_complement,
    platform_evd,
    platform_svd,
    smalldim_evd,
    truncate_svd,
)
from .errors import (
    CmxFormatError,
    DegenerateCut,
    DegenerateSpectrum,
    NearSingularShift,
    NoConvergence,
    NonDiagonalizable,
    ShapeMismatch,
    TruncgradError,
    ZeroPivot,
)
from .krylov import projected_minres
from .matcore import (
    MatrixSeed,
    adjoint,
    cmat,
    frob,
    gen_matrix,
    hadamard,
    load_cmx,
    read_cmx,
    real_diag,
    save_cmx,
    write_cmx,
)
from .tevd import (
    EvdKept,
    EvdTangent,
    GaugeChoice,
    dlambda,
    dx1_block,
    dx2_sylvester,
    eig_gap_weights,
    fix_gauge,
    jvp_truncated_evd,
    truncate_evd,
)
from .tsvd import (
    SvdTangent,
    discarded_mixing,
    ds_kept,
    gap_weights_cross,
    gap_weights_kept,
    jvp_truncated_svd_explicit,
    kept_rotations,
    tall_correction,
    wide_correction,
)
from .tsvd_iter import (
    ShiftedSystem,
    gkl_partial_svd,
    jvp_truncated_svd_iterative,
    project_discarded,
    solve_sylvester_dense,
    solve_sylvester_projected,
)
from .verify import (
    FdReport,
    default_fd_step,
    fd_tangent,
    format_reports_text,
    phase_align,
    run_suite,
    serialize_reports,
)

__version__ = "0.1.0"
