"""Structure-preserving fractional discrete exterior calculus on 3D
regular cubical complexes.

The package assembles the fractional discrete exterior derivatives

    D_p^alpha = dI_{p+1}^{1-alpha} D_p (dI_p^{1-alpha})^{-1},

which satisfy the exact-sequence property D_{p+1}^alpha D_p^alpha = 0 to
roundoff, and provides the continuous fractional-vector-calculus oracles
(Caputo/Riemann-Liouville partial derivatives, de Rham maps) needed to
measure their convergence.
"""

from .fraccalc import (
    FracOrderError,
    QuadratureSpec,
    SingularityError,
    caputo_partial,
    caputo_partial_batch,
    gamma_fn,
    rl_integral_1d,
    rl_integral_batch,
    rl_partial,
    rl_partial_batch,
)
from .forms import (
    FIELD_NAMES,
    FormSpec,
    MissingPartialError,
    continuous_d,
    continuous_d_alpha,
    de_rham,
    get_field,
    polynomial_form,
    rms_error_cochain,
)
from .grid import Grid3, InvalidGridError, build_grid, incidence
from .harness import (
    ExactnessError,
    ExperimentConfig,
    ResultRow,
    SparsityMismatchError,
    expected_sparsity,
    run_alpha_sweep,
    run_convergence,
    run_exactness,
    run_sparsity_audit,
    run_variants,
)
from .operators import (
    BoundaryTraceError,
    OperatorSet,
    apply_fdec,
    apply_fdec_variant,
    assemble_B,
    assemble_M,
    assemble_V,
    assemble_dI,
    assemble_drlD,
    fractional_de_rham,
    kernel_matrix_1d,
    operator_metadata,
)
from .sparsekit import SingularMatrixError, SparseStructureError

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # fraccalc
    "FracOrderError",
    "SingularityError",
    "QuadratureSpec",
    "gamma_fn",
    "rl_integral_1d",
    "rl_integral_batch",
    "caputo_partial",
    "caputo_partial_batch",
    "rl_partial",
    "rl_partial_batch",
    # grid
    "Grid3",
    "InvalidGridError",
    "build_grid",
    "incidence",
    # forms
    "FormSpec",
    "MissingPartialError",
    "FIELD_NAMES",
    "get_field",
    "polynomial_form",
    "de_rham",
    "continuous_d",
    "continuous_d_alpha",
    "rms_error_cochain",
    # operators
    "OperatorSet",
    "BoundaryTraceError",
    "kernel_matrix_1d",
    "assemble_B",
    "assemble_M",
    "assemble_V",
    "assemble_dI",
    "assemble_drlD",
    "apply_fdec",
    "apply_fdec_variant",
    "fractional_de_rham",
    # harness
    "ExperimentConfig",
    "ResultRow",
    "ExactnessError",
    "SparsityMismatchError",
    "run_convergence",
    "run_alpha_sweep",
    "run_exactness",
    "run_variants",
    "run_sparsity_audit",
    # sparsekit
    "SparseStructureError",
    "SingularMatrixError",
]
