"""Closed-form derivatives of eigenvalues and eigenprojections of polynomial
symmetric matrix fields, with finite-difference and brute-force checks."""
from .calculus import (
    EigenDerivativeContext,
    Expansion2,
    curve_deriv_lambda,
    dir_deriv_lambda,
    dir_deriv_proj,
    eigen_context,
    grad_lambda,
    grad_lambda_trace,
    hess_lambda,
    hess_lambda_trace,
    jac_deriv_proj,
    one_sided_sum_deriv,
    second_dir_lambda,
    taylor2_lambda,
)
from .diagnostics import check_equivalence_conditions, index_report, scan_constant_dimension
from .exceptions import (
    DegenerateGapError,
    DimensionError,
    FieldSpecError,
    InconsistentDerivativeError,
    NotSymmetricError,
    SpectralFieldError,
    UnstableTrackingError,
)
from .fieldspec import field_from_spec, field_to_spec, load_field, loads_field
from .oracle import FDConfig, SlopeFit, fd_dproj, fd_grad_lambda, fd_hess_lambda, fit_expansion_order, kyfan_bruteforce
from .polyfield import (
    Monomial,
    PolyMatrixField,
    Polynomial,
    builtin_field,
    field_dir_deriv,
    field_eval,
    field_from_potential,
    field_hess_quadform,
    field_jac_deriv,
    field_second_dir,
    poly_eval,
    poly_partial,
)
from .spectral import (
    ClusterConfig,
    EigenGroup,
    SpectralDecomposition,
    Spectrum,
    decompose,
    eig_sym,
    frobenius_covariants,
    kyfan_sum,
    pseudoinverse_Aj,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterConfig",
    "DegenerateGapError",
    "DimensionError",
    "EigenDerivativeContext",
    "EigenGroup",
    "Expansion2",
    "FDConfig",
    "FieldSpecError",
    "InconsistentDerivativeError",
    "Monomial",
    "NotSymmetricError",
    "PolyMatrixField",
    "Polynomial",
    "SlopeFit",
    "SpectralDecomposition",
    "SpectralFieldError",
    "Spectrum",
    "UnstableTrackingError",
    "builtin_field",
    "check_equivalence_conditions",
    "curve_deriv_lambda",
    "decompose",
    "dir_deriv_lambda",
    "dir_deriv_proj",
    "eig_sym",
    "eigen_context",
    "fd_dproj",
    "fd_grad_lambda",
    "fd_hess_lambda",
    "field_dir_deriv",
    "field_eval",
    "field_from_potential",
    "field_from_spec",
    "field_hess_quadform",
    "field_jac_deriv",
    "field_second_dir",
    "field_to_spec",
    "fit_expansion_order",
    "frobenius_covariants",
    "grad_lambda",
    "grad_lambda_trace",
    "hess_lambda",
    "hess_lambda_trace",
    "index_report",
    "jac_deriv_proj",
    "kyfan_bruteforce",
    "kyfan_sum",
    "load_field",
    "loads_field",
    "one_sided_sum_deriv",
    "poly_eval",
    "poly_partial",
    "pseudoinverse_Aj",
    "scan_constant_dimension",
    "second_dir_lambda",
    "taylor2_lambda",
]
