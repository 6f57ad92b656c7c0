"""Exact bidiagonal decompositions of generalized Pascal and lattice-path
matrices, and accuracy-preserving linear algebra computed from them."""

from .bd import (
    BDMatrix,
    Certificate,
    NevilleTrace,
    NotLowerTriangular,
    RowExchangeRequired,
    SaturationError,
    SingularMatrixError,
    bd_apply,
    bd_determinant,
    bd_expand,
    bd_from_dense,
    bd_from_json,
    bd_scale_columns,
    bd_to_json,
    bd_validate,
    neville_eliminate,
)
from .bench import (
    ErrorReport,
    ExperimentConfig,
    ReportRow,
    emit_csv,
    emit_plot,
    gen_rhs,
    parse_report_csv,
    run_experiment,
)
from .certify import NoConvergence
from .domains import BINARY64, RATIONAL, BigFloatDomain, NotExactError, ScalarDomain
from .families import (
    CLASSIC_KINDS,
    FamilySpec,
    SingularDiagonal,
    SingularFamily,
    classic_bd,
    classic_dense,
    factorial_power,
    is_hra_certified,
    lattice_bd,
    lattice_dense,
    parse_family,
    pascal_bd,
    pascal_dense,
    pascal_is_tp,
    pascal_scaled_bd,
    pascal_scaled_dense,
)
from .instrument import CountingDomain, CountingScalar, OpCounter
from .oracle import (
    ErrorStats,
    OracleResult,
    ShapeMismatch,
    oracle_eigenvalues,
    oracle_inverse,
    oracle_singular_values,
    oracle_solve,
    relative_errors,
)
from .params import ParamExpr, ParamParseError, parse_param
from .tnalg import (
    STRUCTURED,
    CertifiedPrecision,
    MatrixResult,
    SignPattern,
    SolveResult,
    SpectralResult,
    StructuredDouble,
    sign_pattern,
    tn_eigenvalues,
    tn_inverse,
    tn_singular_values,
    tn_solve,
)

__version__ = "0.1.0"
__all__ = [
    "BDMatrix", "Certificate", "NevilleTrace", "NotLowerTriangular",
    "RowExchangeRequired", "SaturationError", "SingularMatrixError",
    "bd_apply", "bd_determinant", "bd_expand", "bd_from_dense",
    "bd_from_json", "bd_scale_columns", "bd_to_json", "bd_validate",
    "neville_eliminate",
    "ErrorReport", "ExperimentConfig", "ReportRow", "emit_csv", "emit_plot",
    "gen_rhs", "parse_report_csv", "run_experiment",
    "NoConvergence",
    "BINARY64", "RATIONAL", "BigFloatDomain", "NotExactError", "ScalarDomain",
    "CLASSIC_KINDS", "FamilySpec", "SingularDiagonal", "SingularFamily",
    "classic_bd", "classic_dense", "factorial_power", "is_hra_certified",
    "lattice_bd", "lattice_dense", "parse_family", "pascal_bd",
    "pascal_dense", "pascal_is_tp", "pascal_scaled_bd", "pascal_scaled_dense",
    "CountingDomain", "CountingScalar", "OpCounter",
    "ErrorStats", "OracleResult", "ShapeMismatch", "oracle_eigenvalues",
    "oracle_inverse", "oracle_singular_values", "oracle_solve",
    "relative_errors",
    "ParamExpr", "ParamParseError", "parse_param",
    "STRUCTURED", "CertifiedPrecision", "MatrixResult", "SignPattern",
    "SolveResult", "SpectralResult", "StructuredDouble", "sign_pattern",
    "tn_eigenvalues", "tn_inverse", "tn_singular_values", "tn_solve",
    "__version__",
]
