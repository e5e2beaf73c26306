"""Spectral analysis of the Krein-space products T^[*]T and TT^[*].

Finite-dimensional (matrix) implementations of:

* the AB / BA correspondence for rectangular factors (spectra, eigenspaces,
  resolvent identities and bounds);
* sign types, sign characteristics and critical points of J-selfadjoint
  matrices, interval spectral projections and definitizing polynomials;
* block-diagonal operator families with truncation trends.
"""

from .errors import (
    BoundaryHit,
    DegenerateForm,
    DimensionMismatch,
    InputError,
    InvalidFundamentalSymmetry,
    InvalidRule,
    KreinError,
    MultiplicityTooLarge,
    NonSquare,
    NotAnEigenvalue,
    NotJSelfadjoint,
    NumericalBreakdown,
    ParseError,
    RankDeficientBasis,
    SelfadjointnessViolation,
    SpectrumHit,
    TransportFailure,
    ValidationError,
)
from .family import (
    BlockFamily,
    GrowthFit,
    Rule,
    TruncationTrend,
    example_one_family,
    explicit_family,
    graded_neutrality_family,
    growth_order_fit,
    negative_rank_trend,
    partner_growth_check,
    product_of_blocks_family,
    projection_trend,
    shrinking_intervals,
    truncate,
)
from .io import OperatorSpec, dump_spec, load_spec, parse_spec
from .krein import (
    FundamentalSymmetry,
    Inertia,
    KreinOperator,
    gram_inertia,
    is_j_selfadjoint,
    krein_adjoint,
    product_pair,
)
from .numerics import (
    Disk,
    EigenCluster,
    Eigenstructure,
    Interval,
    Rectangle,
    eigenstructure,
    pseudospectrum_grid,
    resolvent,
    riesz_projection,
)
from .products import (
    FactorPair,
    compare_nonzero_spectra,
    domination_constants,
    eigenspace_transport,
    resolvent_bound_check,
    resolvent_identity_residuals,
    zero_pole_order,
)
from .signtype import (
    DefinitizingPolynomial,
    SignClassification,
    SignType,
    classify_real_eigenvalue,
    critical_points,
    definitize,
    interval_spectral_projection,
    is_definitizing,
    product_signtype_compare,
    sign_characteristic,
)

__all__ = [
    "BlockFamily",
    "DefinitizingPolynomial",
    "Disk",
    "EigenCluster",
    "Eigenstructure",
    "FactorPair",
    "FundamentalSymmetry",
    "GrowthFit",
    "Inertia",
    "Interval",
    "KreinOperator",
    "OperatorSpec",
    "Rectangle",
    "Rule",
    "SignClassification",
    "SignType",
    "TruncationTrend",
    "classify_real_eigenvalue",
    "compare_nonzero_spectra",
    "critical_points",
    "definitize",
    "domination_constants",
    "dump_spec",
    "eigenspace_transport",
    "eigenstructure",
    "example_one_family",
    "explicit_family",
    "graded_neutrality_family",
    "gram_inertia",
    "growth_order_fit",
    "interval_spectral_projection",
    "is_definitizing",
    "is_j_selfadjoint",
    "krein_adjoint",
    "load_spec",
    "negative_rank_trend",
    "parse_spec",
    "partner_growth_check",
    "product_of_blocks_family",
    "product_pair",
    "product_signtype_compare",
    "projection_trend",
    "pseudospectrum_grid",
    "resolvent",
    "resolvent_bound_check",
    "resolvent_identity_residuals",
    "riesz_projection",
    "shrinking_intervals",
    "sign_characteristic",
    "truncate",
    "zero_pole_order",
    "BoundaryHit",
    "DegenerateForm",
    "DimensionMismatch",
    "InputError",
    "InvalidFundamentalSymmetry",
    "InvalidRule",
    "KreinError",
    "MultiplicityTooLarge",
    "NonSquare",
    "NotAnEigenvalue",
    "NotJSelfadjoint",
    "NumericalBreakdown",
    "ParseError",
    "RankDeficientBasis",
    "SelfadjointnessViolation",
    "SpectrumHit",
    "TransportFailure",
    "ValidationError",
]

__version__ = "0.1.0"
