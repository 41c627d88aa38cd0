"""Exact designs for shifted Ornstein-Uhlenbeck sheets observed on monotone point sets."""

__version__ = "0.1.0"

from .errors import (
    ConditionDViolation,
    DegenerateDesign,
    DesignFileError,
    DomainError,
    NonpositiveCoordinate,
    NotPositiveDefinite,
)
from .model import (
    CovarianceParams,
    GridDesign,
    MonotoneDesign,
    Region,
    ScatteredDesign,
    covariance_kernel,
    q_values,
    semivariogram,
    skewed_length,
    validate_condition_d,
)
from .fisher import (
    DesignReport,
    FisherMatrix,
    covariance_information,
    evaluate,
    phi,
    phi_gradient,
    psi,
    psi_gradient,
    trend_information,
    trend_information_equidistant,
)
from .design import (
    GeometricDesignSpec,
    SearchConfig,
    efficiency,
    geometric_progression_design,
    geometric_surface,
    optimal_trend_design,
    search,
)
