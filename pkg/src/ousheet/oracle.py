"""Dense-matrix reference computations for arbitrary point sets.

Nothing here uses the closed-form sums of :mod:`ousheet.fisher`; the
information quantities are obtained from the covariance matrix itself,
so the two routes check each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DomainError, NotPositiveDefinite
from .fisher import FisherMatrix
from .model import (
    DEFAULT_FLOOR,
    CovarianceParams,
    GridDesign,
    MonotoneDesign,
    ScatteredDesign,
    check_floor,
    q_values,
    skewed_increments,
)

__all__ = [
    "MAX_ORDER",
    "SPDFactor",
    "as_points",
    "correlation_matrix",
    "build_covariance_monotone",
    "closed_form_inverse",
    "spd_factor",
    "spd_solve",
    "trend_information_oracle",
    "covariance_information_oracle",
    "covariance_information_fd",
    "grid_trend_information",
]

#: Largest matrix order the dense routines accept.
MAX_ORDER = 4096


def as_points(design) -> np.ndarray:
    """Coordinates ``(n, 2)`` of any design kind or a raw point array."""
    if isinstance(design, (MonotoneDesign, GridDesign, ScatteredDesign)):
        return design.points()
    pts = np.asarray(design, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError("expected an (n, 2) array of (s, t) points")
    return pts


def _distances(pts):
    s, t = pts[:, 0], pts[:, 1]
    return np.abs(t[:, None] - t[None, :]), np.abs(s[:, None] - s[None, :])


def correlation_matrix(points, params: CovarianceParams) -> np.ndarray:
    """Correlation-scale covariance ``exp(-alpha|dt| - beta|ds|)`` of the given points."""
    pts = as_points(points)
    if pts.shape[0] > MAX_ORDER:
        raise DomainError(f"{pts.shape[0]} points exceeds the dense limit {MAX_ORDER}")
    dt, ds = _distances(pts)
    return np.exp(-params.alpha * dt - params.beta * ds)


def build_covariance_monotone(design: MonotoneDesign, params: CovarianceParams) -> np.ndarray:
    """Correlation matrix with entries ``prod_{k=i}^{j-1} q_k`` above the diagonal."""
    q = q_values(design, params)
    n = design.n
    c = np.eye(n)
    for i in range(n):
        acc = 1.0
        for j in range(i + 1, n):
            acc *= q[j - 1]
            c[i, j] = c[j, i] = acc
    return c


def closed_form_inverse(
    design: MonotoneDesign, params: CovarianceParams, floor: float = DEFAULT_FLOOR
) -> np.ndarray:
    """Tridiagonal inverse of the monotone-design correlation matrix."""
    if design.n < 2:
        raise DomainError("the tridiagonal inverse needs n >= 2")
    x = skewed_increments(design, params)
    check_floor(x, floor)
    q = np.exp(-x)
    one_minus = -np.expm1(-2.0 * x)  # 1 - q^2
    n = design.n
    main = np.empty(n)
    main[0] = 1.0 / one_minus[0]
    main[-1] = 1.0 / one_minus[-1]
    main[1:-1] = 1.0 / one_minus[1:] + q[:-1] ** 2 / one_minus[:-1]
    off = -q / one_minus
    return np.diag(main) + np.diag(off, 1) + np.diag(off, -1)


@dataclass(frozen=True)
class SPDFactor:
    """Lower Cholesky factor with its log-determinant."""

    lower: np.ndarray
    logdet: float

    def solve(self, b):
        return linalg.cho_solve((self.lower, True), b)


def spd_factor(a) -> SPDFactor:
    """Cholesky factorization without pivoting or jitter.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not safely positive.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DomainError("matrix must be square")
    try:
        lower = linalg.cholesky(a, lower=True, check_finite=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    diag = np.diag(lower)
    # an exactly singular matrix may still yield a rounding-level pivot
    if np.min(diag) ** 2 <= n * np.finfo(float).eps * np.max(np.abs(np.diag(a))):
        raise NotPositiveDefinite("matrix is numerically singular")
    return SPDFactor(lower, float(2.0 * np.sum(np.log(diag))))


def spd_solve(a, b) -> np.ndarray:
    return spd_factor(a).solve(np.asarray(b, dtype=float))


def trend_information_oracle(points, params: CovarianceParams) -> float:
    """``1' C^{-1} 1`` by dense Cholesky solve."""
    c = correlation_matrix(points, params)
    ones = np.ones(c.shape[0])
    return float(ones @ spd_factor(c).solve(ones))


def _trace_information(cinv_da, cinv_db):
    m_a = 0.5 * np.sum(cinv_da * cinv_da.T)
    m_b = 0.5 * np.sum(cinv_db * cinv_db.T)
    m_ab = 0.5 * np.sum(cinv_da * cinv_db.T)
    return FisherMatrix(float(m_a), float(m_b), float(m_ab), float(m_a * m_b - m_ab**2))


def covariance_information_oracle(points, params: CovarianceParams) -> FisherMatrix:
    """Half-trace formulas ``1/2 tr(C^-1 dC_a C^-1 dC_b)`` with analytic ``dC``."""
    pts = as_points(points)
    c = correlation_matrix(pts, params)
    dt, ds = _distances(pts)
    f = spd_factor(c)
    return _trace_information(f.solve(-dt * c), f.solve(-ds * c))


def covariance_information_fd(points, params: CovarianceParams, h: float = 1e-6) -> FisherMatrix:
    """Same trace formulas with ``dC`` from central differences in ``(alpha, beta)``."""
    pts = as_points(points)
    a, b = params.alpha, params.beta
    da = (correlation_matrix(pts, CovarianceParams(a + h, b)) - correlation_matrix(pts, CovarianceParams(a - h, b))) / (2 * h)
    db = (correlation_matrix(pts, CovarianceParams(a, b + h)) - correlation_matrix(pts, CovarianceParams(a, b - h))) / (2 * h)
    f = spd_factor(correlation_matrix(pts, params))
    return _trace_information(f.solve(da), f.solve(db))


def _axis_information(coords, rate):
    c = np.exp(-rate * np.abs(coords[:, None] - coords[None, :]))
    ones = np.ones(coords.size)
    return float(ones @ spd_factor(c).solve(ones))


def grid_trend_information(grid: GridDesign, params: CovarianceParams) -> float:
    """Trend information of a full grid.

    The grid correlation matrix is the Kronecker product of the two axis
    matrices, so ``1' C^-1 1`` is the product of the axis quantities.
    """
    return _axis_information(grid.t_coords, params.alpha) * _axis_information(grid.s_coords, params.beta)
