"""Closed-form information quantities for monotone designs.

All quantities are on the correlation scale (``sigma`` factored out).
With ``x_i = alpha*d_i + beta*delta_i`` and ``q_i = exp(-x_i)``:

* trend information ``M_theta = 1 + sum tanh(x_i / 2)``;
* covariance-parameter information with per-increment weight
  ``w(x) = q^2 (1 + q^2) / (1 - q^2)^2``:
  ``M_alpha = sum d_i^2 w_i``, ``M_beta = sum delta_i^2 w_i``,
  ``M_alpha_beta = sum d_i delta_i w_i``;
* ``Phi = det M_r`` and the total determinant ``Psi = M_theta * Phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .model import (
    DEFAULT_FLOOR,
    CovarianceParams,
    MonotoneDesign,
    check_floor,
    geometric_fractions,
    skewed_increments,
    skewed_length,
)

__all__ = [
    "FisherMatrix",
    "DesignReport",
    "weight",
    "weight_derivative",
    "trend_information",
    "trend_information_equidistant",
    "trend_information_bounds",
    "covariance_information",
    "phi",
    "psi",
    "phi_gradient",
    "psi_gradient",
    "f_term",
    "trend_information_geometric",
    "phi_geometric",
    "psi_geometric",
    "evaluate",
]


@dataclass(frozen=True)
class FisherMatrix:
    """Information matrix on ``(alpha, beta)`` and its determinant."""

    m_alpha: float
    m_beta: float
    m_alpha_beta: float
    phi: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.m_alpha, self.m_alpha_beta], [self.m_alpha_beta, self.m_beta]])


@dataclass(frozen=True)
class DesignReport:
    n: int
    lam: float
    m_theta: float
    fisher: Optional[FisherMatrix]
    psi: Optional[float]
    efficiency: Optional[float] = None
    reference: Optional[float] = None

    def as_dict(self) -> dict:
        out = {"n": self.n, "lambda": self.lam, "m_theta": self.m_theta}
        if self.fisher is not None:
            out.update(
                m_alpha=self.fisher.m_alpha,
                m_beta=self.fisher.m_beta,
                m_alpha_beta=self.fisher.m_alpha_beta,
                phi=self.fisher.phi,
                psi=self.psi,
            )
        if self.efficiency is not None:
            out.update(reference=self.reference, efficiency=self.efficiency)
        return out


def weight(x):
    """``q^2 (1+q^2) / (1-q^2)^2`` at ``q = exp(-x)``, evaluated as
    ``(1 + e^{-2x}) / (4 sinh^2 x)`` which has no cancellation as ``x -> 0``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        return (1.0 + np.exp(-2.0 * x)) / (4.0 * np.sinh(x) ** 2)


def weight_derivative(x):
    """``dw/dx = -2 q^2 (1+3q^2) / (1-q^2)^3``, in overflow-free form."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        e2 = np.exp(-2.0 * x)
        return -(1.0 + 3.0 * e2) / (2.0 * (-np.expm1(-2.0 * x)) * np.sinh(x) ** 2)


def _trend_term_derivative(x):
    # d/dx tanh(x/2) = 2q / (1+q)^2
    return 0.5 / np.cosh(0.5 * np.asarray(x, dtype=float)) ** 2


def trend_information(design: MonotoneDesign, params: CovarianceParams) -> float:
    """``1' C^{-1} 1`` for a monotone design, in O(n)."""
    x = skewed_increments(design, params)
    return float(1.0 + np.sum(np.tanh(0.5 * x)))


def _check_n_lambda(n, lam):
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")


def trend_information_equidistant(n: int, lam: float) -> float:
    """Trend information of the equidistant design with ``n`` points and skewed size ``lam``."""
    _check_n_lambda(n, lam)
    return 1.0 + (n - 1) * math.tanh(lam / (2.0 * (n - 1)))


def trend_information_bounds(n: int, lam: float) -> tuple:
    """Limits of the equidistant information as ``n -> inf`` and ``lam -> inf``."""
    _check_n_lambda(n, lam)
    return lam / 2.0 + 1.0, n


def _fisher_sums(d, delta, w):
    return float(np.sum(d * d * w)), float(np.sum(delta * delta * w)), float(np.sum(d * delta * w))


def _phi_sum(d, delta, w):
    # sum_{i>j} (d_i delta_j - d_j delta_i)^2 w_i w_j; every term is >= 0
    cross = np.outer(d, delta)
    cross = cross - cross.T
    ww = np.outer(w, w)
    return float(np.sum(np.tril(cross * cross * ww, k=-1)))


def covariance_information(
    design: MonotoneDesign, params: CovarianceParams, floor: float = DEFAULT_FLOOR
) -> FisherMatrix:
    """Fisher information on ``(alpha, beta)`` for a monotone design.

    Raises
    ------
    DegenerateDesign
        If a skewed increment is below ``floor``.
    """
    x = skewed_increments(design, params)
    check_floor(x, floor)
    w = weight(x)
    m_a, m_b, m_ab = _fisher_sums(design.d, design.delta, w)
    return FisherMatrix(m_a, m_b, m_ab, _phi_sum(design.d, design.delta, w))


def phi(design: MonotoneDesign, params: CovarianceParams, floor: float = DEFAULT_FLOOR) -> float:
    """Determinant of the ``(alpha, beta)`` information via its nonnegative double sum."""
    x = skewed_increments(design, params)
    check_floor(x, floor)
    return _phi_sum(design.d, design.delta, weight(x))


def psi(design: MonotoneDesign, params: CovarianceParams, floor: float = DEFAULT_FLOOR) -> float:
    """Total information determinant ``M_theta * Phi``."""
    return trend_information(design, params) * phi(design, params, floor)


def _exclusive_sums(v):
    # sum over j != i, built from exclusive prefix and suffix sums (no subtraction)
    prefix = np.concatenate(([0.0], np.cumsum(v)[:-1]))
    suffix = np.concatenate((np.cumsum(v[::-1])[::-1][1:], [0.0]))
    return prefix + suffix


def phi_gradient(design: MonotoneDesign, params: CovarianceParams, floor: float = DEFAULT_FLOOR):
    """Analytic gradient of ``Phi`` with respect to ``(d, delta)``.

    Returns
    -------
    grad_d, grad_delta : ndarray
        Partial derivatives for each of the ``n - 1`` increments.

    Notes
    -----
    The terms belonging to increment ``i`` cancel inside each partial
    derivative, so it is expressed through sums over ``j != i``.  For the
    first increment these are the information entries of the sub-design
    that drops the first point.
    """
    d, delta = design.d, design.delta
    m = d.size
    if m < 2:
        return np.zeros(m), np.zeros(m)
    x = skewed_increments(design, params)
    check_floor(x, floor)
    w = weight(x)
    dw = weight_derivative(x)
    sa = _exclusive_sums(d * d * w)
    sb = _exclusive_sums(delta * delta * w)
    sab = _exclusive_sums(d * delta * w)
    quad = d * d * sb + delta * delta * sa - 2.0 * d * delta * sab
    grad_d = 2.0 * w * (d * sb - delta * sab) + params.alpha * dw * quad
    grad_delta = 2.0 * w * (delta * sa - d * sab) + params.beta * dw * quad
    return grad_d, grad_delta


def psi_gradient(design: MonotoneDesign, params: CovarianceParams, floor: float = DEFAULT_FLOOR):
    """Gradient of ``Psi = M_theta * Phi`` by the product rule."""
    g_d, g_delta = phi_gradient(design, params, floor)
    m = design.d.size
    if m < 2:
        return g_d, g_delta
    x = skewed_increments(design, params)
    m_theta = trend_information(design, params)
    phi_val = phi(design, params, floor)
    dt = _trend_term_derivative(x)
    return (
        m_theta * g_d + params.alpha * dt * phi_val,
        m_theta * g_delta + params.beta * dt * phi_val,
    )


def f_term(d: float, delta: float, params: CovarianceParams) -> float:
    """Single-increment contribution ``d^2 w(alpha d + beta delta)`` to ``M_alpha``."""
    if d < 0 or delta < 0:
        raise DomainError("increments must be nonnegative")
    if d == 0:
        return 0.0
    x = params.alpha * d + params.beta * delta
    return float(d * d * weight(x))


def _geometric_parts(n, r1, r2, params, spans):
    t_span, s_span = spans
    a = geometric_fractions(n, r1)
    b = geometric_fractions(n, r2)
    x = params.alpha * t_span * a + params.beta * s_span * b
    return a, b, x


def trend_information_geometric(n, r1, r2, params: CovarianceParams, spans=(1.0, 1.0)) -> float:
    """Trend information of the geometric progression design with ratios ``r1`` (t) and ``r2`` (s)."""
    _, _, x = _geometric_parts(n, r1, r2, params, spans)
    return float(1.0 + np.sum(np.tanh(0.5 * x)))


def phi_geometric(n, r1, r2, params: CovarianceParams, spans=(1.0, 1.0)) -> float:
    """``Phi`` of the geometric progression design.

    The span product is factored out of the cross terms so that equal
    ratios give an exact zero.
    """
    a, b, x = _geometric_parts(n, r1, r2, params, spans)
    return (spans[0] * spans[1]) ** 2 * _phi_sum(a, b, weight(x))


def psi_geometric(n, r1, r2, params: CovarianceParams, spans=(1.0, 1.0)) -> float:
    return trend_information_geometric(n, r1, r2, params, spans) * phi_geometric(n, r1, r2, params, spans)


def evaluate(
    design: MonotoneDesign,
    params: CovarianceParams,
    reference: Optional[float] = None,
    floor: float = DEFAULT_FLOOR,
) -> DesignReport:
    """Bundle every closed-form quantity for one design."""
    m_theta = trend_information(design, params)
    fisher = covariance_information(design, params, floor) if design.n >= 2 else FisherMatrix(0.0, 0.0, 0.0, 0.0)
    eff = None
    if reference is not None:
        if not reference > 0:
            raise DomainError("reference information must be positive")
        eff = m_theta / reference
    return DesignReport(
        n=design.n,
        lam=skewed_length(design, params),
        m_theta=m_theta,
        fisher=fisher,
        psi=m_theta * fisher.phi,
        efficiency=eff,
        reference=reference,
    )
