"""Parameters, regions, designs and the separable exponential kernel.

Coordinates are ``(s, t)`` pairs.  The rate ``alpha`` acts on t-distances
and ``beta`` on s-distances, so a monotone design stores its t-increments
in ``d`` (paired with ``alpha``) and its s-increments in ``delta``
(paired with ``beta``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConditionDViolation, DegenerateDesign, DomainError, NonpositiveCoordinate

__all__ = [
    "DEFAULT_FLOOR",
    "CovarianceParams",
    "Region",
    "MonotoneDesign",
    "GridDesign",
    "ScatteredDesign",
    "validate_condition_d",
    "geometric_fractions",
    "skewed_increments",
    "q_values",
    "skewed_length",
    "covariance_kernel",
    "semivariogram",
    "check_floor",
]

#: Minimum admissible skewed increment ``alpha*d + beta*delta``.
DEFAULT_FLOOR = 1e-12


def _frozen_array(values, name):
    arr = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CovarianceParams:
    """Rates ``alpha`` (t-axis), ``beta`` (s-axis) and scale ``sigma``."""

    alpha: float
    beta: float
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    def sigma_tilde(self) -> float:
        """Scale of the probabilistic parametrization, ``2*sigma*sqrt(alpha*beta)``."""
        return 2.0 * self.sigma * math.sqrt(self.alpha * self.beta)

    @classmethod
    def from_sigma_tilde(cls, alpha: float, beta: float, sigma_tilde: float) -> "CovarianceParams":
        return cls(alpha, beta, sigma_tilde / (2.0 * math.sqrt(alpha * beta)))

    def swapped(self) -> "CovarianceParams":
        return CovarianceParams(self.beta, self.alpha, self.sigma)


@dataclass(frozen=True)
class Region:
    """Rectangle ``[a1, b1] x [a2, b2]``: s-axis first, t-axis second."""

    a1: float
    b1: float
    a2: float
    b2: float

    def __post_init__(self):
        if not self.b1 > self.a1:
            raise DomainError(f"region needs b1 > a1, got [{self.a1}, {self.b1}]")
        if not self.b2 > self.a2:
            raise DomainError(f"region needs b2 > a2, got [{self.a2}, {self.b2}]")

    @property
    def s_span(self) -> float:
        return self.b1 - self.a1

    @property
    def t_span(self) -> float:
        return self.b2 - self.a2

    @classmethod
    def from_spans(cls, t_span: float, s_span: float, origin=(0.0, 0.0)) -> "Region":
        s0, t0 = origin
        return cls(s0, s0 + s_span, t0, t0 + t_span)


@dataclass(frozen=True)
class MonotoneDesign:
    """A Condition-D point set stored as an origin plus increments.

    Parameters
    ----------
    origin : (float, float)
        First point ``(s1, t1)``.
    d : array_like
        t-increments ``t_{i+1} - t_i``, all strictly positive.
    delta : array_like
        s-increments ``s_{i+1} - s_i``, all strictly positive.

    Positivity of the origin is not enforced here; it is a property of the
    absolute placement, checked by :func:`validate_condition_d` and the
    design-file loader.  None of the information formulas depend on it.
    """

    origin: tuple
    d: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        origin = tuple(float(v) for v in self.origin)
        if len(origin) != 2 or not all(math.isfinite(v) for v in origin):
            raise DomainError("origin must be a finite (s, t) pair")
        d = _frozen_array(self.d, "d")
        delta = _frozen_array(self.delta, "delta")
        if d.shape != delta.shape:
            raise DomainError(f"d and delta lengths differ ({d.size} vs {delta.size})")
        for name, arr in (("d", d), ("delta", delta)):
            bad = np.flatnonzero(arr <= 0)
            if bad.size:
                axis = "t" if name == "d" else "s"
                raise ConditionDViolation(int(bad[0]) + 1, axis)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "delta", delta)

    @property
    def n(self) -> int:
        return self.d.size + 1

    @property
    def s(self) -> np.ndarray:
        return self.origin[0] + np.concatenate(([0.0], np.cumsum(self.delta)))

    @property
    def t(self) -> np.ndarray:
        return self.origin[1] + np.concatenate(([0.0], np.cumsum(self.d)))

    def points(self) -> np.ndarray:
        """``(n, 2)`` array of ``(s, t)`` coordinates."""
        return np.column_stack([self.s, self.t])

    def swapped(self) -> "MonotoneDesign":
        """Exchange the roles of the two axes."""
        return MonotoneDesign((self.origin[1], self.origin[0]), self.delta, self.d)

    @classmethod
    def equidistant(cls, n: int, t_span: float, s_span: float, origin=(0.0, 0.0)) -> "MonotoneDesign":
        if n < 1:
            raise DomainError("n must be at least 1")
        m = n - 1
        return cls(origin, np.full(m, t_span / m) if m else [], np.full(m, s_span / m) if m else [])


@dataclass(frozen=True)
class GridDesign:
    """Cartesian product of strictly increasing t- and s-coordinates."""

    t_coords: np.ndarray
    s_coords: np.ndarray

    def __post_init__(self):
        for name in ("t_coords", "s_coords"):
            arr = _frozen_array(getattr(self, name), name)
            if arr.size == 0:
                raise DomainError(f"{name} is empty")
            if np.any(np.diff(arr) <= 0):
                raise DomainError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.t_coords.size * self.s_coords.size

    def points(self) -> np.ndarray:
        # s varies fastest within each t row
        tt, ss = np.meshgrid(self.t_coords, self.s_coords, indexing="ij")
        return np.column_stack([ss.ravel(), tt.ravel()])


@dataclass(frozen=True)
class ScatteredDesign:
    """Arbitrary distinct ``(s, t)`` points."""

    coords: np.ndarray

    def __post_init__(self):
        pts = np.array(self.coords, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
            raise DomainError("points must be a nonempty sequence of (s, t) pairs")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points contain non-finite values")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise DomainError("duplicate points make the covariance matrix singular")
        pts.setflags(write=False)
        object.__setattr__(self, "coords", pts)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def points(self) -> np.ndarray:
        return self.coords


def geometric_fractions(n: int, r: float) -> np.ndarray:
    """Unit-sum increments ``(k, k r, ..., k r^(n-2))`` of a geometric progression design."""
    if n < 2:
        raise DomainError("geometric progression needs n >= 2")
    if not 0 < r <= 1:
        raise DomainError(f"ratio must lie in (0, 1], got {r!r}")
    m = n - 1
    if r == 1:
        return np.full(m, 1.0 / m)
    k = (1.0 - r) / (1.0 - r**m)
    return k * r ** np.arange(m)


def validate_condition_d(points: Sequence, allow_nonpositive_origin: bool = False) -> MonotoneDesign:
    """Check Condition D and return the increment representation.

    Raises
    ------
    ConditionDViolation
        At the first index whose s or t coordinate fails to increase.
    NonpositiveCoordinate
        If the first point is not in the open positive quadrant (unless
        ``allow_nonpositive_origin``).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
        raise DomainError("expected a nonempty sequence of (s, t) pairs")
    if not np.all(np.isfinite(pts)):
        raise DomainError("points contain non-finite values")
    s, t = pts[:, 0], pts[:, 1]
    if not allow_nonpositive_origin and (s[0] <= 0 or t[0] <= 0):
        raise NonpositiveCoordinate(f"first point ({s[0]}, {t[0]}) is not strictly positive")
    for i in range(1, pts.shape[0]):
        if not s[i] > s[i - 1]:
            raise ConditionDViolation(i, "s")
        if not t[i] > t[i - 1]:
            raise ConditionDViolation(i, "t")
    return MonotoneDesign((s[0], t[0]), np.diff(t), np.diff(s))


def skewed_increments(design: MonotoneDesign, params: CovarianceParams) -> np.ndarray:
    """``alpha*d_i + beta*delta_i`` for each consecutive pair."""
    return params.alpha * design.d + params.beta * design.delta


def check_floor(x: np.ndarray, floor: float = DEFAULT_FLOOR) -> None:
    bad = np.flatnonzero(~(x >= floor))
    if bad.size:
        i = int(bad[0])
        raise DegenerateDesign(i + 1, float(x[i]), floor)


def q_values(design: MonotoneDesign, params: CovarianceParams) -> np.ndarray:
    """Neighbour correlations ``q_i = exp(-alpha*d_i - beta*delta_i)``."""
    return np.exp(-skewed_increments(design, params))


def skewed_length(design: MonotoneDesign, params: CovarianceParams) -> float:
    """Skewed size ``lambda = alpha*sum(d) + beta*sum(delta)``."""
    return float(params.alpha * design.d.sum() + params.beta * design.delta.sum())


def covariance_kernel(p1, p2, params: CovarianceParams) -> float:
    """``sigma^2 exp(-alpha|t1 - t2| - beta|s1 - s2|)`` for points ``(s, t)``."""
    (s1, t1), (s2, t2) = p1, p2
    return params.sigma**2 * math.exp(-params.alpha * abs(t1 - t2) - params.beta * abs(s1 - s2))


def semivariogram(d: float, delta: float, params: CovarianceParams) -> float:
    """Variogram ``2*gamma`` of an increment with t-lag ``d`` and s-lag ``delta``.

    Expressed through ``sigma_tilde`` so the sill is ``sigma_tilde^2 / (2 alpha beta)``.
    """
    if d < 0 or delta < 0:
        raise DomainError("lags must be nonnegative")
    sill = params.sigma_tilde() ** 2 / (2.0 * params.alpha * params.beta)
    return -sill * math.expm1(-params.alpha * d - params.beta * delta)
