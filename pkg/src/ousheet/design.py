"""Design constructors, geometric-progression sweeps and numerical search."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import DomainError, NoImprovementWarning
from .fisher import (
    _phi_sum,
    phi_geometric,
    phi_gradient,
    psi_gradient,
    trend_information_geometric,
    weight,
)
from .model import CovarianceParams, MonotoneDesign, Region, geometric_fractions

__all__ = [
    "GeometricDesignSpec",
    "SearchConfig",
    "SearchRun",
    "SearchResult",
    "optimal_trend_design",
    "geometric_progression_design",
    "geometric_surface",
    "efficiency",
    "proportional_distance",
    "search",
]

OBJECTIVES = ("trend", "phi", "psi")


def optimal_trend_design(n: int, region: Region, params: CovarianceParams, margin: float = 0.0) -> MonotoneDesign:
    """Equidistant design spanning the full region, which maximizes the trend information.

    ``margin`` shrinks both spans by that fraction (strict-interior variant).
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    if not 0 <= margin < 1:
        raise DomainError("margin must lie in [0, 1)")
    scale = 1.0 - margin
    return MonotoneDesign.equidistant(n, region.t_span * scale, region.s_span * scale, origin=(region.a1, region.a2))


@dataclass(frozen=True)
class GeometricDesignSpec:
    n: int
    r1: float
    r2: float
    spans: tuple = (1.0, 1.0)  # (t-span, s-span)

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be at least 2")
        for r in (self.r1, self.r2):
            if not 0 < r <= 1:
                raise DomainError(f"ratio must lie in (0, 1], got {r!r}")
        if min(self.spans) <= 0:
            raise DomainError("spans must be positive")


def geometric_progression_design(spec: GeometricDesignSpec, origin=(0.0, 0.0)) -> MonotoneDesign:
    """Increments ``(k, k r1, ..., k r1^{n-2})`` on t and the analogue with ``r2`` on s."""
    t_span, s_span = spec.spans
    return MonotoneDesign(
        origin,
        t_span * geometric_fractions(spec.n, spec.r1),
        s_span * geometric_fractions(spec.n, spec.r2),
    )


def geometric_surface(n: int, params: CovarianceParams, resolution: int, spans=(1.0, 1.0)) -> np.ndarray:
    """Table of ``(r1, r2, m_theta, phi, psi)`` over the grid ``{1/res, ..., 1}^2``.

    Rows are ordered with ``r2`` varying fastest.
    """
    if resolution < 2:
        raise DomainError("resolution must be at least 2")
    rs = np.arange(1, resolution + 1) / resolution
    rows = []
    for r1 in rs:
        for r2 in rs:
            m = trend_information_geometric(n, r1, r2, params, spans)
            p = phi_geometric(n, r1, r2, params, spans)
            rows.append((r1, r2, m, p, m * p))
    return np.array(rows)


def efficiency(design_value: float, reference_value: float) -> float:
    """Ratio ``M_theta / max M_theta``."""
    if not reference_value > 0:
        raise DomainError("reference information must be positive")
    return design_value / reference_value


def proportional_distance(design: MonotoneDesign) -> float:
    """Largest relative deviation of ``d_i / delta_i`` from ``d_1 / delta_1``.

    Zero exactly on the family ``d_i = c_i d_1, delta_i = c_i delta_1``.
    """
    ratio = design.d / design.delta
    return float(np.max(np.abs(ratio / ratio[0] - 1.0)))


# --------------------------------------------------------------------------
# search


@dataclass(frozen=True)
class SearchConfig:
    """Settings for :func:`search`.

    ``floor`` and ``boundary_tol`` are in skewed units (``alpha*d`` or
    ``beta*delta``).  ``margin`` shrinks the spans for a strict interior.
    """

    objective: str
    n: int
    region: Region
    starts: int = 20
    max_iter: int = 5000
    tol: float = 1e-10
    seed: int = 0
    floor: float = 1e-3
    boundary_tol: float = 1e-6
    grad_tol: float = 1e-8
    margin: float = 0.0
    critical_probe: bool = True

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise DomainError(f"objective must be one of {OBJECTIVES}")
        if self.n < 2:
            raise DomainError("n must be at least 2")
        if self.starts < 1 or self.max_iter < 1:
            raise DomainError("starts and max_iter must be positive")
        for name in ("tol", "floor", "boundary_tol", "grad_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if not 0 <= self.margin < 1:
            raise DomainError("margin must lie in [0, 1)")


@dataclass
class SearchRun:
    start: int
    initial_value: float
    value: float
    design: MonotoneDesign
    boundary: list  # per coordinate: None, "floor" or "span"
    gradient_norm: float
    iterations: int

    @property
    def improved(self) -> bool:
        return self.value > self.initial_value

    @property
    def at_boundary(self) -> bool:
        return any(b is not None for b in self.boundary)


@dataclass
class CriticalPoint:
    start: int
    design: MonotoneDesign
    value: float
    gradient_norm: float
    family_distance: float


@dataclass
class SearchResult:
    config: SearchConfig
    best_design: MonotoneDesign
    best_value: float
    runs: list = field(default_factory=list)
    critical_points: list = field(default_factory=list)

    @property
    def improved(self) -> bool:
        return any(r.improved for r in self.runs)

    def boundary_diagnostics(self) -> list:
        return [(r.start, r.boundary) for r in self.runs]


class _Box:
    """Feasible increments: ``rate*v_i >= floor`` and ``sum(v) <= span`` per axis."""

    def __init__(self, m, params, spans, floor):
        self.m = m
        self.rates = (params.alpha, params.beta)
        self.spans = spans
        self.lows = tuple(floor / r for r in self.rates)
        for lo, span in zip(self.lows, spans):
            if m * lo >= span:
                raise DomainError("increment floor leaves no feasible design")

    @staticmethod
    def _project_axis(v, lo, span):
        w = np.maximum(v, lo)
        if w.sum() <= span:
            return w
        # Euclidean projection onto {w >= lo, sum(w) = span}
        u = v - lo
        total = span - lo * v.size
        srt = np.sort(u)[::-1]
        css = np.cumsum(srt) - total
        k = np.nonzero(srt - css / np.arange(1, v.size + 1) > 0)[0][-1]
        tau = css[k] / (k + 1)
        return lo + np.maximum(u - tau, 0.0)

    def project(self, x):
        m = self.m
        d = self._project_axis(x[:m], self.lows[0], self.spans[0])
        delta = self._project_axis(x[m:], self.lows[1], self.spans[1])
        return d, delta

    def random_point(self, rng):
        parts = []
        for lo, span in zip(self.lows, self.spans):
            free = span - self.m * lo
            total = free * rng.uniform(0.3, 1.0)
            parts.append(lo + total * rng.dirichlet(np.ones(self.m)))
        return np.concatenate(parts)

    def boundary(self, d, delta, tol):
        flags = []
        for v, lo, span, rate in zip((d, delta), self.lows, self.spans, self.rates):
            at_span = rate * (span - v.sum()) < tol
            for vi in v:
                if rate * (vi - lo) < tol:
                    flags.append("floor")
                elif at_span:
                    flags.append("span")
                else:
                    flags.append(None)
        return flags


def _objective_fn(name, params):
    """Criterion as a function of raw ``(d, delta)`` arrays (no validation)."""
    a, b = params.alpha, params.beta

    def trend(d, delta):
        return 1.0 + float(np.sum(np.tanh(0.5 * (a * d + b * delta))))

    def phi_(d, delta):
        return _phi_sum(d, delta, weight(a * d + b * delta))

    if name == "trend":
        return trend
    if name == "phi":
        return phi_
    return lambda d, delta: trend(d, delta) * phi_(d, delta)


def _gradient(name, des, params):
    if name == "trend":
        x = params.alpha * des.d + params.beta * des.delta
        g = 0.5 / np.cosh(0.5 * x) ** 2
        return np.concatenate((params.alpha * g, params.beta * g))
    fn = phi_gradient if name == "phi" else psi_gradient
    g_d, g_delta = fn(des, params, floor=0.0)
    return np.concatenate((g_d, g_delta))


def _local_maximize(f, x0, box, cfg):
    """Nelder-Mead on the projected objective, restarted until it stops improving."""

    def neg(x):
        return -f(*box.project(x))

    x = np.concatenate(box.project(x0))
    best = neg(x)
    iters = 0
    for _ in range(5):
        res = optimize.minimize(
            neg,
            x,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iter,
                "maxfev": 2 * cfg.max_iter,
                "xatol": cfg.tol,
                "fatol": cfg.tol,
                "adaptive": True,
            },
        )
        iters += res.nit
        x_new = np.concatenate(box.project(res.x))
        val = neg(x_new)
        if val >= best - cfg.tol * max(1.0, abs(best)):
            if val < best:
                x, best = x_new, val
            break
        x, best = x_new, val
    return x, -best, iters


def _critical_probe(name, x0, box, params, cfg):
    """Drive the gradient to zero from ``x0``; returns the design or None."""
    m = box.m
    lows = np.concatenate((np.full(m, box.lows[0]), np.full(m, box.lows[1])))

    def resid(x):
        des = MonotoneDesign((0.0, 0.0), x[:m], x[m:])
        return _gradient(name, des, params)

    try:
        res = optimize.least_squares(
            resid, np.maximum(x0, lows * (1 + 1e-9)), bounds=(lows, np.inf), xtol=1e-15, ftol=1e-15, gtol=1e-15,
            max_nfev=200 * x0.size,
        )
    except (ValueError, FloatingPointError):
        return None
    x = res.x
    if np.any(x[:m] <= box.lows[0]) or np.any(x[m:] <= box.lows[1]):
        return None
    return MonotoneDesign((0.0, 0.0), x[:m], x[m:])


def search(config: SearchConfig, params: CovarianceParams) -> SearchResult:
    """Multistart derivative-free maximization of a design criterion.

    Each start draws a random feasible increment vector from its own
    stream, seeded by ``(config.seed, start)``, and runs a projected
    Nelder-Mead search.  Every run records which coordinates ended on a
    bound.  For ``phi`` and ``psi`` an additional probe solves for zeros of
    the analytic gradient from the same start; interior solutions are
    reported with their distance to the proportional family on which the
    criterion vanishes.
    """
    m = config.n - 1
    scale = 1.0 - config.margin
    spans = (config.region.t_span * scale, config.region.s_span * scale)
    box = _Box(m, params, spans, config.floor)
    f = _objective_fn(config.objective, params)
    origin = (config.region.a1, config.region.a2)

    runs, crit = [], []
    for k in range(config.starts):
        rng = np.random.default_rng([config.seed, k])
        x0 = box.random_point(rng)
        d0, delta0 = box.project(x0)
        init_val = f(d0, delta0)
        x, val, iters = _local_maximize(f, x0, box, config)
        des = MonotoneDesign(origin, x[:m], x[m:])
        grad = _gradient(config.objective, des, params)
        runs.append(
            SearchRun(k, init_val, val, des, box.boundary(des.d, des.delta, config.boundary_tol), float(np.linalg.norm(grad)), iters)
        )
        if config.critical_probe and config.objective != "trend" and m >= 2:
            cdes = _critical_probe(config.objective, x0, box, params, config)
            if cdes is not None:
                inside = not any(b is not None for b in box.boundary(cdes.d, cdes.delta, config.boundary_tol))
                gnorm = float(np.linalg.norm(_gradient(config.objective, cdes, params)))
                if inside and gnorm < config.grad_tol:
                    crit.append(CriticalPoint(k, cdes, f(cdes.d, cdes.delta), gnorm, proportional_distance(cdes)))

    best = max(runs, key=lambda r: r.value)
    result = SearchResult(config, best.design, best.value, runs, crit)
    if not result.improved:
        warnings.warn("no start improved on its initial design", NoImprovementWarning, stacklevel=2)
    return result
