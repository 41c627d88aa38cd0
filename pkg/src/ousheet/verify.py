"""Randomized cross-checks between the closed forms and the dense oracle.

Each suite draws ``trials`` random cases and reports the largest observed
error against its threshold.  ``perturb`` scales the closed-form side by
``1 + perturb``; a nonzero value is a negative control that must fail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fisher import covariance_information, phi, phi_gradient, psi, psi_gradient, trend_information
from .model import CovarianceParams, GridDesign, MonotoneDesign
from .oracle import (
    build_covariance_monotone,
    closed_form_inverse,
    covariance_information_oracle,
    grid_trend_information,
    trend_information_oracle,
)

__all__ = ["SuiteResult", "random_monotone", "random_params", "run_suites", "SUITES"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    trials: int
    max_error: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_error < self.threshold


def random_params(rng, low=0.2, high=5.0) -> CovarianceParams:
    return CovarianceParams(float(rng.uniform(low, high)), float(rng.uniform(low, high)))


def random_monotone(rng, n, low=0.05, high=2.0) -> MonotoneDesign:
    return MonotoneDesign(
        tuple(rng.uniform(0.1, 1.0, 2)), rng.uniform(low, high, n - 1), rng.uniform(low, high, n - 1)
    )


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def oracle_equivalence(rng, trials, n_max, perturb=0.0):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, n_max + 1))
        p, des = random_params(rng), random_monotone(rng, n)
        fc = covariance_information(des, p)
        fo = covariance_information_oracle(des, p)
        scale = 1.0 + perturb
        worst = max(
            worst,
            _rel(scale * trend_information(des, p), trend_information_oracle(des, p)),
            _rel(scale * fc.m_alpha, fo.m_alpha),
            _rel(scale * fc.m_beta, fo.m_beta),
            _rel(scale * fc.m_alpha_beta, fo.m_alpha_beta),
        )
    return SuiteResult("oracle-equivalence", trials, worst, 1e-9)


def inverse_formula(rng, trials, n_max, perturb=0.0):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, n_max + 1))
        p, des = random_params(rng), random_monotone(rng, n)
        resid = build_covariance_monotone(des, p) @ ((1.0 + perturb) * closed_form_inverse(des, p)) - np.eye(n)
        worst = max(worst, float(np.max(np.abs(resid))))
    return SuiteResult("inverse-formula", trials, worst, 1e-10)


def central_difference(fn, des, p, h=1e-6):
    """Central differences of ``fn(design, params)`` in every increment."""
    m = des.d.size
    g = np.empty(2 * m)
    base = np.concatenate((des.d, des.delta))
    for k in range(2 * m):
        up, dn = base.copy(), base.copy()
        up[k] += h
        dn[k] -= h
        fu = fn(MonotoneDesign(des.origin, up[:m], up[m:]), p)
        fd = fn(MonotoneDesign(des.origin, dn[:m], dn[m:]), p)
        g[k] = (fu - fd) / (2 * h)
    return g


def gradient_check(rng, trials, n_max, perturb=0.0):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(3, max(3, min(n_max, 8)) + 1))
        p, des = random_params(rng), random_monotone(rng, n)
        for fn, grad in ((phi, phi_gradient), (psi, psi_gradient)):
            analytic = (1.0 + perturb) * np.concatenate(grad(des, p))
            numeric = central_difference(fn, des, p)
            # mixed tolerance with the absolute part capped by the gradient's own scale;
            # never looser than dividing by 1 + |g|, and still sensitive when every |g| << 1
            scale = min(1.0, float(np.max(np.abs(analytic))))
            worst = max(worst, float(np.max(np.abs(analytic - numeric) / (scale + np.abs(analytic)))))
    return SuiteResult("gradient", trials, worst, 1e-5)


def kronecker(rng, trials, n_max, perturb=0.0):
    worst = 0.0
    side = max(2, min(n_max, 12))
    for _ in range(trials):
        nt, ns = (int(v) for v in rng.integers(1, side + 1, 2))
        grid = GridDesign(np.cumsum(rng.uniform(0.05, 1.0, nt)), np.cumsum(rng.uniform(0.05, 1.0, ns)))
        p = random_params(rng)
        worst = max(worst, _rel((1.0 + perturb) * grid_trend_information(grid, p), trend_information_oracle(grid, p)))
    return SuiteResult("kronecker", trials, worst, 1e-9)


SUITES = (oracle_equivalence, inverse_formula, gradient_check, kronecker)


def run_suites(trials: int = 50, n_max: int = 10, seed: int = 0, perturb: float = 0.0) -> list:
    """Run every suite with its own substream of ``seed``."""
    out = []
    for k, suite in enumerate(SUITES):
        rng = np.random.default_rng([seed, k])
        out.append(suite(rng, trials, n_max, perturb))
    return out
