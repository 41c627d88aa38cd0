"""Monte-Carlo sampling of the field, GLS trend estimation and ML fitting."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError, NonConvergenceWarning
from .fisher import covariance_information, trend_information
from .model import DEFAULT_FLOOR, CovarianceParams, MonotoneDesign, check_floor, skewed_increments
from .oracle import as_points, correlation_matrix, spd_factor

__all__ = [
    "GENERATOR",
    "BLOCK_SIZE",
    "SimulationConfig",
    "MLFit",
    "block_rng",
    "sample_field",
    "simulate",
    "gls_trend_estimate",
    "log_likelihood",
    "log_likelihood_dense",
    "ml_fit",
    "empirical_fisher_check",
]

#: Recorded in every simulation manifest.
GENERATOR = "numpy PCG64, SeedSequence(seed, spawn_key=(block,)), ziggurat normals"
#: Replications drawn from one substream.
BLOCK_SIZE = 4096


@dataclass(frozen=True)
class SimulationConfig:
    seed: int
    replications: int
    theta_true: float = 0.0
    params_true: CovarianceParams = CovarianceParams(1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError("replications must be at least 1")


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def sample_field(points, params: CovarianceParams, theta: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw ``theta + sigma * L z`` at the given points.

    Returns shape ``(n,)`` when ``size`` is None, else ``(size, n)``.
    """
    c = correlation_matrix(points, params)
    lower = spd_factor(c).lower
    n = c.shape[0]
    z = rng.standard_normal(n if size is None else (size, n))
    return theta + params.sigma * (z @ lower.T)


def simulate(points, params: CovarianceParams, theta: float, seed: int, replications: int) -> np.ndarray:
    """``(replications, n)`` samples; block ``b`` always comes from substream ``(seed, b)``."""
    if replications < 0:
        raise DomainError("replications must be nonnegative")
    c = correlation_matrix(points, params)
    lower = spd_factor(c).lower
    n = c.shape[0]
    out = np.empty((replications, n))
    for b, start in enumerate(range(0, replications, BLOCK_SIZE)):
        stop = min(start + BLOCK_SIZE, replications)
        z = block_rng(seed, b).standard_normal((stop - start, n))
        out[start:stop] = theta + params.sigma * (z @ lower.T)
    return out


def gls_trend_estimate(y, points, params: CovarianceParams):
    """Generalized least-squares estimate of the constant trend.

    ``y`` may hold one observation vector or a stack of them (rows).
    Returns ``(theta_hat, variance)`` with ``variance = sigma^2 / M_theta``.
    """
    c = correlation_matrix(points, params)
    w = spd_factor(c).solve(np.ones(c.shape[0]))
    m_theta = float(w.sum())
    theta_hat = np.asarray(y, dtype=float) @ w / m_theta
    return theta_hat, params.sigma**2 / m_theta


def _innovations(v, q, one_minus):
    # whitened residuals of the Markov chain along a monotone design
    e = np.empty_like(v)
    e[..., 0] = v[..., 0]
    e[..., 1:] = (v[..., 1:] - q * v[..., :-1]) / np.sqrt(one_minus)
    return e


def log_likelihood(y, design: MonotoneDesign, theta: float, params: CovarianceParams, floor: float = DEFAULT_FLOOR) -> float:
    """Gaussian log-density of ``y`` in O(n).

    Uses the Markov factorization of the monotone-design covariance,
    equivalent to the tridiagonal inverse and ``logdet C = sum log(1 - q_i^2)``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (design.n,):
        raise DomainError(f"expected {design.n} observations, got shape {y.shape}")
    x = skewed_increments(design, params)
    check_floor(x, floor)
    q = np.exp(-x)
    one_minus = -np.expm1(-2.0 * x)
    e = _innovations((y - theta) / params.sigma, q, one_minus)
    n = design.n
    logdet = 2 * n * math.log(params.sigma) + float(np.sum(np.log(one_minus)))
    return -0.5 * (n * math.log(2 * math.pi) + logdet + float(e @ e))


def log_likelihood_dense(y, points, theta: float, params: CovarianceParams) -> float:
    """Reference evaluation through a dense Cholesky factor."""
    y = np.asarray(y, dtype=float)
    c = params.sigma**2 * correlation_matrix(points, params)
    f = spd_factor(c)
    r = y - theta
    n = y.size
    return -0.5 * (n * math.log(2 * math.pi) + f.logdet + float(r @ f.solve(r)))


@dataclass(frozen=True)
class MLFit:
    theta: float
    alpha: float
    beta: float
    converged: bool
    loglik: float
    iterations: int


def _profile(y, d, delta, sigma, a, b):
    x = a * d + b * delta
    q = np.exp(-x)
    one_minus = -np.expm1(-2.0 * x)
    if np.any(one_minus <= 0):
        return -np.inf, 0.0
    ey = _innovations(y, q, one_minus)
    e1 = _innovations(np.ones_like(y), q, one_minus)
    theta = float(e1 @ ey) / float(e1 @ e1)
    r = (ey - theta * e1) / sigma
    n = y.size
    ll = -0.5 * (n * math.log(2 * math.pi) + 2 * n * math.log(sigma) + float(np.sum(np.log(one_minus))) + float(r @ r))
    return ll, theta


def ml_fit(
    y,
    design: MonotoneDesign,
    init: CovarianceParams,
    bounds=(1e-3, 1e3),
    max_iter: int = 2000,
) -> MLFit:
    """Profile maximum likelihood for ``(theta, alpha, beta)`` with ``sigma`` known.

    ``theta`` is profiled out by GLS; ``(log alpha, log beta)`` are searched
    with Nelder-Mead inside ``bounds``.  ``converged`` is False (and a
    :class:`NonConvergenceWarning` is issued) when the optimizer fails or an
    estimate ends on a bound; the best iterate is returned either way.
    """
    if design.n < 3:
        raise DomainError("ML fitting of two rates needs at least three points")
    y = np.asarray(y, dtype=float)
    d, delta, sigma = design.d, design.delta, init.sigma
    lo, hi = math.log(bounds[0]), math.log(bounds[1])

    def neg(z):
        z = np.clip(z, lo, hi)
        ll, _ = _profile(y, d, delta, sigma, math.exp(z[0]), math.exp(z[1]))
        return -ll if np.isfinite(ll) else 1e300

    z0 = np.clip([math.log(init.alpha), math.log(init.beta)], lo, hi)
    res = optimize.minimize(neg, z0, method="Nelder-Mead", options={"maxiter": max_iter, "xatol": 1e-8, "fatol": 1e-10})
    z = np.clip(res.x, lo, hi)
    a, b = math.exp(z[0]), math.exp(z[1])
    ll, theta = _profile(y, d, delta, sigma, a, b)
    on_bound = np.any(np.abs(z - lo) < 1e-3) or np.any(np.abs(z - hi) < 1e-3)
    converged = bool(res.success and not on_bound)
    if not converged:
        warnings.warn(f"ML fit did not converge (alpha={a:.4g}, beta={b:.4g})", NonConvergenceWarning, stacklevel=2)
    return MLFit(theta, a, b, converged, ll, int(res.nit))


def empirical_fisher_check(design: MonotoneDesign, config: SimulationConfig, fit: bool = True) -> dict:
    """Compare Monte-Carlo estimator spread with the information predictions.

    The GLS trend variance must equal ``sigma^2 / M_theta`` exactly in
    expectation; the ML covariance of ``(alpha, beta)`` is only
    asymptotically ``M_r^{-1}`` and is reported for inspection.
    """
    p = config.params_true
    pts = design.points()
    y = simulate(pts, p, config.theta_true, config.seed, config.replications)
    theta_hat, var_pred = gls_trend_estimate(y, pts, p)
    reps = config.replications
    var_emp = float(np.var(theta_hat, ddof=1)) if reps > 1 else float("nan")
    # SE of a Gaussian sample variance
    var_se = var_emp * math.sqrt(2.0 / (reps - 1)) if reps > 1 else float("nan")
    report = {
        "replications": reps,
        "seed": config.seed,
        "generator": GENERATOR,
        "m_theta": trend_information(design, p),
        "theta_var_predicted": var_pred,
        "theta_var_empirical": var_emp,
        "theta_var_se": var_se,
        "theta_mean_empirical": float(np.mean(theta_hat)),
    }
    if not fit or design.n < 3:
        return report
    est, failed = [], 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        for row in y:
            r = ml_fit(row, design, p)
            if r.converged:
                est.append((r.alpha, r.beta))
            else:
                failed += 1
    fisher = covariance_information(design, p)
    # Phi = 0 on proportional designs: (alpha, beta) are not separately identifiable
    identifiable = fisher.phi > 0
    pred = np.linalg.inv(fisher.as_array()) if identifiable else np.full((2, 2), np.nan)
    report.update(failed_fits=failed, predicted_cov_alpha_beta=pred, identifiable=identifiable)
    if len(est) > 1:
        est = np.array(est)
        report.update(
            mean_alpha=float(est[:, 0].mean()),
            mean_beta=float(est[:, 1].mean()),
            empirical_cov_alpha_beta=np.cov(est.T),
        )
    return report
