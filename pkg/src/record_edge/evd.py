"""Two-parameter bounded-tail model for margins below a fixed threshold.

A margin y >= 0 (how far a result lands below the qualifying threshold)
follows the distribution

    G(y; a, sigma) = 1 - (1 - a*y/sigma)**(1/a)
    g(y; a, sigma) = (1 - a*y/sigma)**(1/a - 1) / sigma

with scale sigma > 0 and shape a. For a > 0 the support is the bounded
interval [0, sigma/a]; for a <= 0 it is [0, inf). The smooth a -> 0 limit
is the exponential, G(y; 0, sigma) = 1 - exp(-y/sigma). This is the
generalized Pareto family with the shape sign flipped
(``scipy.stats.genpareto(c=-a, scale=sigma)``).

All power terms are evaluated as exp{(1/a) * log1p(-a*y/sigma)}, which is
stable both near the upper endpoint and as a -> 0; below ``A_EPS`` in |a|
the exponential branch is used outright.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "A_EPS",
    "LOGLIK_FLOOR",
    "ModelParams",
    "cdf",
    "pdf",
    "survival",
    "quantile",
    "log_likelihood",
    "endpoint",
    "sample_margins",
]

# |a| below this uses the exponential branch: (1/a)*log1p(-a*y/sigma)
# loses all precision as a -> 0.
A_EPS = 1e-8

# Out-of-support log-likelihood sentinel. Finite (not -inf) so that
# derivative-free optimizers can still rank rejected points.
LOGLIK_FLOOR = -1e12


@dataclass(frozen=True)
class ModelParams:
    """Shape/scale pair (a, sigma); sigma > 0, both finite.

    a > 0 gives a finite best-possible margin sigma/a; a <= 0 gives
    unbounded support.
    """

    a: float
    sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.sigma)):
            raise DomainError(f"parameters must be finite, got {self}")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    def domain_ok(self, y: float) -> bool:
        """True when y is inside the open support: y >= 0 and a*y/sigma < 1."""
        return y >= 0 and self.a * y / self.sigma < 1


def _validate_y(y):
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("margins must be finite")
    if np.any(y < 0):
        raise DomainError("margins must be >= 0")
    return y


def _scalar_or_array(x, scalar: bool):
    return float(x) if scalar else x


def _log_survival(params: ModelParams, y: np.ndarray) -> np.ndarray:
    """log{1 - G(y)}, with -inf at and beyond a finite endpoint."""
    a, sigma = params.a, params.sigma
    if abs(a) < A_EPS:
        return -y / sigma
    t = a * y / sigma
    out = np.full(y.shape, -np.inf)
    inside = t < 1
    with np.errstate(divide="ignore"):
        out[inside] = np.log1p(-t[inside]) / a
    return out


def cdf(params: ModelParams, y) -> float | np.ndarray:
    """Probability that a margin does not exceed y.

    Evaluates G(y; a, sigma) clamped to [0, 1]; exactly 1 for y at or
    beyond a finite endpoint sigma/a.
    """
    y = _validate_y(y)
    scalar = y.ndim == 0
    out = -np.expm1(_log_survival(params, np.atleast_1d(y)))
    np.clip(out, 0.0, 1.0, out=out)
    return _scalar_or_array(out[0] if scalar else out, scalar)


def survival(params: ModelParams, y) -> float | np.ndarray:
    """Upper tail 1 - G(y), computed without cancellation."""
    y = _validate_y(y)
    scalar = y.ndim == 0
    out = np.exp(_log_survival(params, np.atleast_1d(y)))
    return _scalar_or_array(out[0] if scalar else out, scalar)


def pdf(params: ModelParams, y) -> float | np.ndarray:
    """Density g(y; a, sigma) on the support, 0 outside.

    At an exact finite endpoint the value is the one-sided limit: 0 for
    a < 1, 1/sigma for a = 1, and +inf for a > 1 (the fitted regime for
    sports margins has 0 < a < 1, where 0 is the correct limit).
    """
    y = _validate_y(y)
    scalar = y.ndim == 0
    yv = np.atleast_1d(y)
    a, sigma = params.a, params.sigma

    if abs(a) < A_EPS:
        out = np.exp(-yv / sigma) / sigma
        return _scalar_or_array(out[0] if scalar else out, scalar)

    t = a * yv / sigma
    out = np.zeros(yv.shape)
    inside = t < 1
    out[inside] = np.exp((1.0 / a - 1.0) * np.log1p(-t[inside])) / sigma
    if a >= 1:
        at_end = t == 1
        out[at_end] = (1.0 / sigma) if a == 1 else np.inf
    return _scalar_or_array(out[0] if scalar else out, scalar)


def quantile(params: ModelParams, u) -> float | np.ndarray:
    """Inverse of the cdf: the margin not exceeded with probability u.

    Returns (sigma/a) * {1 - (1-u)**a}, or -sigma*log(1-u) in the
    exponential branch. Requires 0 <= u < 1.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)) or np.any(u < 0) or np.any(u >= 1):
        raise DomainError("probabilities must lie in [0, 1)")
    a, sigma = params.a, params.sigma
    if abs(a) < A_EPS:
        out = -sigma * np.log1p(-u)
    else:
        out = -(sigma / a) * np.expm1(a * np.log1p(-u))
    scalar = u.ndim == 0
    return _scalar_or_array(out, scalar)


def log_likelihood(params: ModelParams, sample) -> float:
    """Joint log-density of a margin sample.

    Sum over the sample of -log(sigma) + (1/a - 1)*log(1 - a*y_i/sigma);
    returns the ``LOGLIK_FLOOR`` sentinel when any observation falls
    outside the support.
    """
    y = np.asarray(sample, dtype=float)
    if y.size == 0:
        raise ValueError("sample must be nonempty")
    if not np.all(np.isfinite(y)):
        raise DomainError("margins must be finite")
    return _loglik(params.a, params.sigma, y)


def _loglik(a: float, sigma: float, y: np.ndarray) -> float:
    """Fast path used by the optimizers; assumes finite y, sigma > 0."""
    if np.any(y < 0):
        return LOGLIK_FLOOR
    n = y.size
    if abs(a) < A_EPS:
        return -n * np.log(sigma) - float(np.sum(y)) / sigma
    t = a * y / sigma
    if np.max(t) >= 1:
        return LOGLIK_FLOOR
    return -n * np.log(sigma) + (1.0 / a - 1.0) * float(np.sum(np.log1p(-t)))


def endpoint(params: ModelParams) -> float | None:
    """Largest attainable margin sigma/a for a > 0; None when unbounded."""
    if params.a > 0:
        return params.sigma / params.a
    return None


def sample_margins(params: ModelParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw margins by inverse-transform sampling of i.i.d. uniforms."""
    return quantile(params, rng.uniform(size=size))
