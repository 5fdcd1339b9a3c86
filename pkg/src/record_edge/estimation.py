"""Maximum-likelihood fitting of the margin model with observed-information
standard errors.

The likelihood is maximized by Nelder-Mead over (a, log sigma), with the
out-of-support sentinel from :mod:`record_edge.evd` acting as a rejection
penalty; the search is restarted once from the best vertex. Standard
errors come from a central-difference Hessian of the log-likelihood in
(a, log sigma), inverted and mapped back to (a, sigma).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .evd import LOGLIK_FLOOR, ModelParams, _loglik

__all__ = ["FitResult", "fit_mle", "observed_information_se", "exponential_init"]

# Optimizer budget and tolerances (see module docstring).
_MAX_EVALS = 2000
_FATOL = 1e-10
_XATOL = 1e-10
_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class FitResult:
    """Outcome of a maximum-likelihood fit.

    ``se_a``/``se_sigma`` are None when the observed information is not
    positive definite. ``boundary`` marks fits driven onto the support
    boundary a*max(y)/sigma = 1, which are reported as non-converged
    rather than as interior maxima.
    """

    params: ModelParams
    se_a: float | None
    se_sigma: float | None
    loglik: float
    n: int
    converged: bool
    iterations: int
    boundary: bool = False

    @property
    def se_available(self) -> bool:
        return self.se_a is not None and self.se_sigma is not None


def exponential_init(sample) -> ModelParams:
    """Method-of-moments exponential starting point: near-zero shape,
    scale equal to the sample mean (always inside the domain)."""
    y = np.asarray(sample, dtype=float)
    mean = float(np.mean(y))
    if mean <= 0:
        raise ValueError("sample mean must be positive")
    a0 = 0.01
    if a0 * float(np.max(y)) / mean >= 1:
        a0 = 0.0
    return ModelParams(a0, mean)


def fit_mle(sample, init: ModelParams | None = None) -> FitResult:
    """Fit (a, sigma) to a margin sample by maximum likelihood.

    Parameters
    ----------
    sample : array_like
        Margins y_i >= 0; at least 3 values, not all equal.
    init : ModelParams, optional
        Starting point; the exponential method-of-moments fit is used by
        default, and the returned optimum is never worse than either.

    Returns
    -------
    FitResult with the MLE, observed-information standard errors (when
    available), and convergence information. Non-convergence is reported
    through ``converged=False``, never as a silently wrong answer.
    """
    y = np.asarray(sample, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise ValueError("need at least 3 margins to fit two parameters")
    if not np.all(np.isfinite(y)) or np.any(y < 0):
        raise ValueError("margins must be finite and >= 0")
    if np.ptp(y) == 0:
        raise ValueError("degenerate sample: all margins equal")

    fallback = exponential_init(y)
    starts = [fallback]
    if init is not None:
        starts.insert(0, init)

    def objective(theta):
        a, logsig = theta
        if not np.isfinite(a) or not np.isfinite(logsig) or abs(logsig) > 700:
            return -LOGLIK_FLOOR
        return -_loglik(a, np.exp(logsig), y)

    best_x = None
    best_f = np.inf
    total_iter = 0
    success = False
    for start in starts:
        x0 = np.array([start.a, np.log(start.sigma)])
        evals_left = _MAX_EVALS
        x = x0
        for _ in range(2):  # one restart from the best vertex
            res = minimize(
                objective,
                x,
                method="Nelder-Mead",
                options={
                    "maxfev": evals_left,
                    "fatol": _FATOL,
                    "xatol": _XATOL,
                },
            )
            x = res.x
            total_iter += res.nit
            evals_left -= res.nfev
            if evals_left <= 0:
                break
        if res.fun < best_f:
            best_f = res.fun
            best_x = x
            success = bool(res.success)

    # Never return a point worse than a supplied init or the fallback.
    candidates = [(objective([p.a, np.log(p.sigma)]), (p.a, np.log(p.sigma))) for p in starts]
    candidates.append((best_f, tuple(best_x)))
    best_f, (a_hat, logsig_hat) = min(candidates, key=lambda c: c[0])
    sigma_hat = float(np.exp(logsig_hat))
    params = ModelParams(float(a_hat), sigma_hat)
    loglik = float(-best_f)

    boundary = bool(params.a * float(np.max(y)) / params.sigma > 1 - _BOUNDARY_TOL)
    converged = bool(success and not boundary and loglik > LOGLIK_FLOOR / 2)

    se_a = se_sigma = None
    if converged:
        se_a, se_sigma = observed_information_se(y, params)

    return FitResult(
        params=params,
        se_a=se_a,
        se_sigma=se_sigma,
        loglik=loglik,
        n=y.size,
        converged=converged,
        iterations=total_iter,
        boundary=boundary,
    )


def observed_information_se(sample, params: ModelParams, step: float = 1e-5):
    """Standard errors from the inverse negative Hessian at ``params``.

    The Hessian of the log-likelihood is formed by central finite
    differences in (a, log sigma) with steps step*max(1, |a|) and step,
    then the covariance is mapped to (a, sigma) by the delta method.
    Returns (None, None) when the negative Hessian is not positive
    definite.
    """
    y = np.asarray(sample, dtype=float)
    a, sigma = params.a, params.sigma
    theta = np.array([a, np.log(sigma)])
    h = np.array([step * max(1.0, abs(a)), step])

    def f(t):
        return _loglik(t[0], np.exp(t[1]), y)

    hess = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            if i == j:
                ei = np.zeros(2)
                ei[i] = h[i]
                hess[i, i] = (f(theta + ei) - 2 * f(theta) + f(theta - ei)) / h[i] ** 2
            else:
                ei, ej = np.zeros(2), np.zeros(2)
                ei[i], ej[j] = h[i], h[j]
                hess[i, j] = (
                    f(theta + ei + ej) - f(theta + ei - ej) - f(theta - ei + ej) + f(theta - ei - ej)
                ) / (4 * h[i] * h[j])

    neg_hess = -hess
    try:
        np.linalg.cholesky(neg_hess)
    except np.linalg.LinAlgError:
        return None, None
    cov = np.linalg.inv(neg_hess)
    # d sigma / d log sigma = sigma
    jac = np.diag([1.0, sigma])
    cov_nat = jac @ cov @ jac
    if np.any(np.diag(cov_nat) <= 0):
        return None, None
    se = np.sqrt(np.diag(cov_nat))
    return float(se[0]), float(se[1])
