"""Model-adequacy checks: the fitted-vs-empirical monitoring process with
a simulated envelope, and a log-linear scale trend across seasons.

The monitoring process is Z(y) = sqrt(n) * {G(y; fitted) - G_n(y)} with
G_n the right-continuous empirical CDF. Its natural variability under
the model is calibrated by parametric bootstrap: simulated datasets are
drawn by inverse-transform sampling, refitted (by default), and their
monitoring curves form a pointwise min/max band around the observed one.

The trend model lets the scale drift across seasons,
sigma_j = sigma * exp(trend * x_j) with x_j the season year minus the
season-year average, while the shape stays common.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .estimation import fit_mle
from .evd import LOGLIK_FLOOR, ModelParams, _loglik, cdf, quantile

__all__ = [
    "MonitorResult",
    "TrendFit",
    "default_monitor_grid",
    "monitor_process",
    "monitor_sup",
    "monitor_envelope",
    "fit_trend",
]


def default_monitor_grid(y_max: float = 10.0, points: int = 501) -> np.ndarray:
    return np.linspace(0.0, y_max, points)


def _ecdf(sample: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Right-continuous empirical CDF on a grid; ties share a jump."""
    return np.searchsorted(np.sort(sample), grid, side="right") / sample.size


def monitor_process(sample, params: ModelParams, grid=None) -> np.ndarray:
    """Normalised fitted-minus-empirical CDF difference on a grid."""
    y = np.asarray(sample, dtype=float)
    if y.size == 0:
        raise ValueError("sample must be nonempty")
    grid = default_monitor_grid() if grid is None else np.asarray(grid, dtype=float)
    return np.sqrt(y.size) * (cdf(params, grid) - _ecdf(y, grid))


def monitor_sup(sample, params: ModelParams) -> float:
    """Exact sup of |Z| over all margins, i.e. sqrt(n) times the
    Kolmogorov-Smirnov distance between sample and fitted model.

    Evaluated at the order statistics and their left limits, where the
    sup of the step-function difference is attained (a plotting grid
    cannot reach the left limits).
    """
    y = np.sort(np.asarray(sample, dtype=float))
    if y.size == 0:
        raise ValueError("sample must be nonempty")
    n = y.size
    g = cdf(params, y)
    steps = np.arange(1, n + 1) / n
    d = max(float(np.max(np.abs(g - steps))), float(np.max(np.abs(g - (steps - 1 / n)))))
    return np.sqrt(n) * d


@dataclass(frozen=True)
class MonitorResult:
    """Observed monitoring curve with its simulated envelope.

    ``envelope`` has one row per surviving replicate; ``dropped`` counts
    replicates whose refit failed (they are never reused).
    ``exceed_fraction`` is the share of grid points where the observed
    curve leaves the pointwise min/max band -- a descriptive quantity,
    not a formal test.
    """

    grid: np.ndarray
    observed: np.ndarray
    envelope: np.ndarray
    sim: int
    dropped: int
    exceed_fraction: float
    seed: int
    refit: bool
    params: ModelParams


def monitor_envelope(sample, params: ModelParams, sim: int = 25, seed: int = 0,
                     grid=None, refit: bool = True) -> MonitorResult:
    """Parametric-bootstrap envelope for the monitoring process.

    Each of ``sim`` replicates draws n margins from the fitted model by
    inverse transform, refits the model (set ``refit=False`` to plug the
    original fit into every curve instead), and records its monitoring
    curve. Replicate streams are split deterministically from ``seed``,
    so results do not depend on evaluation order.
    """
    y = np.asarray(sample, dtype=float)
    if sim < 1:
        raise ValueError("sim must be >= 1")
    grid = default_monitor_grid() if grid is None else np.asarray(grid, dtype=float)
    observed = monitor_process(y, params, grid)

    curves = []
    dropped = 0
    for child in np.random.SeedSequence(seed).spawn(sim):
        rng = np.random.default_rng(child)
        y_star = quantile(params, rng.uniform(size=y.size))
        rep_params = params
        if refit:
            rep_fit = fit_mle(y_star)
            if not rep_fit.converged:
                dropped += 1
                continue
            rep_params = rep_fit.params
        curves.append(monitor_process(y_star, rep_params, grid))

    envelope = np.asarray(curves)
    if envelope.size:
        lo, hi = envelope.min(axis=0), envelope.max(axis=0)
        exceed = float(np.mean((observed < lo) | (observed > hi)))
    else:
        exceed = float("nan")
    return MonitorResult(
        grid=grid,
        observed=observed,
        envelope=envelope,
        sim=sim,
        dropped=dropped,
        exceed_fraction=exceed,
        seed=seed,
        refit=refit,
        params=params,
    )


@dataclass(frozen=True)
class TrendFit:
    """Season-trend fit: common shape, per-season scale
    sigma * exp(trend_gamma * x_j)."""

    a: float
    sigma0: float
    trend_gamma: float
    se_trend: float | None
    x_values: np.ndarray
    season_years: tuple[int, ...]
    season_counts: tuple[int, ...]
    loglik: float
    converged: bool

    @property
    def wald_z(self) -> float | None:
        if self.se_trend is None:
            return None
        return self.trend_gamma / self.se_trend


def _trend_loglik(a: float, sigma0: float, g: float, groups, x: np.ndarray) -> float:
    total = 0.0
    for xj, yj in zip(x, groups):
        ll = _loglik(a, sigma0 * np.exp(g * xj), yj)
        if ll <= LOGLIK_FLOOR:
            return LOGLIK_FLOOR
        total += ll
    return total


def fit_trend(samples_by_season, trend_fixed: float | None = None) -> TrendFit:
    """Fit the season-trend model by maximum likelihood.

    Parameters
    ----------
    samples_by_season : list of (season_year, margins)
        At least two seasons, each nonempty; each race contributes one
        likelihood term. Season years need not be distinct, but the
        trend is only identifiable when they are.
    trend_fixed : float, optional
        Freeze the trend coefficient at this value and fit (a, sigma)
        only; with 0 this reproduces the pooled two-parameter fit.
    """
    entries = [(int(year), np.asarray(vals, dtype=float)) for year, vals in samples_by_season]
    if len(entries) < 2:
        raise ValueError("trend needs at least two seasons")
    for year, vals in entries:
        if vals.size == 0:
            raise ValueError(f"season {year} has no margins")
    years = np.array([year for year, _ in entries], dtype=float)
    groups = [vals for _, vals in entries]
    counts = tuple(int(v.size) for v in groups)
    x = years - years.mean()
    pooled = np.concatenate(groups)
    mean = float(pooled.mean())

    # identical season years leave the trend direction flat: pin it at 0
    # so the model collapses to the pooled two-parameter fit
    if trend_fixed is None and np.ptp(x) == 0:
        trend_fixed = 0.0
    free_trend = trend_fixed is None

    def objective(theta):
        if free_trend:
            a, logsig, g = theta
        else:
            (a, logsig), g = theta, trend_fixed
        if abs(logsig) > 700 or abs(g * x).max() > 700:
            return -LOGLIK_FLOOR
        return -_trend_loglik(a, np.exp(logsig), g, groups, x)

    x0 = [0.01, np.log(mean)] + ([0.0] if free_trend else [])
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxfev": 3000, "fatol": 1e-10, "xatol": 1e-10})
    res2 = minimize(objective, res.x, method="Nelder-Mead",
                    options={"maxfev": 3000, "fatol": 1e-10, "xatol": 1e-10})
    best = res2 if res2.fun <= res.fun else res
    if free_trend:
        a_hat, logsig_hat, g_hat = best.x
    else:
        (a_hat, logsig_hat), g_hat = best.x, trend_fixed
    sigma_hat = float(np.exp(logsig_hat))
    loglik = -float(best.fun)
    converged = bool(best.success) and loglik > LOGLIK_FLOOR / 2

    se_trend = None
    if free_trend and converged:
        se_trend = _trend_se(np.array([a_hat, logsig_hat, g_hat]), groups, x)

    return TrendFit(
        a=float(a_hat),
        sigma0=sigma_hat,
        trend_gamma=float(g_hat),
        se_trend=se_trend,
        x_values=x,
        season_years=tuple(int(y) for y in years),
        season_counts=counts,
        loglik=loglik,
        converged=converged,
    )


def _trend_se(theta: np.ndarray, groups, x: np.ndarray) -> float | None:
    """Trend-coefficient standard error from a central-difference Hessian
    in (a, log sigma, trend)."""
    h = np.array([1e-5 * max(1.0, abs(theta[0])), 1e-5, 1e-5 * max(1.0, abs(theta[2]))])

    def f(t):
        return _trend_loglik(t[0], np.exp(t[1]), t[2], groups, x)

    k = theta.size
    hess = np.empty((k, k))
    f0 = f(theta)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        hess[i, i] = (f(theta + ei) - 2 * f0 + f(theta - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            hess[i, j] = hess[j, i] = (
                f(theta + ei + ej) - f(theta + ei - ej) - f(theta - ei + ej) + f(theta - ei - ej)
            ) / (4 * h[i] * h[j])
    try:
        cov = np.linalg.inv(-hess)
    except np.linalg.LinAlgError:
        return None
    var = cov[2, 2]
    return float(np.sqrt(var)) if var > 0 else None
