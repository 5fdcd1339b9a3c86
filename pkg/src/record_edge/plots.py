"""Figure rendering for the CLI report paths.

Every figure is written straight to a file (Agg backend, no display);
the same data always lands next to it as CSV/JSON, so the figures are
conveniences, not the machine interface.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .adequacy import MonitorResult, TrendFit
from .confidence import ConfidenceCurve
from .estimation import FitResult
from .evd import cdf
from .ingest import format_time
from .prediction import PredictionCurve
from .records import RecordCountStats

__all__ = [
    "save_fit_plot",
    "save_prediction_plot",
    "save_confidence_plot",
    "save_monitor_plot",
    "save_trend_plot",
    "save_records_plot",
]

_FIGSIZE = (6.0, 4.0)
_DPI = 150


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_fit_plot(sample, fit: FitResult, threshold_s: float, path):
    """Empirical vs fitted CDF, on the race-time axis."""
    y = np.sort(np.asarray(sample, dtype=float))
    times = threshold_s - y[::-1]
    ecdf_up = np.arange(1, y.size + 1) / y.size
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.step(times, ecdf_up[::-1], where="post", label="empirical", color="k")
    grid = np.linspace(0, y.max() * 1.05, 400)
    ax.plot(threshold_s - grid, 1 - np.asarray(cdf(fit.params, grid)), "r--",
            label=f"fitted (a={fit.params.a:.3f}, sigma={fit.params.sigma:.3f})")
    ax.set_xlabel("race time (s)")
    ax.set_ylabel("P(result <= t | sub-threshold)")
    ax.legend(loc="lower left")
    return _finish(fig, path)


def save_prediction_plot(curve: PredictionCurve, path, targets=None):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(curve.times, curve.probabilities, color="tab:blue")
    if targets:
        for t, p in targets:
            ax.plot([t], [p], "ko", ms=4)
            ax.annotate(f"{format_time(t)}: {p:.4f}", (t, p),
                        textcoords="offset points", xytext=(6, 6), fontsize=8)
    ax.set_xlabel("target race time (s)")
    ax.set_ylabel("P(at least one race below target)")
    ax.set_ylim(-0.02, 1.02)
    return _finish(fig, path)


def save_confidence_plot(curve: ConfidenceCurve, path, level: float | None = None):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ok = curve.feasible
    ax.plot(curve.focus[ok], curve.confidence[ok], color="tab:blue")
    ax.axvline(curve.mle_focus, color="k", lw=0.8, ls=":")
    if level is not None:
        ax.axhline(level, color="gray", lw=0.8, ls="--")
    ax.set_xlabel(curve.focus_name)
    ax.set_ylabel("confidence level")
    ax.set_ylim(-0.02, 1.02)
    return _finish(fig, path)


def save_monitor_plot(result: MonitorResult, path):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for row in result.envelope:
        ax.plot(result.grid, row, color="tab:red", lw=0.5, alpha=0.4)
    ax.plot(result.grid, result.observed, color="k", lw=1.6, label="observed")
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("margin below threshold (s)")
    ax.set_ylabel("sqrt(n) x (fitted - empirical CDF)")
    ax.legend(loc="upper right")
    return _finish(fig, path)


def save_trend_plot(samples_by_season, trend: TrendFit, path):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for year, vals in samples_by_season:
        ax.plot(np.full(len(vals), year), vals, "o", ms=3, alpha=0.5, color="tab:blue")
    years = np.asarray(trend.season_years, dtype=float)
    scales = trend.sigma0 * np.exp(trend.trend_gamma * trend.x_values)
    ax.plot(years, scales, "r-", label="fitted per-season scale")
    ax.set_xlabel("season (starting year)")
    ax.set_ylabel("margin (s)")
    ax.legend(loc="upper left")
    return _finish(fig, path)


def save_records_plot(counts, stats: RecordCountStats, path):
    counts = np.asarray(counts)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    lo, hi = counts.min(), counts.max()
    bins = np.arange(lo - 0.5, hi + 1.5)
    ax.hist(counts, bins=bins, density=True, color="tab:blue", alpha=0.7)
    ax.axvline(stats.mean, color="r", ls="--", label=f"expected {stats.mean:.3f}")
    ax.set_xlabel(f"records in {stats.n} trials")
    ax.set_ylabel("frequency")
    ax.legend(loc="upper right")
    return _finish(fig, path)
