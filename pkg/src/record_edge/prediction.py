"""Record probabilities for a future season or a fixed-size event.

The number N of sub-threshold races over the horizon is either Poisson
with user-chosen mean lambda or a known fixed count. The best margin
Y* = max of N i.i.d. margins then has

    P(Y* <= y0) = exp{-lambda * (1 - a*y0/sigma)**(1/a)}   (Poisson)
    P(Y* <= y0) = G(y0; a, sigma)**N                        (fixed N)

and the probability of a race at level t or better is
p(t) = 1 - P(Y* <= threshold - t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evd import ModelParams, endpoint, _log_survival, _validate_y

__all__ = [
    "VolumeModel",
    "PredictionCurve",
    "best_of_season_cdf",
    "prob_break",
    "prediction_curve",
    "default_time_grid",
]


@dataclass(frozen=True)
class VolumeModel:
    """Race-volume assumption: Poisson mean ``lam`` or exact count ``fixed_n``.

    Exactly one of the two is set. The Poisson mean is a judgment input,
    never estimated; recent seasons saw 19, 9, 3, 18, 14 qualifying races
    and 25 is a reasonable figure for an Olympic season.
    """

    lam: float | None = None
    fixed_n: int | None = None

    def __post_init__(self):
        if (self.lam is None) == (self.fixed_n is None):
            raise ValueError("set exactly one of lam and fixed_n")
        if self.lam is not None and not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.fixed_n is not None and self.fixed_n < 1:
            raise ValueError(f"fixed_n must be >= 1, got {self.fixed_n}")

    @classmethod
    def poisson(cls, lam: float) -> "VolumeModel":
        return cls(lam=float(lam))

    @classmethod
    def fixed(cls, n: int) -> "VolumeModel":
        return cls(fixed_n=int(n))


@dataclass(frozen=True)
class PredictionCurve:
    """Break probability per target time, sorted by race time ascending."""

    times: np.ndarray
    probabilities: np.ndarray
    params: ModelParams
    volume: VolumeModel
    threshold: float


def best_of_season_cdf(params: ModelParams, volume: VolumeModel, y0) -> float | np.ndarray:
    """P(best margin of the horizon <= y0); 1 beyond a finite endpoint."""
    y0 = _validate_y(y0)
    scalar = y0.ndim == 0
    log_sf = _log_survival(params, np.atleast_1d(y0))
    if volume.lam is not None:
        out = np.exp(-volume.lam * np.exp(log_sf))
    else:
        # G^N == exp(N * log(1 - sf)); log1p(-sf) handles sf near 0 and 1
        with np.errstate(divide="ignore"):
            out = np.exp(volume.fixed_n * np.log1p(-np.exp(log_sf)))
    if scalar:
        return float(out[0])
    return out


def prob_break(params: ModelParams, volume: VolumeModel, target_time: float, threshold: float) -> float:
    """Probability of at least one race at ``target_time`` or better.

    The target must beat the threshold; targets at or below a finite
    endpoint time get probability exactly 0.
    """
    if not np.isfinite(target_time) or not np.isfinite(threshold):
        raise ValueError("times must be finite")
    if target_time >= threshold:
        raise ValueError(
            f"target {target_time:.2f}s does not beat the threshold {threshold:.2f}s"
        )
    return 1.0 - best_of_season_cdf(params, volume, threshold - target_time)


def default_time_grid(params: ModelParams, threshold: float, step: float = 0.01) -> np.ndarray:
    """Target times from just under the threshold down to the endpoint
    time (threshold - 15 s when the support is unbounded)."""
    gamma = endpoint(params)
    reach = 15.0 if gamma is None else min(gamma, 15.0)
    n_steps = int(np.floor(reach / step))
    times = threshold - step * np.arange(1, n_steps + 1)
    return times[::-1].copy()


def prediction_curve(params: ModelParams, volume: VolumeModel, threshold: float, time_grid) -> PredictionCurve:
    """Evaluate ``prob_break`` over a grid of target times."""
    times = np.asarray(time_grid, dtype=float)
    if times.size == 0:
        raise ValueError("time grid must be nonempty")
    if np.any(times >= threshold):
        raise ValueError("all grid times must beat the threshold")
    times = np.sort(times)
    probs = 1.0 - best_of_season_cdf(params, volume, threshold - times)
    return PredictionCurve(
        times=times,
        probabilities=np.asarray(probs, dtype=float),
        params=params,
        volume=volume,
        threshold=float(threshold),
    )
