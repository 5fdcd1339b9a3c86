"""Profile-likelihood deviance machinery: confidence curves and intervals
for record probabilities and for the largest attainable margin.

For a focus parameter psi (a break probability p, or the endpoint
gamma = sigma/a) the profile log-likelihood is the maximum of the sample
log-likelihood subject to the focus being held fixed. The deviance
D(psi) = 2*{max profile - profile(psi)} maps to a confidence curve
cc(psi) = Gamma1(D(psi)) through the chi-squared(1) CDF, whose level-alpha
set is the alpha confidence interval.

Both profiles reduce to one-dimensional problems:

* probability focus: the constraint pins the survival probability q at
  the target margin, which solves for the scale in closed form,
  sigma(a) = a*y0 / (1 - q**a); the remaining maximization over the shape
  is a bounded scalar search.
* endpoint focus: on the ray sigma = a*gamma the stationarity condition
  has the closed-form solution a*(gamma) = -mean(log(1 - y_i/gamma)),
  so each profile value is one vectorized expression.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erf

from .errors import DomainError
from .estimation import FitResult, fit_mle
from .evd import A_EPS, LOGLIK_FLOOR, ModelParams, _log_survival, _loglik
from .ingest import format_time

__all__ = [
    "ConfidenceCurve",
    "EndpointEstimate",
    "Interval",
    "chi2_1_cdf",
    "profile_prob",
    "profile_endpoint",
    "interval_from_curve",
]

# Widest shape bracket searched by the probability profile.
_A_LO = -0.5
_A_CAP = 10.0
# Interval endpoints are refined to this absolute focus precision.
_FOCUS_TOL = 1e-4


def chi2_1_cdf(d) -> float | np.ndarray:
    """CDF of the chi-squared distribution with 1 degree of freedom.

    Equals erf(sqrt(d/2)); the error function evaluation is accurate to
    better than 1e-12.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ValueError("deviance must be finite and >= 0")
    out = erf(np.sqrt(d / 2.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Interval:
    """Level set of a confidence curve. ``lo_open``/``hi_open`` mark ends
    where the level set ran off the computed grid."""

    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False


@dataclass(frozen=True)
class ConfidenceCurve:
    """Deviance and confidence level over a grid of focus values."""

    focus_name: str
    focus: np.ndarray
    deviance: np.ndarray
    confidence: np.ndarray
    feasible: np.ndarray
    loglik_profile: np.ndarray
    mle_focus: float
    reference_loglik: float
    unimodal: bool = True
    mle_attained: bool = True


def _unimodal_ok(dev: np.ndarray, feasible: np.ndarray) -> bool:
    d = dev[feasible]
    if d.size < 3:
        return True
    k = int(np.argmin(d))
    tol = 1e-9 * max(1.0, float(np.max(d[np.isfinite(d)], initial=1.0)))
    left_ok = np.all(np.diff(d[: k + 1]) <= tol)
    right_ok = np.all(np.diff(d[k:]) >= -tol)
    return bool(left_ok and right_ok)


def _build_curve(eval_profile, grid, fit_loglik, focus_name, refine_levels):
    """Assemble a ConfidenceCurve from a pointwise profile evaluator.

    ``eval_profile(focus)`` returns the profiled log-likelihood or None
    when the constraint is infeasible at that focus. Points near each
    requested level crossing are added by bisection until the crossing
    is bracketed to ``_FOCUS_TOL`` focus units.
    """
    points = {float(x): eval_profile(float(x)) for x in np.asarray(grid, dtype=float)}

    def assemble():
        xs = np.array(sorted(points))
        ll = np.array([LOGLIK_FLOOR if points[x] is None else points[x] for x in xs])
        feas = np.array([points[x] is not None for x in xs])
        return xs, ll, feas

    xs, ll, feas = assemble()
    if not np.any(feas):
        raise DomainError(f"profile for {focus_name} infeasible over the whole grid")
    prof_max = float(np.max(ll[feas]))
    attained = prof_max >= fit_loglik - 1e-6
    ref = prof_max if attained else fit_loglik

    def confidence_of(loglik_val):
        return chi2_1_cdf(max(0.0, 2.0 * (ref - loglik_val)))

    for level in refine_levels:
        # bisect every sign change of cc - level between feasible neighbours
        for _ in range(64):
            xs, ll, feas = assemble()
            cc = np.array([confidence_of(v) if ok else np.nan for v, ok in zip(ll, feas)])
            refined = False
            for i in range(len(xs) - 1):
                if not (feas[i] and feas[i + 1]):
                    continue
                if (cc[i] - level) * (cc[i + 1] - level) < 0 and xs[i + 1] - xs[i] > _FOCUS_TOL:
                    mid = 0.5 * (xs[i] + xs[i + 1])
                    if mid not in points:
                        points[mid] = eval_profile(mid)
                        refined = True
            if not refined:
                break

    xs, ll, feas = assemble()
    prof_max = float(np.max(ll[feas]))
    attained = prof_max >= fit_loglik - 1e-6
    ref = prof_max if attained else fit_loglik
    dev = np.where(feas, np.maximum(0.0, 2.0 * (ref - ll)), np.nan)
    conf = np.where(feas, chi2_1_cdf(np.nan_to_num(dev)), np.nan)
    mle_focus = float(xs[feas][int(np.argmax(ll[feas]))])
    return ConfidenceCurve(
        focus_name=focus_name,
        focus=xs,
        deviance=dev,
        confidence=conf,
        feasible=feas,
        loglik_profile=np.where(feas, ll, np.nan),
        mle_focus=mle_focus,
        reference_loglik=ref,
        unimodal=_unimodal_ok(dev, feas),
        mle_attained=attained,
    )


def _maximize_scalar(f, lo, hi, coarse=33):
    """Maximize f on [lo, hi]: coarse scan, then bounded Brent refinement."""
    xs = np.linspace(lo, hi, coarse)
    vals = np.array([f(x) for x in xs])
    k = int(np.argmax(vals))
    lo2 = xs[max(k - 1, 0)]
    hi2 = xs[min(k + 1, len(xs) - 1)]
    res = minimize_scalar(lambda x: -f(x), bounds=(lo2, hi2), method="bounded",
                          options={"xatol": 1e-10})
    if -res.fun >= vals[k]:
        return float(res.x), float(-res.fun)
    return float(xs[k]), float(vals[k])


def _required_survival(p: float, volume) -> float | None:
    """Survival probability q at the target margin implied by
    P(break) = p under the volume model; None when infeasible."""
    if not 0.0 <= p < 1.0:
        return None
    if volume.lam is not None:
        q = -np.log1p(-p) / volume.lam
    else:
        q = -np.expm1(np.log1p(-p) / volume.fixed_n)
    return float(q) if q < 1.0 else None


def _sigma_for_survival(a: float, q: float, y0: float) -> float:
    """Scale making the survival at y0 equal q, for shape a."""
    if abs(a) < A_EPS:
        return -y0 / np.log(q)
    return a * y0 / -np.expm1(a * np.log(q))


def profile_prob(sample, y0: float, volume, p_grid=None,
                 fit: FitResult | None = None, refine_levels=(0.9,)) -> ConfidenceCurve:
    """Confidence curve for the probability of beating margin ``y0``.

    The volume model is held fixed while (a, sigma) vary along the
    constraint; each profiled point reduces to a bounded search over the
    shape, with the scale eliminated in closed form.
    """
    y = np.asarray(sample, dtype=float)
    if fit is None:
        fit = fit_mle(y)
    if y0 <= 0 or not np.isfinite(y0):
        raise DomainError("target margin must be positive and finite")
    max_y = float(np.max(y))

    from .prediction import best_of_season_cdf  # local import, avoids cycle

    p_hat = 1.0 - best_of_season_cdf(fit.params, volume, y0)

    if p_grid is None:
        p_grid = np.linspace(0.0, 0.999, 201)
    p_grid = np.unique(np.append(np.asarray(p_grid, dtype=float), p_hat))
    if np.any(p_grid < 0) or np.any(p_grid >= 1):
        raise DomainError("p grid must lie in [0, 1)")

    def eval_profile(p):
        q = _required_survival(p, volume)
        if q is None:
            return None
        if q == 0.0:
            # p = 0 is the region constraint endpoint <= y0, feasible only
            # when every observation lies below y0; profile the endpoint
            # ray over gamma in (max_y, y0]
            if max_y >= y0:
                return None

            def obj_gamma(gamma):
                ll, _ = _gamma_profile_loglik(y, np.array([gamma]))
                return float(ll[0])

            _, best = _maximize_scalar(obj_gamma, max_y + 1e-9 * max(1.0, max_y), y0)
            return best if best > LOGLIK_FLOOR / 2 else None
        a_hi = _A_CAP
        if y0 < max_y:
            # domain needs q**a > 1 - y0/max_y
            a_hi = min(a_hi, np.log1p(-y0 / max_y) / np.log(q) * (1 - 1e-9))
        if a_hi <= _A_LO:
            return None

        def obj(a):
            return _loglik(a, _sigma_for_survival(a, q, y0), y)

        _, best = _maximize_scalar(obj, _A_LO, a_hi)
        # the unconstrained shape is always a candidate at its own p-hat
        best = max(best, obj(fit.params.a))
        return best if best > LOGLIK_FLOOR / 2 else None

    return _build_curve(eval_profile, p_grid, fit.loglik, "p_break", refine_levels)


def _gamma_profile_loglik(y: np.ndarray, gammas: np.ndarray):
    """Profile log-likelihood over endpoints, maximizing the shape on the
    ray sigma = a*gamma.

    The stationarity condition gives a*(gamma) = -mean(log(1 - y/gamma))
    exactly, so the profile is evaluated in closed form. Requires
    gamma > max(y); others come back as the sentinel floor.
    """
    n = y.size
    out = np.full(gammas.shape, LOGLIK_FLOOR)
    a_star = np.full(gammas.shape, np.nan)
    ok = gammas > np.max(y)
    if np.any(ok):
        g = gammas[ok]
        astar = -np.mean(np.log1p(-y[:, None] / g[None, :]), axis=0)
        out[ok] = -n * (np.log(astar * g) + 1.0 - astar)
        a_star[ok] = astar
    return out, a_star


@dataclass(frozen=True)
class EndpointEstimate:
    """Largest-attainable-margin estimate with its confidence curve.

    ``r0_seconds`` is the ultimate race time threshold - gamma_hat; both
    are None when the fitted shape is not positive.
    """

    gamma_hat: float | None
    r0_seconds: float | None
    r0: str | None
    threshold_s: float
    curve: ConfidenceCurve
    fit: FitResult = field(repr=False, compare=False, default=None)


def profile_endpoint(sample, gamma_grid=None, threshold_s: float = 370.0,
                     fit: FitResult | None = None, refine_levels=(0.9,)) -> EndpointEstimate:
    """Confidence curve for the endpoint gamma = sigma/a, with the
    corresponding ultimate race time threshold - gamma.

    When the fitted shape is not positive there is no finite endpoint at
    the MLE; the curve is still computed wherever feasible and its
    deviance is measured against the unconstrained maximum.
    """
    y = np.asarray(sample, dtype=float)
    if fit is None:
        fit = fit_mle(y)
    max_y = float(np.max(y))

    if gamma_grid is None:
        gamma_grid = np.linspace(max_y + 0.01, max_y + 30.0, 201)
    gamma_grid = np.asarray(gamma_grid, dtype=float)

    gamma_hat = None
    if fit.params.a > 0:
        gamma_hat = fit.params.sigma / fit.params.a
        if gamma_hat > max_y:
            gamma_grid = np.unique(np.append(gamma_grid, gamma_hat))

    def eval_profile(gamma):
        ll, _ = _gamma_profile_loglik(y, np.array([gamma]))
        return float(ll[0]) if ll[0] > LOGLIK_FLOOR / 2 else None

    curve = _build_curve(eval_profile, gamma_grid, fit.loglik, "endpoint_margin", refine_levels)

    if gamma_hat is None:
        return EndpointEstimate(None, None, None, float(threshold_s), curve, fit)
    r0_seconds = float(threshold_s) - gamma_hat
    return EndpointEstimate(
        gamma_hat=gamma_hat,
        r0_seconds=r0_seconds,
        r0=format_time(r0_seconds),
        threshold_s=float(threshold_s),
        curve=curve,
        fit=fit,
    )


def interval_from_curve(curve: ConfidenceCurve, level: float) -> Interval:
    """Extract the level set {focus : confidence <= level} from a curve.

    Endpoints between grid points are located by inverse interpolation
    of the confidence values (the grid is already refined near the
    crossings). An end where the whole grid stays at or below the level
    is reported as open-ended.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    xs = curve.focus[curve.feasible]
    cc = curve.confidence[curve.feasible]
    inside = np.flatnonzero(cc <= level)
    if inside.size == 0:
        return Interval(curve.mle_focus, curve.mle_focus)

    first, last = int(inside[0]), int(inside[-1])

    def crossing(i_out, i_in):
        c0, c1 = cc[i_out], cc[i_in]
        if c1 == c0:
            return float(xs[i_in])
        w = (level - c0) / (c1 - c0)
        return float(xs[i_out] + w * (xs[i_in] - xs[i_out]))

    if first == 0:
        lo, lo_open = float(xs[0]), True
    else:
        lo, lo_open = crossing(first - 1, first), False
    if last == len(xs) - 1:
        hi, hi_open = float(xs[-1]), True
    else:
        hi, hi_open = crossing(last + 1, last), False

    # a natural boundary reached by the grid is a closed endpoint (for
    # probabilities the curve is truncated at 0 and 1 by construction)
    if curve.focus_name == "p_break":
        if lo_open and xs[0] == 0.0:
            lo, lo_open = 0.0, False
        if hi_open and xs[-1] == 1.0:
            hi, hi_open = 1.0, False
    return Interval(lo, hi, lo_open, hi_open)
