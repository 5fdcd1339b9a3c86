"""Command-line interface.

Subcommands: fit, predict, confcurve, monitor, trend, records. Every
command is deterministic given (input, flags, seed), embeds its full
effective configuration in a JSON report, writes curve data as CSV (or
JSON with --format json), and renders the matching figure as PNG unless
--no-figures is given.

Exit codes: 0 success, 1 computation failure (e.g. non-convergence with
--strict), 2 input or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .adequacy import default_monitor_grid, fit_trend, monitor_envelope, monitor_sup
from .confidence import interval_from_curve, profile_endpoint, profile_prob
from .errors import DomainError, ParseError
from .estimation import fit_mle
from .evd import ModelParams, endpoint
from .ingest import (
    DEFAULT_THRESHOLD_S,
    format_time,
    parse_time,
    read_results_csv,
    to_exceedance,
)
from .prediction import VolumeModel, default_time_grid, prediction_curve, prob_break
from .records import expected_records, simulate_record_counts

DEFAULT_SEED = 1
SEED_ENV_VAR = "RECORD_EDGE_SEED"


def _add_common(p: argparse.ArgumentParser, *, needs_input: bool):
    p.add_argument("--input", help="CSV of race results (skater,nation,venue,date,time)",
                   required=False)
    p.add_argument("--threshold", default="6:10.00", metavar="M:SS.ss",
                   help="qualifying threshold (default 6:10.00)")
    p.add_argument("--lambda", dest="lam", type=float, default=25.0,
                   help="expected sub-threshold races over the horizon (default 25)")
    p.add_argument("--fixed-n", type=int, default=None,
                   help="use an exact race count instead of the Poisson volume")
    p.add_argument("--seed", type=int, default=None,
                   help=f"random seed (falls back to ${SEED_ENV_VAR}, then {DEFAULT_SEED})")
    p.add_argument("--sim", type=int, default=25, help="bootstrap replicates (default 25)")
    p.add_argument("--out-dir", default="out", help="output directory (default ./out)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv",
                   help="table output format (default csv)")
    p.add_argument("--params", default=None, metavar="a,sigma",
                   help="pin model parameters instead of fitting")
    p.add_argument("--strict", action="store_true",
                   help="abort on bad input rows and on non-convergence")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(needs_input=needs_input)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="record-edge",
        description="Model sub-threshold race results and predict record probabilities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="maximum-likelihood fit of the margin model")
    _add_common(p, needs_input=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="record probabilities for the coming horizon")
    _add_common(p, needs_input=False)
    p.add_argument("--target", action="append", default=[], metavar="M:SS.ss",
                   help="target time(s) to report point probabilities for")
    p.add_argument("--grid-step", type=float, default=0.01,
                   help="curve resolution in seconds (default 0.01)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("confcurve", help="profile-likelihood confidence curve")
    _add_common(p, needs_input=True)
    p.add_argument("--focus", choices=("prob", "endpoint"), required=True)
    p.add_argument("--target", default=None, metavar="M:SS.ss",
                   help="target time (required for --focus prob)")
    p.add_argument("--level", action="append", type=float, default=None,
                   help="interval level(s) to report (default 0.9)")
    p.add_argument("--grid-points", type=int, default=201)
    p.set_defaults(func=cmd_confcurve)

    p = sub.add_parser("monitor", help="monitoring process with bootstrap envelope")
    _add_common(p, needs_input=True)
    p.add_argument("--y-max", type=float, default=10.0,
                   help="upper margin of the monitoring grid (default 10)")
    p.add_argument("--no-refit", action="store_true",
                   help="plug the original fit into every simulated curve")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("trend", help="per-season scale trend fit")
    _add_common(p, needs_input=True)
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("records", help="i.i.d. record-count mathematics")
    _add_common(p, needs_input=False)
    p.add_argument("--n", type=int, required=True, help="number of trials")
    p.add_argument("--replicates", type=int, default=10000)
    p.set_defaults(func=cmd_records)
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else DEFAULT_SEED


def _config_dict(args, threshold_s: float, seed: int) -> dict:
    cfg = {
        "command": args.command,
        "input": args.input,
        "threshold": args.threshold,
        "threshold_s": threshold_s,
        "seed": seed,
        "sim": args.sim,
        "out_dir": args.out_dir,
        "format": args.fmt,
        "strict": args.strict,
        "figures": not args.no_figures,
        "params": args.params,
    }
    if args.fixed_n is not None:
        cfg["fixed_n"] = args.fixed_n
    else:
        cfg["lambda"] = args.lam
    return cfg


def _volume(args) -> VolumeModel:
    if args.fixed_n is not None:
        return VolumeModel.fixed(args.fixed_n)
    return VolumeModel.poisson(args.lam)


def _pinned_params(args) -> ModelParams | None:
    if args.params is None:
        return None
    try:
        a_text, sigma_text = args.params.split(",")
        return ModelParams(float(a_text), float(sigma_text))
    except (ValueError, DomainError) as exc:
        raise ParseError(f"--params must be 'a,sigma', got {args.params!r}: {exc}") from None


def _load_sample(args, threshold_s: float):
    if args.input is None:
        raise ParseError(f"{args.command} requires --input")
    results = read_results_csv(args.input, strict=args.strict)
    sample = to_exceedance(results, threshold_s)
    if len(sample) == 0:
        raise DomainError(f"no sub-threshold races in {args.input}")
    return sample


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(out: Path, name: str, payload: dict) -> Path:
    path = out / f"{name}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _write_table(out: Path, name: str, columns: dict, fmt: str) -> Path:
    """Write named columns as CSV, or as a JSON record list with --format json."""
    keys = list(columns)
    rows = list(zip(*(np.asarray(columns[k]).tolist() for k in keys)))
    if fmt == "json":
        path = out / f"{name}.json"
        records = [dict(zip(keys, row)) for row in rows]
        path.write_text(json.dumps(records, indent=2, sort_keys=True) + "\n")
        return path
    path = out / f"{name}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])
    return path


def _fmt_cell(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def _fit_payload(fit, threshold_s: float) -> dict:
    gamma = endpoint(fit.params)
    r0_seconds = None if gamma is None else threshold_s - gamma
    return {
        "a": fit.params.a,
        "sigma": fit.params.sigma,
        "se_a": fit.se_a,
        "se_sigma": fit.se_sigma,
        "loglik": fit.loglik,
        "n": fit.n,
        "converged": fit.converged,
        "boundary": fit.boundary,
        "iterations": fit.iterations,
        "endpoint_margin": gamma,
        "r0_seconds": r0_seconds,
        "r0": None if r0_seconds is None else format_time(r0_seconds),
    }


def cmd_fit(args) -> int:
    threshold_s = parse_time(args.threshold)
    seed = _resolve_seed(args)
    sample = _load_sample(args, threshold_s)
    fit = fit_mle(sample.values)
    if args.strict and not fit.converged:
        print("fit did not converge", file=sys.stderr)
        return 1

    out = _out_dir(args)
    payload = {
        "command": "fit",
        "config": _config_dict(args, threshold_s, seed),
        "result": {**_fit_payload(fit, threshold_s), "excluded": sample.excluded},
    }
    _write_json(out, "fit", payload)

    y = np.sort(sample.values)
    from .evd import cdf as model_cdf

    _write_table(out, "fit_cdf", {
        "margin": y,
        "empirical": np.arange(1, y.size + 1) / y.size,
        "fitted": np.asarray(model_cdf(fit.params, y)),
    }, args.fmt)
    if not args.no_figures:
        from .plots import save_fit_plot

        save_fit_plot(sample.values, fit, threshold_s, out / "fit.png")

    r = payload["result"]
    se_text = "(unavailable)" if r["se_a"] is None else f"({r['se_a']:.4f}, {r['se_sigma']:.4f})"
    print(f"n = {r['n']} margins below {args.threshold} ({r['excluded']} excluded)")
    print(f"a = {r['a']:.4f}, sigma = {r['sigma']:.4f}, standard errors {se_text}")
    print(f"loglik = {r['loglik']:.4f}, converged = {r['converged']}")
    if r["endpoint_margin"] is not None:
        print(f"endpoint margin = {r['endpoint_margin']:.3f} s, ultimate time r0 = {r['r0']}")
    else:
        print("no finite endpoint (a <= 0)")
    return 0


def cmd_predict(args) -> int:
    threshold_s = parse_time(args.threshold)
    seed = _resolve_seed(args)
    volume = _volume(args)
    params = _pinned_params(args)
    source = "pinned"
    if params is None:
        sample = _load_sample(args, threshold_s)
        fit = fit_mle(sample.values)
        if args.strict and not fit.converged:
            print("fit did not converge", file=sys.stderr)
            return 1
        params, source = fit.params, "fitted"

    targets = []
    for text in args.target:
        t = parse_time(text)
        if t >= threshold_s:
            raise DomainError(f"target {text} does not beat the threshold {args.threshold}")
        p = prob_break(params, volume, t, threshold_s)
        targets.append({"time": format_time(t), "time_s": t,
                        "y0": round(threshold_s - t, 10), "p_break": round(p, 4)})

    grid = default_time_grid(params, threshold_s, args.grid_step)
    curve = prediction_curve(params, volume, threshold_s, grid)

    out = _out_dir(args)
    payload = {
        "command": "predict",
        "config": _config_dict(args, threshold_s, seed),
        "params": {"a": params.a, "sigma": params.sigma, "source": source},
        "targets": targets,
        "curve_points": int(curve.times.size),
    }
    _write_json(out, "predict", payload)
    _write_table(out, "prediction_curve", {
        "time_s": curve.times,
        "p_break": np.round(curve.probabilities, 4),
    }, args.fmt)
    if not args.no_figures:
        from .plots import save_prediction_plot

        save_prediction_plot(curve, out / "prediction_curve.png",
                             targets=[(t["time_s"], t["p_break"]) for t in targets])

    print(f"params: a = {params.a:.4f}, sigma = {params.sigma:.4f} ({source})")
    for t in targets:
        print(f"P(race below {t['time']}) = {t['p_break']:.4f}")
    return 0


def cmd_confcurve(args) -> int:
    threshold_s = parse_time(args.threshold)
    seed = _resolve_seed(args)
    levels = args.level or [0.9]
    sample = _load_sample(args, threshold_s)
    fit = fit_mle(sample.values)
    if args.strict and not fit.converged:
        print("fit did not converge", file=sys.stderr)
        return 1

    extra: dict = {}
    if args.focus == "prob":
        if args.target is None:
            raise ParseError("--focus prob requires --target")
        t = parse_time(args.target)
        if t >= threshold_s:
            raise DomainError(f"target {args.target} does not beat the threshold")
        y0 = round(threshold_s * 100 - t * 100) / 100
        p_grid = np.linspace(0.0, 0.999, args.grid_points)
        curve = profile_prob(sample.values, y0, _volume(args), p_grid=p_grid,
                             fit=fit, refine_levels=tuple(levels))
        extra["target"] = format_time(t)
        extra["target_margin"] = y0
    else:
        est = profile_endpoint(sample.values, threshold_s=threshold_s, fit=fit,
                               refine_levels=tuple(levels))
        curve = est.curve
        extra.update({"gamma_hat": est.gamma_hat, "r0_seconds": est.r0_seconds, "r0": est.r0})

    intervals = []
    for level in levels:
        iv = interval_from_curve(curve, level)
        intervals.append({"level": level, "lo": iv.lo, "hi": iv.hi,
                          "lo_open": iv.lo_open, "hi_open": iv.hi_open})

    out = _out_dir(args)
    payload = {
        "command": "confcurve",
        "config": _config_dict(args, threshold_s, seed),
        "focus": args.focus,
        "focus_name": curve.focus_name,
        "mle_focus": curve.mle_focus,
        "mle_attained": curve.mle_attained,
        "unimodal": curve.unimodal,
        "feasible_points": int(np.sum(curve.feasible)),
        "intervals": intervals,
        **extra,
    }
    _write_json(out, "confcurve", payload)
    _write_table(out, "confidence_curve", {
        "focus": curve.focus,
        "deviance": curve.deviance,
        "confidence": curve.confidence,
        "feasible": curve.feasible.astype(int),
    }, args.fmt)
    if not args.no_figures:
        from .plots import save_confidence_plot

        save_confidence_plot(curve, out / "confidence_curve.png", level=levels[0])

    if args.focus == "endpoint":
        if extra["gamma_hat"] is None:
            print("no finite endpoint at MLE (a <= 0)")
        else:
            print(f"endpoint margin = {extra['gamma_hat']:.3f} s, ultimate time r0 = {extra['r0']}")
    print(f"mle {curve.focus_name} = {curve.mle_focus:.4f}")
    for iv in intervals:
        lo = "open" if iv["lo_open"] else f"{iv['lo']:.4f}"
        hi = "open" if iv["hi_open"] else f"{iv['hi']:.4f}"
        print(f"{iv['level']:.0%} interval: [{lo}, {hi}]")
    if not curve.unimodal:
        print("warning: deviance curve is not unimodal on the grid", file=sys.stderr)
    return 0


def cmd_monitor(args) -> int:
    threshold_s = parse_time(args.threshold)
    seed = _resolve_seed(args)
    sample = _load_sample(args, threshold_s)
    fit = fit_mle(sample.values)
    if args.strict and not fit.converged:
        print("fit did not converge", file=sys.stderr)
        return 1

    grid = default_monitor_grid(y_max=args.y_max)
    result = monitor_envelope(sample.values, fit.params, sim=args.sim, seed=seed,
                              grid=grid, refit=not args.no_refit)
    sup = monitor_sup(sample.values, fit.params)

    out = _out_dir(args)
    payload = {
        "command": "monitor",
        "config": _config_dict(args, threshold_s, seed),
        "n": len(sample),
        "fit": {"a": fit.params.a, "sigma": fit.params.sigma},
        "exceed_fraction": result.exceed_fraction,
        "dropped": result.dropped,
        "sup_abs": sup,
        "refit": result.refit,
    }
    _write_json(out, "monitor", payload)
    columns = {"margin": result.grid, "observed": result.observed}
    for i, row in enumerate(result.envelope, start=1):
        columns[f"rep_{i:03d}"] = row
    _write_table(out, "monitor_curves", columns, args.fmt)
    if not args.no_figures:
        from .plots import save_monitor_plot

        save_monitor_plot(result, out / "monitor.png")

    print(f"observed curve outside the {result.envelope.shape[0]}-replicate band on "
          f"{result.exceed_fraction:.1%} of the grid (seed {seed})")
    print(f"sup |Z| = {sup:.4f}")
    return 0


def cmd_trend(args) -> int:
    threshold_s = parse_time(args.threshold)
    seed = _resolve_seed(args)
    sample = _load_sample(args, threshold_s)
    groups = sample.season_groups()
    if len(groups) < 2:
        print(f"trend needs at least two seasons, input has {len(groups)}", file=sys.stderr)
        return 2
    trend = fit_trend(groups)
    if args.strict and not trend.converged:
        print("trend fit did not converge", file=sys.stderr)
        return 1

    out = _out_dir(args)
    payload = {
        "command": "trend",
        "config": _config_dict(args, threshold_s, seed),
        "result": {
            "a": trend.a,
            "sigma0": trend.sigma0,
            "trend_gamma": trend.trend_gamma,
            "se_trend": trend.se_trend,
            "wald_z": trend.wald_z,
            "loglik": trend.loglik,
            "converged": trend.converged,
            "seasons": [
                {"year": y, "n": n, "x": x}
                for y, n, x in zip(trend.season_years, trend.season_counts, trend.x_values)
            ],
        },
    }
    _write_json(out, "trend", payload)
    _write_table(out, "trend_seasons", {
        "season": np.asarray(trend.season_years),
        "n": np.asarray(trend.season_counts),
        "x": trend.x_values,
        "scale": trend.sigma0 * np.exp(trend.trend_gamma * trend.x_values),
    }, args.fmt)
    if not args.no_figures:
        from .plots import save_trend_plot

        save_trend_plot(groups, trend, out / "trend.png")

    z_text = "unavailable" if trend.wald_z is None else f"{trend.wald_z:.3f}"
    print(f"{len(groups)} seasons, {sum(trend.season_counts)} races")
    print(f"trend_gamma = {trend.trend_gamma:.5f} per year, "
          f"se = {trend.se_trend if trend.se_trend is None else round(trend.se_trend, 5)}, "
          f"Wald z = {z_text}")
    return 0


def cmd_records(args) -> int:
    if args.n < 1:
        print("--n must be >= 1", file=sys.stderr)
        return 2
    seed = _resolve_seed(args)
    stats = expected_records(args.n)
    counts = simulate_record_counts(args.n, args.replicates, seed=seed)
    sim_mean = float(counts.mean())
    stats = stats.standardize(sim_mean)

    out = _out_dir(args)
    payload = {
        "command": "records",
        "config": {"command": "records", "n": args.n, "replicates": args.replicates,
                   "seed": seed, "out_dir": args.out_dir, "format": args.fmt,
                   "figures": not args.no_figures},
        "result": {
            "n": stats.n,
            "mean": stats.mean,
            "variance": stats.variance,
            "simulated": {
                "replicates": args.replicates,
                "mean": sim_mean,
                "sd": float(counts.std(ddof=1)) if counts.size > 1 else 0.0,
                "min": int(counts.min()),
                "max": int(counts.max()),
                "z_of_mean": stats.z_normalized,
            },
        },
    }
    _write_json(out, "records", payload)
    values, freqs = np.unique(counts, return_counts=True)
    _write_table(out, "record_counts", {"count": values, "frequency": freqs}, args.fmt)
    if not args.no_figures:
        from .plots import save_records_plot

        save_records_plot(counts, stats, out / "records.png")

    print(f"expected records in {args.n} trials: {stats.mean:.4f} (variance {stats.variance:.4f})")
    print(f"simulated mean over {args.replicates} replicates: {sim_mean:.4f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: cannot read {exc.filename}", file=sys.stderr)
        return 2
    except (ParseError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
