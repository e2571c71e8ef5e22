"""Command-line front end.

Subcommands: generate, fit, evaluate, rate-study, approx-study, reproduce.
Configuration comes from a JSON document (--config), equivalent flags, or
both; flags override file values, unknown keys are rejected, and every
command writes a JSON sidecar echoing the fully resolved configuration and
seed, which is sufficient to reproduce each artifact byte for byte.

Exit codes: 0 success, 1 configuration error, 2 runtime error.  The
ADAPTIX_THREADS environment variable overrides the threads field.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import network as net
from . import smoothers as sm
from . import svgfig
from . import trendfilter as tf
from .jsonio import dump as json_dump
from .jsonio import fmt17
from . import targets as tg

_TARGET_PRESETS = ("inhom1d", "gaussmix2d", "triridge2d")
_ESTIMATORS = ("relu", "trend", "css", "tps")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); config errors are exit 1
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# Config plumbing


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(p) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"config root must be a JSON object, got {type(cfg).__name__}")
    return cfg


def _resolve(args: argparse.Namespace, allowed: tuple, defaults: dict) -> dict:
    cfg = dict(defaults)
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config)
        unknown = sorted(set(file_cfg) - set(allowed))
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)} (allowed: {', '.join(allowed)})")
        cfg.update(file_cfg)
    for key in allowed:
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            cfg[key] = v
    env = os.environ.get("ADAPTIX_THREADS")
    if env is not None and "threads" in allowed:
        try:
            cfg["threads"] = int(env)
        except ValueError:
            raise ConfigError(f"ADAPTIX_THREADS must be an integer, got {env!r}")
    if "threads" in cfg and int(cfg["threads"]) < 1:
        raise ConfigError("threads must be a positive integer")
    return cfg


def _require(cfg: dict, key: str):
    v = cfg.get(key)
    if v is None:
        raise ConfigError(f"missing required field: {key}")
    return v


def _out_dir(cfg: dict) -> Path:
    out = Path(_require(cfg, "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_target(spec, angle: float = 1.0):
    if isinstance(spec, dict):
        try:
            return tg.target_from_config(spec)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad target spec: {exc}")
    if spec == "inhom1d":
        return tg.inhomogeneous_1d()
    if spec == "gaussmix2d":
        return tg.gaussian_mix_2d()
    if spec == "triridge2d":
        return tg.triangle_ridge_2d(angle=angle)
    raise ConfigError(f"unknown target {spec!r} (presets: {', '.join(_TARGET_PRESETS)}; or a config object)")


def _build_estimator(cfg: dict) -> ex.EstimatorSpec:
    name = _require(cfg, "estimator")
    if name == "trend":
        return ex.TrendFilterEstimator(tol=float(cfg.get("tol", 1e-8)), max_sweeps=int(cfg.get("max_sweeps", 50_000)))
    if name == "css":
        return ex.CssEstimator()
    if name == "tps":
        return ex.TpsEstimator()
    if name == "relu":
        kwargs = {}
        if cfg.get("width") is not None:
            kwargs["width"] = int(cfg["width"])
        if cfg.get("objective") is not None:
            kwargs["kind"] = str(cfg["objective"])
        if cfg.get("restarts") is not None:
            kwargs["restarts"] = int(cfg["restarts"])
        if cfg.get("max_iters") is not None:
            kwargs["max_iters"] = int(cfg["max_iters"])
        if cfg.get("step_size") is not None:
            kwargs["step_size"] = float(cfg["step_size"])
        if cfg.get("init_scale") is not None:
            kwargs["init_scale"] = float(cfg["init_scale"])
        return ex.ReluNetEstimator(**kwargs)
    raise ConfigError(f"unknown estimator {name!r} (choices: {', '.join(_ESTIMATORS)})")


def _parse_grid(v) -> np.ndarray:
    if isinstance(v, (list, tuple)):
        g = np.asarray(v, dtype=float)
    elif isinstance(v, str):
        parts = v.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid string must be LO:HI:COUNT, got {v!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"bad grid string {v!r}")
        if lo <= 0 or hi <= lo or count < 1:
            raise ConfigError(f"grid needs 0 < LO < HI and COUNT >= 1, got {v!r}")
        g = np.geomspace(lo, hi, count)
    else:
        raise ConfigError(f"grid must be a list or LO:HI:COUNT string, got {type(v).__name__}")
    if g.size == 0 or np.any(g < 0):
        raise ConfigError("grid must be nonempty and nonnegative")
    return g


def _parse_sizes(v) -> tuple:
    if isinstance(v, (list, tuple)):
        sizes = [int(x) for x in v]
    elif isinstance(v, str):
        if v.count(":") == 2 and "x" in v.rsplit(":", 1)[1]:
            lo_s, hi_s, mult_s = v.split(":")
            try:
                lo, hi, mult = int(lo_s), int(hi_s), int(mult_s.lstrip("x"))
            except ValueError:
                raise ConfigError(f"bad sizes string {v!r}")
            sizes = []
            n = lo
            while n <= hi:
                sizes.append(n)
                n *= mult
        else:
            try:
                sizes = [int(s) for s in v.split(",")]
            except ValueError:
                raise ConfigError(f"sizes must be comma-separated integers or LO:HI:xMULT, got {v!r}")
    else:
        raise ConfigError(f"sizes must be a list or string, got {type(v).__name__}")
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("sizes must be strictly increasing")
    return tuple(sizes)


def default_study_grid(sizes) -> np.ndarray:
    """Log grid spanning [1e-5, 1e2] scaled by the range of sample sizes."""
    lo = 1e-5 * min(sizes)
    hi = 1e2 * max(sizes)
    count = max(2, int(round(3.6 * np.log10(hi / lo))) + 1)
    return np.geomspace(lo, hi, count)


TREND_ORACLE_GRID = tuple(np.geomspace(3e-4, 1.0, 19))

# Smoothing-spline oracle lambda sits near 1e-5 on the inhomogeneous target
# and barely moves with N; an absolute grid keeps it interior at every size.
CSS_ORACLE_GRID = tuple(np.geomspace(1e-8, 1e-1, 29))


def _build_rule(cfg: dict, sizes) -> ex.LambdaRule:
    name = cfg.get("rule", "oracle")
    if name == "fixed":
        if cfg.get("lam") is None:
            raise ConfigError("rule 'fixed' requires lam")
        return ex.FixedRule(float(cfg["lam"]))
    anchor = cfg.get("anchor")
    if anchor not in (None, "lambda_max"):
        raise ConfigError("anchor must be 'lambda_max' when given")
    if cfg.get("grid") is not None:
        grid = _parse_grid(cfg["grid"])
    elif anchor == "lambda_max":
        grid = np.asarray(TREND_ORACLE_GRID)
    else:
        grid = default_study_grid(sizes)
    if name == "oracle":
        return ex.OracleRule(tuple(float(g) for g in grid), anchor=anchor)
    if name == "holdout":
        return ex.HoldOutRule(tuple(float(g) for g in grid), fraction=float(cfg.get("fraction", 0.25)), anchor=anchor)
    raise ConfigError(f"unknown rule {name!r} (choices: oracle, holdout, fixed)")


def _write_sidecar(out: Path, command: str, cfg: dict) -> Path:
    doc = {"command": command, "config": cfg}
    path = out / f"{command}.config.json"
    json_dump(doc, path)
    return path


def _float_or_blank(v) -> str:
    return fmt17(v) if np.isfinite(v) else ""


# ---------------------------------------------------------------------------
# Dataset and model I/O


def _load_dataset(csv_path: str) -> tuple[tg.Dataset, tg.TargetFunction]:
    p = Path(csv_path)
    if not p.is_file():
        raise ConfigError(f"dataset not found: {csv_path}")
    meta_path = p.with_suffix(".json")
    if not meta_path.is_file():
        raise ConfigError(f"dataset metadata not found: {meta_path}")
    points, responses = tg.read_dataset_csv(p)
    with open(meta_path) as fh:
        meta = json.load(fh)
    target = tg.target_from_config(meta["target"])
    data = tg.Dataset(
        dimension=points.shape[1],
        points=points,
        responses=responses,
        sigma=float(meta["sigma"]),
        seed=int(meta["seed"]),
        design=str(meta["design"]),
    )
    return data, target


def _model_predictor(doc: dict):
    kind = doc.get("kind")
    if kind == "trend":
        model = tf.spline_from_config(doc["model"])
        return model, lambda pts: tf.eval_spline(model, np.asarray(pts)[:, 0]), 1
    if kind == "css":
        model = sm.css_from_config(doc["model"])
        return model, lambda pts: sm.eval_css(model, np.asarray(pts)[:, 0]), 1
    if kind == "tps":
        model = sm.tps_from_config(doc["model"])
        return model, lambda pts: sm.eval_tps(model, pts), 2
    if kind == "relu":
        model = net.network_from_config(doc["model"])
        return model, lambda pts: net.forward(model, np.asarray(pts)), model.d
    raise ConfigError(f"unknown model kind {kind!r}")


def _curve_points(d: int, n_1d: int = 512, n_2d: int = 64) -> np.ndarray:
    if d == 1:
        return np.linspace(-1.0, 1.0, n_1d).reshape(-1, 1)
    g = np.linspace(-1.0, 1.0, n_2d)
    xx, yy = np.meshgrid(g, g)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return pts[np.linalg.norm(pts, axis=1) <= 1.0]


def _write_curve_csv(path, pts: np.ndarray, vals: np.ndarray) -> None:
    d = pts.shape[1]
    header = ",".join([f"x{i + 1}" for i in range(d)] + ["value"])
    lines = [header]
    for row, v in zip(pts, vals):
        lines.append(",".join([fmt17(x) for x in row] + [fmt17(v)]))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_study_csv(path, result: ex.RateResult) -> None:
    lines = ["size,trial,lambda,mse"]
    for r in result.per_trial:
        lines.append(f"{r.size},{r.trial},{_float_or_blank(r.lam)},{_float_or_blank(r.mse)}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Commands


def _cmd_generate(args) -> None:
    allowed = ("target", "n", "sigma", "seed", "design", "angle", "out")
    cfg = _resolve(args, allowed, {"sigma": 0.25, "seed": 0, "angle": 1.0})
    target = _build_target(_require(cfg, "target"), angle=float(cfg["angle"]))
    n = int(_require(cfg, "n"))
    design = cfg.get("design") or ("grid" if target.dimension == 1 else "ball")
    out = _out_dir(cfg)
    cfg_resolved = {
        "target": tg.target_config(target),
        "n": n,
        "sigma": float(cfg["sigma"]),
        "seed": int(cfg["seed"]),
        "design": design,
        "out": str(out),
    }
    data = tg.make_dataset(target, n, float(cfg["sigma"]), int(cfg["seed"]), design)
    tg.write_dataset_csv(data, out / "dataset.csv")
    json_dump(tg.dataset_metadata(data, target), out / "dataset.json")
    _write_sidecar(out, "generate", cfg_resolved)
    print(f"wrote {out / 'dataset.csv'} ({n} samples, d={target.dimension})")


def _cmd_fit(args) -> None:
    allowed = (
        "estimator", "data", "lam", "rule", "grid", "fraction", "anchor", "seed",
        "out", "width", "objective", "restarts", "max_iters", "step_size",
        "init_scale", "tol", "max_sweeps",
    )
    cfg = _resolve(args, allowed, {"seed": 0})
    data, target = _load_dataset(_require(cfg, "data"))
    est = _build_estimator(cfg)
    if isinstance(est, (ex.TrendFilterEstimator, ex.CssEstimator)) and data.dimension != 1:
        raise ConfigError(f"estimator {est.name!r} needs 1D data, got d={data.dimension}")
    if isinstance(est, ex.TpsEstimator) and data.dimension != 2:
        raise ConfigError("estimator 'tps' needs 2D data")
    out = _out_dir(cfg)
    if cfg.get("rule") is None:
        cfg["rule"] = "fixed" if cfg.get("lam") is not None else "holdout"
    rule = _build_rule(cfg, (len(data),))
    cfg_resolved = {
        "estimator": ex.estimator_config(est),
        "data": str(cfg["data"]),
        "rule": ex.rule_config(rule),
        "seed": int(cfg["seed"]),
        "out": str(out),
    }
    lam, _ = ex.select_lambda(est, data, rule, target=target, seed=int(cfg["seed"]))
    if isinstance(est, ex.TrendFilterEstimator):
        model, _ = tf.fit_trend(data, lam, tol=est.tol, max_sweeps=est.max_sweeps)
        model_doc = tf.spline_config(model)
        pred = lambda pts: tf.eval_spline(model, np.asarray(pts)[:, 0])  # noqa: E731
    elif isinstance(est, ex.CssEstimator):
        model = sm.fit_css(data, lam)
        model_doc = sm.css_config(model)
        pred = lambda pts: sm.eval_css(model, np.asarray(pts)[:, 0])  # noqa: E731
    elif isinstance(est, ex.TpsEstimator):
        model = sm.fit_tps(data, lam)
        model_doc = sm.tps_config(model)
        pred = lambda pts: sm.eval_tps(model, pts)  # noqa: E731
    else:
        cfg_net = net.TrainConfig(
            lam=lam, kind=est.kind, width=est.width, max_iters=est.max_iters,
            step_size=est.step_size, momentum=est.momentum, grad_tol=est.grad_tol,
            restarts=est.restarts, init_scale=est.init_scale, seed=int(cfg["seed"]),
        )
        params, _ = net.train(data, cfg_net)
        model_doc = net.network_config(params)
        pred = lambda pts: net.forward(params, np.asarray(pts))  # noqa: E731
    json_dump({"kind": est.name, "lambda": lam, "model": model_doc}, out / "model.json")
    pts = _curve_points(data.dimension)
    _write_curve_csv(out / "curve.csv", pts, np.asarray(pred(pts), dtype=float))
    _write_sidecar(out, "fit", cfg_resolved)
    print(f"fit {est.name} at lambda={lam:g}; wrote {out / 'model.json'} and {out / 'curve.csv'}")


def _cmd_evaluate(args) -> None:
    allowed = ("model", "data", "grid_points", "out")
    cfg = _resolve(args, allowed, {"grid_points": None})
    model_path = Path(_require(cfg, "model"))
    if not model_path.is_file():
        raise ConfigError(f"model not found: {model_path}")
    with open(model_path) as fh:
        doc = json.load(fh)
    _, pred, d = _model_predictor(doc)
    data, target = _load_dataset(_require(cfg, "data"))
    if data.dimension != d:
        raise ConfigError(f"model dimension {d} != dataset dimension {data.dimension}")
    out = _out_dir(cfg)
    n_grid = int(cfg["grid_points"]) if cfg.get("grid_points") else (
        ex.EVAL_POINTS_1D if d == 1 else ex.EVAL_POINTS_BALL
    )
    resid = data.responses - np.asarray(pred(data.points), dtype=float)
    report = {
        "model": str(model_path),
        "data": str(cfg["data"]),
        "n": len(data),
        "residual_mse": float(np.mean(resid * resid)),
        "design_mse_vs_target": ex.empirical_mse(pred, target, ex.DesignEval(data.points)),
        "grid_mse_vs_target": ex.empirical_mse(pred, target, ex.GridEval(n_grid, seed=data.seed)),
        "grid_points": n_grid,
    }
    json_dump(report, out / "report.json")
    _write_sidecar(out, "evaluate", {k: report[k] for k in ("model", "data", "grid_points")})
    print(f"grid MSE {report['grid_mse_vs_target']:.6g}; wrote {out / 'report.json'}")


def _study_svg_panel(results: dict, refs: tuple, title: str) -> svgfig.LinePanel:
    series = []
    for i, (label, res) in enumerate(results.items()):
        series.append(
            svgfig.Series(
                x=np.asarray(res.sizes, dtype=float),
                y=np.asarray(res.mse_mean, dtype=float),
                yerr=np.asarray(res.mse_stderr, dtype=float),
                label=f"{label} (slope {res.slope:.3f})",
                color=svgfig.PALETTE[i % len(svgfig.PALETTE)],
            )
        )
    return svgfig.LinePanel(
        title=title, series=tuple(series), xlabel="N", ylabel="MSE", logx=True, logy=True, refs=refs
    )


def _cmd_rate_study(args) -> None:
    allowed = (
        "preset", "target", "estimator", "sizes", "sigma", "trials", "rule", "grid",
        "fraction", "lam", "anchor", "eval_grid", "seed", "design", "threads", "out",
        "angle", "width", "objective", "restarts", "max_iters", "step_size",
        "init_scale", "tol", "max_sweeps",
    )
    cfg = _resolve(args, allowed, {"sigma": 0.25, "trials": 20, "seed": 0, "threads": 1, "angle": 1.0})
    out = _out_dir(cfg)
    preset = cfg.get("preset")
    reference_slopes = {}
    if preset == "1d-gap":
        cfg.setdefault("target", "inhom1d")
        cfg.setdefault("sizes", [64, 128, 256, 512, 1024, 2048, 4096])
        cfg.setdefault("design", "grid")
        sizes = _parse_sizes(cfg["sizes"])
        estimators = {
            "trend": (ex.TrendFilterEstimator(), ex.OracleRule(TREND_ORACLE_GRID, anchor="lambda_max")),
            "css": (ex.CssEstimator(), ex.OracleRule(CSS_ORACLE_GRID)),
        }
        reference_slopes = {"adaptive": -0.8, "linear": -0.75}
    elif preset is None:
        sizes = _parse_sizes(_require(cfg, "sizes"))
        estimators = {str(_require(cfg, "estimator")): (_build_estimator(cfg), _build_rule(cfg, sizes))}
    else:
        raise ConfigError(f"unknown preset {preset!r} (presets: 1d-gap)")
    target = _build_target(_require(cfg, "target"), angle=float(cfg["angle"]))
    design = cfg.get("design") or ("grid" if target.dimension == 1 else "ball")
    eval_grid = int(cfg.get("eval_grid") or (ex.EVAL_POINTS_1D if target.dimension == 1 else ex.EVAL_POINTS_BALL))
    cfg["design"], cfg["eval_grid"] = design, eval_grid

    results, summaries = {}, {}
    for label, (est, rule) in estimators.items():
        spec = ex.ExperimentSpec(
            target=target, estimator=est, Ns=sizes, sigma=float(cfg["sigma"]),
            trials=int(cfg["trials"]), lambda_rule=rule, eval_grid=eval_grid,
            seed=int(cfg["seed"]), design=design,
        )
        res = ex.rate_study(spec, threads=int(cfg["threads"]))
        results[label] = res
        suffix = f"_{label}" if len(estimators) > 1 else ""
        _write_study_csv(out / f"study{suffix}.csv", res)
        summaries[label] = ex.study_summary(res, ex.spec_config(spec))
    summary = {"reference_slopes": reference_slopes, "studies": summaries}
    json_dump(summary, out / "study_summary.json")
    refs = []
    if results:
        first = next(iter(results.values()))
        anchor_x = float(first.sizes[0])
        anchor_y = float(first.mse_mean[0])
        for name, slope_ref in reference_slopes.items():
            refs.append(svgfig.RefLine(slope=slope_ref, anchor_x=anchor_x, anchor_y=anchor_y,
                                       label=f"{name} reference N^{slope_ref:g}"))
    panel = _study_svg_panel(results, tuple(refs), "estimation error vs sample size")
    meta = {"command": "rate-study", "summary": summary,
            "csv_rows": {label: ex.study_rows(res) for label, res in results.items()}}
    svgfig.write_line_figure(out / "study.svg", [panel], meta, ncols=1)
    echo = {
        "preset": preset,
        "target": tg.target_config(target),
        "sizes": list(sizes),
        "sigma": float(cfg["sigma"]),
        "trials": int(cfg["trials"]),
        "estimators": {label: ex.estimator_config(est) for label, (est, _) in estimators.items()},
        "rules": {label: ex.rule_config(rule) for label, (_, rule) in estimators.items()},
        "eval_grid": eval_grid,
        "seed": int(cfg["seed"]),
        "design": design,
        "threads": int(cfg.get("threads", 1)),
    }
    _write_sidecar(out, "rate-study", echo)
    slopes = ", ".join(f"{label}: {res.slope:.3f}" for label, res in results.items())
    print(f"slopes {slopes}; wrote {out / 'study_summary.json'}")


def _cmd_approx_study(args) -> None:
    allowed = ("preset", "target", "widths", "seed", "restarts", "max_iters", "out",
               "angle", "n_samples", "eval_points", "objective", "init_scale", "threads")
    # Budgets are deliberately modest: the decay being measured is the
    # optimization gap at small widths, which a long-enough run at K=8
    # would close (the ridge is exactly realizable there).
    cfg = _resolve(args, allowed, {"seed": 0, "restarts": 2, "max_iters": 8000, "angle": 1.0,
                                   "init_scale": 0.7, "n_samples": 4096, "eval_points": 8192,
                                   "threads": 1})
    preset = cfg.get("preset")
    reference_slope = None
    if preset == "2d-triangle":
        cfg.setdefault("target", "triridge2d")
        cfg.setdefault("widths", [8, 16, 32, 64, 128])
        reference_slope = -1.25
    elif preset is not None:
        raise ConfigError(f"unknown preset {preset!r} (presets: 2d-triangle)")
    target = _build_target(_require(cfg, "target"), angle=float(cfg["angle"]))
    widths = _parse_sizes(_require(cfg, "widths"))
    if target.dimension == 2 and reference_slope is None:
        reference_slope = -1.25
    out = _out_dir(cfg)
    base = ex.ReluNetEstimator(restarts=int(cfg["restarts"]), max_iters=int(cfg["max_iters"]),
                               kind=str(cfg.get("objective", net.WEIGHT_DECAY)),
                               init_scale=float(cfg["init_scale"]))
    res = ex.approximation_study(target, widths, base, seed=int(cfg["seed"]),
                                 n_samples=int(cfg["n_samples"]), eval_n=int(cfg["eval_points"]))
    _write_study_csv(out / "study.csv", res)
    summary = ex.study_summary(res, {
        "target": tg.target_config(target), "widths": list(widths),
        "estimator": ex.estimator_config(base), "seed": int(cfg["seed"]),
        "n_samples": int(cfg["n_samples"]), "eval_points": int(cfg["eval_points"]),
    })
    summary["reference_slope"] = reference_slope
    summary["metric"] = "sup_error"
    json_dump(summary, out / "study_summary.json")
    refs = ()
    if reference_slope is not None:
        refs = (svgfig.RefLine(slope=reference_slope, anchor_x=float(res.sizes[0]),
                               anchor_y=float(res.mse_mean[0]), label=f"reference K^{reference_slope:g}"),)
    series = svgfig.Series(x=np.asarray(res.sizes, dtype=float), y=np.asarray(res.mse_mean, dtype=float),
                           label=f"sup error (slope {res.slope:.3f})")
    panel = svgfig.LinePanel(title="approximation error vs width", series=(series,),
                             xlabel="K", ylabel="sup error", logx=True, logy=True, refs=refs)
    svgfig.write_line_figure(out / "study.svg", [panel],
                             {"command": "approx-study", "summary": summary, "csv_rows": ex.study_rows(res)},
                             ncols=1)
    _write_sidecar(out, "approx-study", summary["spec"])
    print(f"sup-error slope {res.slope:.3f}; wrote {out / 'study_summary.json'}")


# ---------------------------------------------------------------------------
# Figure reproduction


HEAT_TPS_GRID = tuple(np.geomspace(1e-9, 1e-1, 25))

# Per-figure network regularization, tuned per target like the spline
# side's oracle lambda: the smooth bump mixture wants real shrinkage,
# the piecewise-linear ridge barely any.
HEAT_RELU_LAM = {"fig2": 0.1, "fig3": 1e-3}
HEAT_RELU_INIT = 0.7


def _heat_grid(predict, resolution: int = 128) -> np.ndarray:
    centers = (np.arange(resolution) + 0.5) / resolution * 2.0 - 1.0
    xx, yy = np.meshgrid(centers, centers)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    inside = np.linalg.norm(pts, axis=1) <= 1.0
    vals = np.full(pts.shape[0], np.nan)
    vals[inside] = np.asarray(predict(pts[inside]), dtype=float)
    return vals.reshape(resolution, resolution)


def _grid_payload(grid: np.ndarray) -> list:
    """Cells outside the unit disk carry no value; JSON gets null there."""
    return [[float(v) if np.isfinite(v) else None for v in row] for row in grid]


def _cmd_reproduce(args) -> None:
    allowed = ("figure", "n", "sigma", "seed", "out", "restarts", "width", "max_iters", "threads")
    cfg = _resolve(args, allowed, {"seed": 1, "restarts": 5, "width": 128, "max_iters": 40_000, "threads": 1})
    figure = _require(cfg, "figure")
    if figure not in ("fig1", "fig2", "fig3"):
        raise ConfigError(f"unknown figure {figure!r} (choices: fig1, fig2, fig3)")
    out = _out_dir(cfg)
    if figure == "fig1":
        cfg.setdefault("n", 256)
        cfg.setdefault("sigma", 0.25)
        _reproduce_fig1(out, int(cfg["n"]), float(cfg["sigma"]), int(cfg["seed"]))
    else:
        cfg.setdefault("n", 500)
        cfg.setdefault("sigma", 0.1)
        _reproduce_heat_figure(out, figure, int(cfg["n"]), float(cfg["sigma"]), int(cfg["seed"]),
                               int(cfg["width"]), int(cfg["restarts"]), int(cfg["max_iters"]))
    echo = {k: cfg[k] for k in ("figure", "n", "sigma", "seed", "restarts", "width", "max_iters") if k in cfg}
    echo["out"] = str(out)
    _write_sidecar(out, "reproduce", echo)
    print(f"wrote {out / (figure + '.svg')}")


def _reproduce_fig1(out: Path, n: int, sigma: float, seed: int) -> None:
    target = tg.inhomogeneous_1d()
    data = tg.make_dataset(target, n, sigma, seed, "grid")
    grid_x = np.linspace(-1.0, 1.0, 513)
    truth = target(grid_x)
    where = ex.GridEval(ex.EVAL_POINTS_1D, seed=seed)
    lam_grid = default_study_grid((n,))
    lam_css, _ = ex.select_lambda(ex.CssEstimator(), data, ex.OracleRule(tuple(lam_grid)), target=target, where=where)
    lam_tf, _ = ex.select_lambda(ex.TrendFilterEstimator(), data, ex.OracleRule(tuple(lam_grid)), target=target, where=where)
    css_over = sm.fit_css(data, 100.0 * lam_css)
    css_under = sm.fit_css(data, lam_css / 100.0)
    model_tf, _ = tf.fit_trend(data, lam_tf, tol=1e-8, max_sweeps=50_000)

    curves = {
        "truth": truth,
        "css_oversmoothed": sm.eval_css(css_over, grid_x),
        "css_undersmoothed": sm.eval_css(css_under, grid_x),
        "adaptive_spline": tf.eval_spline(model_tf, grid_x),
    }
    panels = [
        svgfig.LinePanel(
            title="(a) target and samples",
            series=(
                svgfig.Series(grid_x, curves["truth"], label="target"),
                svgfig.Series(data.x, data.responses, label="samples", kind="points", color="#777777"),
            ),
            xlabel="x", ylabel="y",
        ),
        svgfig.LinePanel(
            title="(b) smoothing spline, large lambda",
            series=(
                svgfig.Series(grid_x, curves["truth"], label="target", color="#bbbbbb"),
                svgfig.Series(grid_x, curves["css_oversmoothed"], label=f"css lambda={100 * lam_css:.3g}"),
            ),
            xlabel="x", ylabel="y",
        ),
        svgfig.LinePanel(
            title="(c) smoothing spline, small lambda",
            series=(
                svgfig.Series(grid_x, curves["truth"], label="target", color="#bbbbbb"),
                svgfig.Series(grid_x, curves["css_undersmoothed"], label=f"css lambda={lam_css / 100:.3g}"),
            ),
            xlabel="x", ylabel="y",
        ),
        svgfig.LinePanel(
            title="(d) locally adaptive spline",
            series=(
                svgfig.Series(grid_x, curves["truth"], label="target", color="#bbbbbb"),
                svgfig.Series(grid_x, curves["adaptive_spline"], label=f"trend lambda={lam_tf:.3g}"),
            ),
            xlabel="x", ylabel="y",
        ),
    ]
    meta = {
        "figure": "fig1",
        "config": {"n": n, "sigma": sigma, "seed": seed, "lambda_css": lam_css, "lambda_trend": lam_tf},
        "grid_x": grid_x,
        "curves": curves,
        "samples": {"x": data.x, "y": data.responses},
        "adaptive_model": tf.spline_config(model_tf),
    }
    svgfig.write_line_figure(out / "fig1.svg", panels, meta, ncols=2)


def _reproduce_heat_figure(out: Path, figure: str, n: int, sigma: float, seed: int,
                           width: int, restarts: int, max_iters: int) -> None:
    target = tg.gaussian_mix_2d() if figure == "fig2" else tg.triangle_ridge_2d()
    lam_net = HEAT_RELU_LAM[figure]
    data = tg.make_dataset(target, n, sigma, seed, "ball")
    where = ex.GridEval(ex.EVAL_POINTS_BALL, seed=seed)
    lam_tps, _ = ex.select_lambda(ex.TpsEstimator(), data, ex.OracleRule(HEAT_TPS_GRID), target=target, where=where)
    tps_model = sm.fit_tps(data, lam_tps)
    relu = ex.ReluNetEstimator(width=width, restarts=restarts, max_iters=max_iters,
                               init_scale=HEAT_RELU_INIT)
    pred_net = ex.fit_estimator(relu, data, lam_net, seed=seed)

    def pred_truth(pts):
        return target(np.asarray(pts))

    def pred_tps(pts):
        return sm.eval_tps(tps_model, pts)

    grids = {
        "truth": _heat_grid(pred_truth),
        "tps": _heat_grid(pred_tps),
        "relu": _heat_grid(pred_net),
    }
    mse_tps = ex.empirical_mse(pred_tps, target, where)
    mse_net = ex.empirical_mse(pred_net, target, where)
    panels = [
        svgfig.HeatPanel(title="(a) target and samples", values=grids["truth"],
                         points=data.points, point_values=data.responses),
        svgfig.HeatPanel(title=f"(b) thin-plate spline, mse {mse_tps:.4f}", values=grids["tps"]),
        svgfig.HeatPanel(title=f"(c) shallow relu network, mse {mse_net:.4f}", values=grids["relu"]),
    ]
    meta = {
        "figure": figure,
        "config": {"n": n, "sigma": sigma, "seed": seed, "width": width, "restarts": restarts,
                   "lambda_tps": lam_tps, "lambda_relu": lam_net},
        "mse": {"tps": mse_tps, "relu": mse_net},
        "grids": {name: _grid_payload(g) for name, g in grids.items()},
        "samples": {"points": data.points, "y": data.responses},
    }
    svgfig.write_heat_figure(out / f"{figure}.svg", panels, meta)


# ---------------------------------------------------------------------------
# Entry point


def _add_common(p: _Parser) -> None:
    p.add_argument("--config", help="JSON config document; flags override its fields")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)


def _build_parser() -> _Parser:
    parser = _Parser(prog="adaptix", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("generate", help="sample a noisy dataset from a named target")
    _add_common(p)
    p.add_argument("--target")
    p.add_argument("--n", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--design", choices=["grid", "ball"])
    p.add_argument("--angle", type=float)

    p = sub.add_parser("fit", help="fit one estimator to a dataset")
    _add_common(p)
    p.add_argument("--estimator", choices=list(_ESTIMATORS))
    p.add_argument("--data")
    p.add_argument("--lam", type=float)
    p.add_argument("--rule", choices=["fixed", "holdout", "oracle"])
    p.add_argument("--grid")
    p.add_argument("--fraction", type=float)
    p.add_argument("--anchor", choices=["lambda_max"])
    p.add_argument("--width", type=int)
    p.add_argument("--objective", choices=[net.WEIGHT_DECAY, net.PATH_NORM])
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--step-size", dest="step_size", type=float)
    p.add_argument("--init-scale", dest="init_scale", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-sweeps", dest="max_sweeps", type=int)

    p = sub.add_parser("evaluate", help="score a saved model against its dataset's target")
    _add_common(p)
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--grid-points", dest="grid_points", type=int)

    p = sub.add_parser("rate-study", help="sweep sample sizes and fit a log-log error slope")
    _add_common(p)
    p.add_argument("--preset", choices=["1d-gap"])
    p.add_argument("--target")
    p.add_argument("--estimator", choices=list(_ESTIMATORS))
    p.add_argument("--sizes")
    p.add_argument("--sigma", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--rule", choices=["oracle", "holdout", "fixed"])
    p.add_argument("--grid")
    p.add_argument("--fraction", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--anchor", choices=["lambda_max"])
    p.add_argument("--eval-grid", dest="eval_grid", type=int)
    p.add_argument("--design", choices=["grid", "ball"])
    p.add_argument("--threads", type=int)
    p.add_argument("--angle", type=float)
    p.add_argument("--width", type=int)
    p.add_argument("--objective", choices=[net.WEIGHT_DECAY, net.PATH_NORM])
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--step-size", dest="step_size", type=float)
    p.add_argument("--init-scale", dest="init_scale", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-sweeps", dest="max_sweeps", type=int)

    p = sub.add_parser("approx-study", help="noiseless width sweep of the network approximation error")
    _add_common(p)
    p.add_argument("--preset", choices=["2d-triangle"])
    p.add_argument("--target")
    p.add_argument("--widths")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--angle", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--eval-points", dest="eval_points", type=int)
    p.add_argument("--objective", choices=[net.WEIGHT_DECAY, net.PATH_NORM])
    p.add_argument("--init-scale", dest="init_scale", type=float)
    p.add_argument("--threads", type=int)

    p = sub.add_parser("reproduce", help="rebuild a comparison figure end to end")
    _add_common(p)
    p.add_argument("--figure", choices=["fig1", "fig2", "fig3"])
    p.add_argument("--n", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--restarts", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--threads", type=int)
    return parser


_RUNNERS = {
    "generate": _cmd_generate,
    "fit": _cmd_fit,
    "evaluate": _cmd_evaluate,
    "rate-study": _cmd_rate_study,
    "approx-study": _cmd_approx_study,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise ConfigError("no command given (choices: " + ", ".join(_RUNNERS) + ")")
        runner = _RUNNERS[args.command]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        runner(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # fit failures, solver errors: runtime exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
