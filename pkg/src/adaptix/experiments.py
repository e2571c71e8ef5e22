"""Measurement harness: empirical MSE, regularization selection, N-sweeps
against estimation-rate targets, K-sweeps against approximation-rate
targets, the 1D convex-solver equivalence, and linear-vs-nonlinear probes.

Estimators are referenced through small frozen spec dataclasses
(TrendFilterEstimator, CssEstimator, TpsEstimator, ReluNetEstimator) so a
study can be described as pure data and reproduced bit-for-bit from its
seed.  RNG streams are derived with SeedSequence from (study seed, size
index, trial index); no stream is reused across trials.

Population-level error is approximated by a fixed quadrature grid: 4096
equispaced points on [-1, 1] in 1D, a seeded uniform-ball Monte-Carlo
cloud in higher dimension.  Studies share quadrature noise when they share
a seed, so estimator comparisons are paired.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import network as net
from . import smoothers as sm
from . import trendfilter as tf
from .targets import Dataset, TargetFunction, make_dataset, target_config, uniform_ball

EVAL_POINTS_1D = 4096
EVAL_POINTS_BALL = 10_000
_HOLDOUT_TAG = 0x686F6C64  # stream tag for hold-out splits
_EVAL_TAG = 0x6576616C  # stream tag for quadrature clouds

Predictor = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# Estimator specs


@dataclass(frozen=True)
class TrendFilterEstimator:
    """Exact 1D adaptive-spline solver (nonlinear in the responses)."""

    tol: float = 1e-8
    max_sweeps: int = 50_000
    name: str = field(default="trend", init=False)


@dataclass(frozen=True)
class CssEstimator:
    """Cubic smoothing spline (linear in the responses)."""

    name: str = field(default="css", init=False)


@dataclass(frozen=True)
class TpsEstimator:
    """Thin-plate spline (linear in the responses)."""

    name: str = field(default="tps", init=False)


@dataclass(frozen=True)
class ReluNetEstimator:
    """Shallow ReLU network trained by restarted monotone descent.

    Defaults mirror TrainConfig except restarts: a study fits many
    datasets unattended, so it buys basin robustness with extra starts.
    """

    width: Optional[int] = None
    kind: str = net.WEIGHT_DECAY
    restarts: int = 3
    max_iters: int = 20_000
    step_size: Optional[float] = None
    momentum: float = 0.9
    init_scale: float = 1.0
    grad_tol: float = 1e-8
    name: str = field(default="relu", init=False)


EstimatorSpec = Union[TrendFilterEstimator, CssEstimator, TpsEstimator, ReluNetEstimator]


def fit_estimator(est: EstimatorSpec, data: Dataset, lam: float, seed: int = 0) -> Predictor:
    """Fit the estimator at one lam; returns a predictor over (n, d) points."""
    if isinstance(est, TrendFilterEstimator):
        model, _ = tf.fit_trend(data, lam, tol=est.tol, max_sweeps=est.max_sweeps)
        return lambda pts: tf.eval_spline(model, np.asarray(pts)[:, 0])
    if isinstance(est, CssEstimator):
        model = sm.fit_css(data, lam)
        return lambda pts: sm.eval_css(model, np.asarray(pts)[:, 0])
    if isinstance(est, TpsEstimator):
        model = sm.fit_tps(data, lam)
        return lambda pts: sm.eval_tps(model, pts)
    if isinstance(est, ReluNetEstimator):
        cfg = net.TrainConfig(
            lam=lam,
            kind=est.kind,
            width=est.width,
            max_iters=est.max_iters,
            step_size=est.step_size,
            momentum=est.momentum,
            grad_tol=est.grad_tol,
            restarts=est.restarts,
            init_scale=est.init_scale,
            seed=seed,
        )
        params, _ = net.train(data, cfg)
        return lambda pts: net.forward(params, np.asarray(pts))
    raise TypeError(f"not an estimator spec: {type(est).__name__}")


# ---------------------------------------------------------------------------
# Error measurement


@dataclass(frozen=True)
class DesignEval:
    """Average squared gap over the given design points (empirical norm)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class GridEval:
    """Fixed quadrature: equispaced on [-1, 1] in 1D, seeded uniform-ball
    Monte-Carlo cloud otherwise."""

    n: int
    seed: int = 0


def eval_points(where: Union[DesignEval, GridEval], dimension: int) -> np.ndarray:
    if isinstance(where, DesignEval):
        pts = where.points
        if pts.ndim != 2 or pts.shape[1] != dimension:
            raise ValueError(f"design points must have shape (n, {dimension})")
        return pts
    if isinstance(where, GridEval):
        if dimension == 1:
            return np.linspace(-1.0, 1.0, where.n).reshape(-1, 1)
        rng = np.random.default_rng(np.random.SeedSequence([where.seed, _EVAL_TAG]))
        return uniform_ball(where.n, dimension, rng)
    raise TypeError(f"not an evaluation spec: {type(where).__name__}")


def _target_values(target: TargetFunction, pts: np.ndarray) -> np.ndarray:
    return np.asarray(target(pts if target.dimension > 1 else pts[:, 0]), dtype=float)


def empirical_mse(predict: Predictor, target: TargetFunction, where: Union[DesignEval, GridEval]) -> float:
    """Mean squared gap between predictor and target over the chosen points."""
    pts = eval_points(where, target.dimension)
    gap = np.asarray(predict(pts), dtype=float) - _target_values(target, pts)
    return float(np.mean(gap * gap))


def sup_error(predict: Predictor, target: TargetFunction, where: Union[DesignEval, GridEval]) -> float:
    pts = eval_points(where, target.dimension)
    return float(np.max(np.abs(np.asarray(predict(pts), dtype=float) - _target_values(target, pts))))


def loglog_slope(sizes: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """OLS slope of log(values) on log(sizes), with a 95% half-width."""
    s = np.asarray(sizes, dtype=float)
    v = np.asarray(values, dtype=float)
    if s.size != v.size or s.size < 3:
        raise ValueError("need at least 3 matching (size, value) pairs")
    if np.any(s <= 0) or np.any(v <= 0):
        raise ValueError("sizes and values must be positive for a log-log fit")
    lx, ly = np.log(s), np.log(v)
    xc = lx - lx.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ ly) / sxx
    resid = ly - (ly.mean() + slope * xc)
    dof = s.size - 2
    se = np.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return slope, 1.96 * float(se)


# ---------------------------------------------------------------------------
# Regularization selection


@dataclass(frozen=True)
class OracleRule:
    """lam minimizing quadrature MSE against the known target (simulation only).

    With anchor="lambda_max" the grid is in units of the dataset's affine
    collapse threshold (1D trend filter), so one relative grid serves every
    sample size without visiting the dense-active regime far below the
    useful range.
    """

    grid: tuple
    anchor: Optional[str] = None

    def __post_init__(self):
        _check_grid(self.grid)
        _check_anchor(self.anchor)


@dataclass(frozen=True)
class HoldOutRule:
    """lam minimizing squared error on a held-out fraction of the data."""

    grid: tuple
    fraction: float = 0.25
    anchor: Optional[str] = None

    def __post_init__(self):
        _check_grid(self.grid)
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("fraction must lie in (0, 1)")
        _check_anchor(self.anchor)


@dataclass(frozen=True)
class FixedRule:
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("lam must be nonnegative")


LambdaRule = Union[OracleRule, HoldOutRule, FixedRule]


def _check_grid(grid) -> None:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("grid must be a nonempty sequence")
    if np.any(g < 0):
        raise ValueError("grid values must be nonnegative")


def _check_anchor(anchor) -> None:
    if anchor not in (None, "lambda_max"):
        raise ValueError("anchor must be None or 'lambda_max'")


def _effective_grid(rule, data: Dataset) -> np.ndarray:
    grid = np.asarray(rule.grid, dtype=float)
    if getattr(rule, "anchor", None) == "lambda_max":
        return grid * tf.lambda_max(data)
    return grid


def default_lambda_grid(n: int, points_per_decade: float = 25 / 7) -> np.ndarray:
    """Log-spaced grid spanning [1e-5, 1e2] times the sample count."""
    lo, hi = 1e-5 * n, 1e2 * n
    count = max(2, int(round(points_per_decade * np.log10(hi / lo))) + 1)
    return np.geomspace(lo, hi, count)


def _with_responses(data: Dataset, y: np.ndarray) -> Dataset:
    return Dataset(
        dimension=data.dimension,
        points=data.points,
        responses=np.asarray(y, dtype=float),
        sigma=data.sigma,
        seed=data.seed,
        design=data.design,
    )


def _subset(data: Dataset, idx: np.ndarray) -> Dataset:
    return Dataset(
        dimension=data.dimension,
        points=data.points[idx],
        responses=data.responses[idx],
        sigma=data.sigma,
        seed=data.seed,
        design=data.design,
    )


def _fit_grid(est: EstimatorSpec, data: Dataset, grid: np.ndarray, seed: int) -> list[Predictor]:
    """One predictor per grid value; trend-filter grids share a warm-started path."""
    if isinstance(est, TrendFilterEstimator):
        fits = tf.fit_trend_path(data, grid, tol=est.tol, max_sweeps=est.max_sweeps)
        return [
            (lambda m: (lambda pts: tf.eval_spline(m, np.asarray(pts)[:, 0])))(model)
            for model, _ in fits
        ]
    return [fit_estimator(est, data, float(lam), seed=seed) for lam in grid]


def select_lambda(
    est: EstimatorSpec,
    data: Dataset,
    rule: LambdaRule,
    target: Optional[TargetFunction] = None,
    where: Optional[GridEval] = None,
    seed: int = 0,
) -> tuple[float, np.ndarray]:
    """Choose lam per the rule; returns (lam, score table of (lam, score) rows).

    Oracle scores against the known target on the quadrature grid; HoldOut
    scores on a deterministic held-out split (the caller refits on the full
    data at the returned lam); Fixed passes through with a NaN score.
    """
    if isinstance(rule, FixedRule):
        return rule.value, np.array([[rule.value, np.nan]])
    grid = _effective_grid(rule, data)
    if isinstance(rule, OracleRule):
        if target is None:
            raise ValueError("oracle selection requires the target function")
        if where is None:
            where = GridEval(EVAL_POINTS_1D if data.dimension == 1 else EVAL_POINTS_BALL, seed=0)
        preds = _fit_grid(est, data, grid, seed)
        scores = np.array([empirical_mse(p, target, where) for p in preds])
    else:
        rng = np.random.default_rng(np.random.SeedSequence([data.seed, _HOLDOUT_TAG]))
        perm = rng.permutation(len(data))
        n_hold = max(1, int(round(rule.fraction * len(data))))
        hold, keep = perm[:n_hold], perm[n_hold:]
        train_part, hold_part = _subset(data, np.sort(keep)), _subset(data, np.sort(hold))
        grid = _effective_grid(rule, train_part)  # anchor follows the data being fit
        preds = _fit_grid(est, train_part, grid, seed)
        scores = np.empty(grid.size)
        for i, p in enumerate(preds):
            r = hold_part.responses - np.asarray(p(hold_part.points), dtype=float)
            scores[i] = float(np.mean(r * r))
    best = int(np.argmin(scores))
    return float(grid[best]), np.column_stack([grid, scores])


# ---------------------------------------------------------------------------
# Rate studies


@dataclass(frozen=True)
class ExperimentSpec:
    target: TargetFunction
    estimator: EstimatorSpec
    Ns: tuple
    sigma: float
    trials: int
    lambda_rule: LambdaRule
    eval_grid: int = EVAL_POINTS_BALL
    seed: int = 0
    design: str = "ball"

    def __post_init__(self):
        ns = np.asarray(self.Ns, dtype=int)
        if ns.ndim != 1 or ns.size == 0 or np.any(np.diff(ns) <= 0):
            raise ValueError("Ns must be strictly increasing")
        object.__setattr__(self, "Ns", tuple(int(n) for n in ns))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.eval_grid < 1:
            raise ValueError("eval_grid must be positive")


@dataclass(frozen=True)
class TrialRecord:
    size: int
    trial: int
    dataset_seed: int
    lam: float
    mse: float
    fit_seconds: float
    error: Optional[str] = None


@dataclass(frozen=True)
class RateResult:
    """Per-size error statistics and the fitted log-log slope.

    rate_study fills mse_* with quadrature MSE; approximation_study reuses
    the container with sup-norm errors and a single trial per size.
    """

    sizes: tuple
    mse_mean: tuple
    mse_stderr: tuple
    slope: float
    slope_halfwidth: float
    per_trial: tuple
    excluded_sizes: tuple = ()


def _trial_seeds(spec_seed: int, size_index: int, trial: int) -> tuple[int, int]:
    state = np.random.SeedSequence((spec_seed, size_index, trial)).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def _run_trial(spec: ExperimentSpec, size_index: int, trial: int, where: GridEval) -> TrialRecord:
    n = spec.Ns[size_index]
    data_seed, fit_seed = _trial_seeds(spec.seed, size_index, trial)
    data = make_dataset(spec.target, n, spec.sigma, data_seed, spec.design)
    try:
        lam, _ = select_lambda(
            spec.estimator, data, spec.lambda_rule, target=spec.target, where=where, seed=fit_seed
        )
        start = time.perf_counter()
        pred = fit_estimator(spec.estimator, data, lam, seed=fit_seed)
        mse = empirical_mse(pred, spec.target, where)
        elapsed = time.perf_counter() - start
    except (ValueError, RuntimeError, FloatingPointError) as exc:
        return TrialRecord(n, trial, data_seed, np.nan, np.nan, np.nan, error=f"{type(exc).__name__}: {exc}")
    return TrialRecord(n, trial, data_seed, lam, mse, elapsed)


def rate_study(spec: ExperimentSpec, threads: int = 1) -> RateResult:
    """Sweep sample sizes: per (size, trial) a fresh seeded dataset, lam
    selection, fit, and quadrature MSE.  Deterministic given spec.seed;
    aggregation is a fold ordered by (size, trial) regardless of thread
    completion order."""
    where = GridEval(spec.eval_grid, seed=spec.seed)
    jobs = [(i, t) for i in range(len(spec.Ns)) for t in range(spec.trials)]
    records: list = [None] * len(jobs)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(_run_trial, spec, i, t, where): pos for pos, (i, t) in enumerate(jobs)}
            for fut, pos in futures.items():
                records[pos] = fut.result()
    else:
        for pos, (i, t) in enumerate(jobs):
            records[pos] = _run_trial(spec, i, t, where)

    seeds = [r.dataset_seed for r in records]
    if len(set(seeds)) != len(seeds):
        raise RuntimeError("dataset seed collision across trials")

    mse_mean, mse_stderr, excluded = [], [], []
    for i, n in enumerate(spec.Ns):
        rows = records[i * spec.trials : (i + 1) * spec.trials]
        good = np.array([r.mse for r in rows if r.error is None])
        if good.size == 0:
            msgs = "; ".join(str(r.error) for r in rows)
            raise RuntimeError(f"all {spec.trials} trials failed at N={n}: {msgs}")
        mse_mean.append(float(np.mean(good)))
        mse_stderr.append(float(np.std(good, ddof=1) / np.sqrt(good.size)) if good.size > 1 else 0.0)

    sizes = np.asarray(spec.Ns, dtype=float)
    means = np.asarray(mse_mean)
    use = means > 0
    excluded = [int(s) for s in sizes[~use]]
    if np.count_nonzero(use) >= 3:
        slope, half = loglog_slope(sizes[use], means[use])
    else:
        slope, half = np.nan, np.nan
    return RateResult(
        sizes=tuple(spec.Ns),
        mse_mean=tuple(mse_mean),
        mse_stderr=tuple(mse_stderr),
        slope=slope,
        slope_halfwidth=half,
        per_trial=tuple(records),
        excluded_sizes=tuple(excluded),
    )


def approximation_study(
    target: TargetFunction,
    Ks: Sequence[int],
    base: ReluNetEstimator,
    seed: int = 0,
    n_samples: int = 4096,
    eval_n: int = 8192,
) -> RateResult:
    """Noiseless K-sweep at lam = 0: train each width warm-started from the
    best smaller-width solution (padded with zero-output neurons), score by
    sup-norm error over a fixed dense grid.  Keeping the best model seen so
    far makes the error sequence non-increasing by construction."""
    ks = np.asarray(Ks, dtype=int)
    if ks.ndim != 1 or ks.size == 0 or np.any(np.diff(ks) <= 0):
        raise ValueError("Ks must be strictly increasing")
    d = target.dimension
    data = make_dataset(target, n_samples, 0.0, seed, "grid" if d == 1 else "ball")
    where = GridEval(eval_n, seed=seed)
    pts = eval_points(where, d)
    truth = _target_values(target, pts)

    best_params = None
    best_err = np.inf
    errs, records = [], []
    for i, k in enumerate(ks):
        _, fit_seed = _trial_seeds(seed, i, 0)
        cfg = net.TrainConfig(
            lam=0.0,
            kind=base.kind,
            width=int(k),
            max_iters=base.max_iters,
            step_size=base.step_size,
            momentum=base.momentum,
            grad_tol=base.grad_tol,
            restarts=base.restarts,
            init_scale=base.init_scale,
            seed=fit_seed,
            warm_start=best_params,
        )
        start = time.perf_counter()
        params, _ = net.train(data, cfg)
        elapsed = time.perf_counter() - start
        err = float(np.max(np.abs(net.forward(params, pts) - truth)))
        if err < best_err:
            best_err, best_params = err, params
        errs.append(best_err)
        records.append(TrialRecord(int(k), 0, data.seed, 0.0, best_err, elapsed))

    arr = np.asarray(errs)
    use = arr > 0  # an exact fit has no log; keep it out of the slope
    if np.count_nonzero(use) >= 3:
        slope, half = loglog_slope(ks[use], arr[use])
    else:
        slope, half = np.nan, np.nan
    return RateResult(
        sizes=tuple(int(k) for k in ks),
        mse_mean=tuple(errs),
        mse_stderr=tuple(0.0 for _ in errs),
        slope=slope,
        slope_halfwidth=half,
        per_trial=tuple(records),
        excluded_sizes=tuple(int(k) for k in ks[~use]),
    )


# ---------------------------------------------------------------------------
# 1D equivalence and linearity probes


def embed_as_network(model: tf.SplineModel) -> net.NetworkParams:
    """Transcribe a 1D spline as a network: one neuron per knot with w = 1,
    b = t_j, v = c_j, and the affine part in the skip connection.  Forward
    equals eval_spline and path_norm equals tv2."""
    k = model.knots.size
    return net.NetworkParams(
        v=model.coeffs,
        W=np.ones((k, 1)),
        b=model.knots,
        c=np.array([model.beta1]),
        c0=model.beta0,
        reduced=True,
    )


@dataclass(frozen=True)
class LinearityReport:
    max_additivity: float
    max_homogeneity: float


def linearity_probe(
    est: EstimatorSpec,
    data: Dataset,
    lam: float,
    probes: int = 5,
    seed: int = 0,
    probe_points: int = 100,
) -> LinearityReport:
    """Test whether the estimator is a linear map of the responses: compare
    fit(a*y1 + b*y2) with a*fit(y1) + b*fit(y2) on a fixed probe grid."""
    pts = eval_points(GridEval(probe_points, seed=seed), data.dimension)
    worst_add = 0.0
    worst_hom = 0.0
    for p in range(probes):
        rng = np.random.default_rng(np.random.SeedSequence((seed, p)))
        y1 = rng.standard_normal(len(data))
        y2 = rng.standard_normal(len(data))
        a, b = rng.uniform(0.5, 2.0, 2)
        f1 = fit_estimator(est, _with_responses(data, y1), lam)(pts)
        f2 = fit_estimator(est, _with_responses(data, y2), lam)(pts)
        f_mix = fit_estimator(est, _with_responses(data, a * y1 + b * y2), lam)(pts)
        f_scaled = fit_estimator(est, _with_responses(data, a * y1), lam)(pts)
        worst_add = max(worst_add, float(np.max(np.abs(f_mix - a * f1 - b * f2))))
        worst_hom = max(worst_hom, float(np.max(np.abs(f_scaled - a * f1))))
    return LinearityReport(max_additivity=worst_add, max_homogeneity=worst_hom)


def trend_witness(n: int = 33, amplitude: float = 1.0) -> tuple[Dataset, Dataset, float]:
    """Constructed additivity witness for the trend filter.

    Both halves are the same scaled V shape; lam is placed between the
    collapse threshold of each half and that of their sum, so each half
    fits as pure affine least squares while the sum activates a knot.
    """
    x = np.linspace(-1.0, 1.0, n)
    y_half = 0.5 * amplitude * np.abs(x)
    base = Dataset(dimension=1, points=x.reshape(-1, 1), responses=y_half, sigma=0.0, seed=0, design="grid")
    total = _with_responses(base, 2.0 * y_half)
    lam = 0.75 * tf.lambda_max(total)
    return base, _with_responses(base, y_half.copy()), lam


# ---------------------------------------------------------------------------
# Report serialization


def estimator_config(est: EstimatorSpec) -> dict:
    if isinstance(est, TrendFilterEstimator):
        return {"kind": est.name, "tol": est.tol, "max_sweeps": est.max_sweeps}
    if isinstance(est, CssEstimator):
        return {"kind": est.name}
    if isinstance(est, TpsEstimator):
        return {"kind": est.name}
    if isinstance(est, ReluNetEstimator):
        return {
            "kind": est.name,
            "width": est.width,
            "objective": est.kind,
            "restarts": est.restarts,
            "max_iters": est.max_iters,
            "step_size": est.step_size,
            "momentum": est.momentum,
            "init_scale": est.init_scale,
            "grad_tol": est.grad_tol,
        }
    raise TypeError(f"not an estimator spec: {type(est).__name__}")


def rule_config(rule: LambdaRule) -> dict:
    if isinstance(rule, OracleRule):
        return {"kind": "oracle", "grid": list(rule.grid), "anchor": rule.anchor}
    if isinstance(rule, HoldOutRule):
        return {"kind": "holdout", "grid": list(rule.grid), "fraction": rule.fraction, "anchor": rule.anchor}
    if isinstance(rule, FixedRule):
        return {"kind": "fixed", "value": rule.value}
    raise TypeError(f"not a lambda rule: {type(rule).__name__}")


def spec_config(spec: ExperimentSpec) -> dict:
    return {
        "target": target_config(spec.target),
        "estimator": estimator_config(spec.estimator),
        "Ns": list(spec.Ns),
        "sigma": spec.sigma,
        "trials": spec.trials,
        "lambda_rule": rule_config(spec.lambda_rule),
        "eval_grid": spec.eval_grid,
        "seed": spec.seed,
        "design": spec.design,
    }


def study_rows(result: RateResult) -> list[dict]:
    """Contractual per-trial rows (deterministic; timings stay separate)."""
    return [
        {"size": r.size, "trial": r.trial, "lambda": r.lam, "mse": r.mse}
        for r in result.per_trial
    ]


def study_summary(result: RateResult, spec_echo: dict) -> dict:
    return {
        "slope": result.slope,
        "slope_halfwidth": result.slope_halfwidth,
        "sizes": list(result.sizes),
        "mse_mean": list(result.mse_mean),
        "mse_stderr": list(result.mse_stderr),
        "excluded_sizes": list(result.excluded_sizes),
        "spec": spec_echo,
    }
