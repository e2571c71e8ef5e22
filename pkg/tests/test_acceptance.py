"""Acceptance gate: one test per advertised guarantee, each printing a
single pass/fail line with the measured numbers and elapsed time.

Budgets assume warm compiled kernels (the session fixture in conftest
touches every kernel once before any timed test runs).
"""

import json
import time

import numpy as np

from adaptix import cli
from adaptix import experiments as ex
from adaptix import network as net
from adaptix import smoothers as sm
from adaptix import targets as tg
from adaptix import trendfilter as tf
from adaptix.cli import CSS_ORACLE_GRID, HEAT_RELU_LAM, HEAT_TPS_GRID, TREND_ORACLE_GRID


def _report(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _random_net(rng, d, k):
    return net.NetworkParams(
        v=rng.standard_normal(k) * rng.uniform(0.1, 3.0),
        W=rng.standard_normal((k, d)) * rng.uniform(0.1, 3.0),
        b=rng.uniform(-1.0, 1.0, k),
        c=rng.standard_normal(d),
        c0=float(rng.standard_normal()),
    )


def test_criterion_1_path_norm_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    clouds = {d: tg.uniform_ball(50, d, np.random.default_rng(d)) for d in (1, 2, 5)}
    worst_gap = 0.0  # path norm above weight decay (should never happen)
    worst_eq = 0.0  # |wd - pn| after balance
    worst_fwd = 0.0  # forward drift under balance
    count = 0
    while count < 1000:
        for d in (1, 2, 5):
            k = int(rng.integers(1, 33))
            p = _random_net(rng, d, k)
            worst_gap = max(worst_gap, net.path_norm(p) - net.weight_decay_penalty(p))
            q = net.balance(p)
            worst_eq = max(worst_eq, abs(net.weight_decay_penalty(q) - net.path_norm(q)))
            worst_fwd = max(worst_fwd, float(np.max(np.abs(
                net.forward(p, clouds[d]) - net.forward(q, clouds[d])))))
            count += 1
    elapsed = time.perf_counter() - start
    ok = worst_gap <= 0.0 and worst_eq < 1e-10 and worst_fwd < 1e-12 and elapsed < 10.0
    _report(1, ok, f"n=1000, am-gm slack {worst_gap:.1e}, balance eq {worst_eq:.1e}, "
                   f"forward drift {worst_fwd:.1e}, {elapsed:.1f}s < 10s")


def test_criterion_2_gradient_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(77)
    worst = 0.0
    for draw in range(100):
        kind = net.WEIGHT_DECAY if draw % 2 == 0 else net.PATH_NORM
        d = (1, 2, 5)[draw % 3]
        pts = tg.uniform_ball(20, d, rng)
        y = rng.standard_normal(20)
        data = tg.Dataset(dimension=d, points=pts, responses=y, sigma=0.0, seed=0, design="ball")
        while True:  # keep every relu argument and |v| clear of the kinks
            p = _random_net(rng, d, 4)
            pre = pts @ p.W.T - p.b
            if np.min(np.abs(pre)) > 1e-3 and np.min(np.abs(p.v)) > 1e-3:
                break
        g = net.gradient(p, data, 0.4, kind)
        ana = np.concatenate([g.v, g.W.ravel(), g.b, g.c, [g.c0]])
        theta = np.concatenate([p.v, p.W.ravel(), p.b, p.c, [p.c0]])
        k = p.K

        def unflat(th):
            return net.NetworkParams(v=th[:k], W=th[k:k + k * d].reshape(k, d),
                                     b=th[k + k * d:2 * k + k * d],
                                     c=th[2 * k + k * d:-1], c0=th[-1])

        h = 1e-6
        num = np.empty_like(theta)
        for i in range(theta.size):
            up, dn = theta.copy(), theta.copy()
            up[i] += h
            dn[i] -= h
            num[i] = (net.objective(unflat(up), data, 0.4, kind)
                      - net.objective(unflat(dn), data, 0.4, kind)) / (2 * h)
        rel = np.max(np.abs(ana - num) / np.maximum(np.abs(num), 1.0))
        worst = max(worst, float(rel))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-5 and elapsed < 30.0
    _report(2, ok, f"100 draws, max relative gradient error {worst:.1e} < 1e-5, "
                   f"{elapsed:.1f}s < 30s")


def test_criterion_3_representer_equivalence():
    start = time.perf_counter()
    lam = 1.0
    embed_gaps, ratios, knot_counts = [], [], []
    for seed in range(5):
        data = tg.make_dataset(tg.inhomogeneous_1d(), 50, 0.25, seed, "grid")
        model, _ = tf.fit_trend(data, lam)
        J_tf = tf.trend_objective(model, data, lam)
        params = ex.embed_as_network(model)
        J_embed = net.objective(params, data, lam, net.PATH_NORM)
        embed_gaps.append(abs(J_embed - J_tf) / J_tf)
        knot_counts.append(model.knots.size)
        _, rep = net.train(data, net.TrainConfig(
            lam=lam, kind=net.PATH_NORM, width=64, restarts=10, seed=seed))
        ratios.append(rep.final_objective / J_tf)
    med = float(np.median(ratios))
    elapsed = time.perf_counter() - start
    ok = (max(embed_gaps) < 1e-8 and med <= 1.05 and max(knot_counts) <= 48
          and elapsed < 120.0)
    _report(3, ok, f"embed gap {max(embed_gaps):.1e} < 1e-8, median train/convex "
                   f"{med:.4f} <= 1.05, knots <= {max(knot_counts)} (cap 48), "
                   f"{elapsed:.1f}s < 120s")


def test_criterion_4_rate_gap():
    start = time.perf_counter()
    target = tg.inhomogeneous_1d()
    sizes = (64, 128, 256, 512, 1024, 2048, 4096)
    common = dict(target=target, Ns=sizes, sigma=0.25, trials=20,
                  eval_grid=ex.EVAL_POINTS_1D, seed=0, design="grid")
    res_tf = ex.rate_study(ex.ExperimentSpec(
        estimator=ex.TrendFilterEstimator(),
        lambda_rule=ex.OracleRule(TREND_ORACLE_GRID, anchor="lambda_max"), **common))
    res_css = ex.rate_study(ex.ExperimentSpec(
        estimator=ex.CssEstimator(),
        lambda_rule=ex.OracleRule(CSS_ORACLE_GRID), **common))
    slope = res_tf.slope
    tf_last, css_last = res_tf.mse_mean[-1], res_css.mse_mean[-1]
    elapsed = time.perf_counter() - start
    ok = -0.95 <= slope <= -0.65 and tf_last < css_last and elapsed < 600.0
    _report(4, ok, f"adaptive slope {slope:.3f} in [-0.95, -0.65], N=4096 mse "
                   f"{tf_last:.2e} (adaptive) < {css_last:.2e} (smoothing), "
                   f"{elapsed:.0f}s < 600s")


def test_criterion_5_2d_figures():
    start = time.perf_counter()
    where = ex.GridEval(10_000, seed=0)
    medians = {}
    for name, target in (("triangle", tg.triangle_ridge_2d()),
                         ("gaussmix", tg.gaussian_mix_2d())):
        lam_net = HEAT_RELU_LAM["fig3" if name == "triangle" else "fig2"]
        net_est = ex.ReluNetEstimator(width=128, restarts=5, max_iters=40_000,
                                      init_scale=0.7)
        tps_mses, net_mses = [], []
        for seed in range(5):
            data = tg.make_dataset(target, 500, 0.1, seed, "ball")
            lam_tps, _ = ex.select_lambda(ex.TpsEstimator(), data,
                                          ex.OracleRule(HEAT_TPS_GRID),
                                          target=target, where=where)
            pred_tps = ex.fit_estimator(ex.TpsEstimator(), data, lam_tps)
            tps_mses.append(ex.empirical_mse(pred_tps, target, where))
            pred_net = ex.fit_estimator(net_est, data, lam_net, seed=seed)
            net_mses.append(ex.empirical_mse(pred_net, target, where))
        medians[name] = (float(np.median(net_mses)), float(np.median(tps_mses)))
    tri_ratio = medians["triangle"][0] / medians["triangle"][1]
    mix_ratio = medians["gaussmix"][0] / medians["gaussmix"][1]
    elapsed = time.perf_counter() - start
    ok = tri_ratio <= 0.6 and mix_ratio <= 1.5 and elapsed < 900.0
    _report(5, ok, f"median mse ratio net/tps: triangle {tri_ratio:.3f} <= 0.6, "
                   f"bump mixture {mix_ratio:.3f} <= 1.5, {elapsed:.0f}s < 900s")


def test_criterion_6_approximation_sweep():
    start = time.perf_counter()
    base = ex.ReluNetEstimator(restarts=2, max_iters=8000, init_scale=0.7)
    res = ex.approximation_study(tg.triangle_ridge_2d(), [8, 16, 32, 64, 128],
                                 base, seed=0)
    errs = res.mse_mean
    non_increasing = all(a >= b for a, b in zip(errs, errs[1:]))
    elapsed = time.perf_counter() - start
    ok = non_increasing and res.slope <= -0.5 and elapsed < 600.0
    _report(6, ok, f"sup errors non-increasing={non_increasing}, slope "
                   f"{res.slope:.3f} <= -0.5, {elapsed:.0f}s < 600s")


def test_criterion_7_linearity_dichotomy():
    start = time.perf_counter()
    data1 = tg.make_dataset(tg.inhomogeneous_1d(), 50, 0.25, 0, "grid")
    rep_css = ex.linearity_probe(ex.CssEstimator(), data1, 1e-3)
    data2 = tg.make_dataset(tg.gaussian_mix_2d(), 50, 0.1, 0, "ball")
    rep_tps = ex.linearity_probe(ex.TpsEstimator(), data2, 1e-3)
    linear_worst = max(rep_css.max_additivity, rep_css.max_homogeneity,
                       rep_tps.max_additivity, rep_tps.max_homogeneity)
    half1, half2, lam = ex.trend_witness()
    m1, _ = tf.fit_trend(half1, lam)
    m2, _ = tf.fit_trend(half2, lam)
    total = tg.Dataset(dimension=1, points=half1.points,
                       responses=half1.responses + half2.responses,
                       sigma=0.0, seed=0, design="grid")
    m12, _ = tf.fit_trend(total, lam)
    grid = np.linspace(-1, 1, 513)
    violation = float(np.max(np.abs(
        tf.eval_spline(m12, grid) - tf.eval_spline(m1, grid) - tf.eval_spline(m2, grid))))
    elapsed = time.perf_counter() - start
    ok = linear_worst < 1e-8 and violation > 1e-3 and elapsed < 60.0
    _report(7, ok, f"linear probes {linear_worst:.1e} < 1e-8, adaptive additivity "
                   f"violation {violation:.2e} > 1e-3, {elapsed:.1f}s < 60s")


def test_criterion_8_solver_oracles():
    start = time.perf_counter()
    v = tg.Dataset(dimension=1, points=np.array([[-1.0], [0.0], [1.0]]),
                   responses=np.array([1.0, 0.0, 1.0]), sigma=0.0, seed=0, design="grid")
    model, _ = tf.fit_trend(v, 0.0)
    trend_err = max(abs(model.beta0 - 0.0), abs(model.beta1 + 1.0),
                    abs(model.coeffs[0] - 2.0) if model.knots.size == 1 else np.inf)
    x = np.linspace(-1, 1, 20)
    y_aff = 0.7 - 1.3 * x
    aff_data = tg.Dataset(dimension=1, points=x.reshape(-1, 1), responses=y_aff,
                          sigma=0.0, seed=0, design="grid")
    css_err = max(float(np.max(np.abs(sm.fit_css(aff_data, lam).fitted - y_aff)))
                  for lam in (0.0, 1e-4, 1.0, 1e4))
    pts = tg.uniform_ball(25, 2, np.random.default_rng(8))
    y_plane = 0.3 + 1.1 * pts[:, 0] - 0.7 * pts[:, 1]
    plane = tg.Dataset(dimension=2, points=pts, responses=y_plane,
                       sigma=0.0, seed=0, design="ball")
    tps_err = max(float(np.max(np.abs(sm.fit_tps(plane, lam).a)))
                  for lam in (0.0, 1e-3, 1.0))
    elapsed = time.perf_counter() - start
    ok = trend_err < 1e-8 and css_err < 1e-8 and tps_err < 1e-8 and elapsed < 1.0
    _report(8, ok, f"v-shape coeff error {trend_err:.1e}, affine residual {css_err:.1e}, "
                   f"planar kernel part {tps_err:.1e}, all < 1e-8, {elapsed:.2f}s < 1s")


def test_criterion_9_cli_determinism(tmp_path):
    start = time.perf_counter()
    problems = []

    def double_run(label, argv):
        out = tmp_path / label
        argv = argv + ["--out", str(out)]
        if cli.main(list(argv)) != 0:
            problems.append(f"{label}: first run failed")
            return
        first = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
        if cli.main(list(argv)) != 0:
            problems.append(f"{label}: second run failed")
            return
        second = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
        changed = sorted(set(first) ^ set(second))
        changed += [n for n in first if n in second and first[n] != second[n]]
        if changed:
            problems.append(f"{label}: artifacts changed on re-run: {changed}")

    data_dir = tmp_path / "gen"
    double_run("gen", ["generate", "--target", "inhom1d", "--n", "32",
                       "--sigma", "0.25", "--seed", "3"])
    csv = str(data_dir / "dataset.csv")
    double_run("fit-trend", ["fit", "--estimator", "trend", "--data", csv, "--lam", "0.2"])
    double_run("fit-relu", ["fit", "--estimator", "relu", "--data", csv, "--lam", "0.05",
                            "--width", "4", "--restarts", "1", "--max-iters", "150",
                            "--seed", "2"])
    model = str(tmp_path / "fit-trend" / "model.json")
    double_run("evaluate", ["evaluate", "--model", model, "--data", csv,
                            "--grid-points", "256"])
    double_run("rate-study", ["rate-study", "--target", "inhom1d", "--estimator",
                              "trend", "--sizes", "16,32,64", "--trials", "2",
                              "--rule", "oracle", "--grid", "0.05:0.5:3",
                              "--anchor", "lambda_max", "--eval-grid", "128",
                              "--seed", "3"])
    double_run("approx-study", ["approx-study", "--target", "inhom1d", "--widths",
                                "2,4,8", "--restarts", "1", "--max-iters", "200",
                                "--n-samples", "64", "--eval-points", "128",
                                "--seed", "0"])
    double_run("fig1", ["reproduce", "--figure", "fig1", "--n", "48",
                        "--sigma", "0.25", "--seed", "1"])
    double_run("fig2", ["reproduce", "--figure", "fig2", "--n", "24", "--width", "4",
                        "--restarts", "1", "--max-iters", "120", "--seed", "1"])
    double_run("fig3", ["reproduce", "--figure", "fig3", "--n", "24", "--width", "4",
                        "--restarts", "1", "--max-iters", "120", "--seed", "1"])
    elapsed = time.perf_counter() - start
    detail = ("all 6 commands re-ran byte-identical (9 invocations)"
              if not problems else "; ".join(problems))
    _report(9, not problems, f"{detail}, {elapsed:.0f}s")
