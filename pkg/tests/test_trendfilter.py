"""Locally adaptive spline solver: exactness, KKT certificates, paths."""

import numpy as np
import pytest

from adaptix import targets as tg
from adaptix import trendfilter as tf


def dataset_1d(x, y):
    x = np.asarray(x, dtype=float)
    return tg.Dataset(dimension=1, points=x.reshape(-1, 1),
                      responses=np.asarray(y, dtype=float),
                      sigma=0.0, seed=0, design="grid")


def v_data():
    return dataset_1d([-1.0, 0.0, 1.0], [1.0, 0.0, 1.0])


# Objectives of the split-variable QP solved independently (interior-point
# style, variables beta0, beta1, c+ >= 0, c- >= 0) on the dataset
# make_dataset(inhomogeneous_1d(), 25, 0.25, 11, "grid").
FROZEN_PROBLEM = dict(n=25, sigma=0.25, seed=11, design="grid")
FROZEN_OBJECTIVES = {0.05: 3.161249900970, 0.5: 3.849607599454}


class TestEvalSpline:
    def test_hand_check(self):
        m = tf.SplineModel(beta0=0.5, beta1=-2.0, knots=np.array([-0.3, 0.4]),
                           coeffs=np.array([1.0, -3.0]))
        x = 0.7
        want = 0.5 - 2.0 * x + 1.0 * (x + 0.3) - 3.0 * (x - 0.4)
        assert tf.eval_spline(m, x) == pytest.approx(want, rel=1e-15)
        assert isinstance(tf.eval_spline(m, x), float)
        out = tf.eval_spline(m, np.array([-0.9, 0.0, 0.7]))
        assert out.shape == (3,) and out[2] == pytest.approx(want)

    def test_tv2_and_objective(self):
        m = tf.SplineModel(beta0=0.0, beta1=1.0, knots=np.array([0.0]), coeffs=np.array([-2.5]))
        assert tf.tv2(m) == pytest.approx(2.5)
        data = dataset_1d([-0.5, 0.5], [0.0, 1.0])
        r = data.responses - tf.eval_spline(m, data.x)
        assert tf.trend_objective(m, data, 0.4) == pytest.approx(float(r @ r) + 0.4 * 2.5)

    def test_model_validation(self):
        with pytest.raises(ValueError):
            tf.SplineModel(beta0=0.0, beta1=0.0, knots=np.array([0.4, 0.1]), coeffs=np.zeros(2))
        with pytest.raises(ValueError):
            tf.SplineModel(beta0=0.0, beta1=0.0, knots=np.array([1.0]), coeffs=np.zeros(1))
        with pytest.raises(ValueError):
            tf.SplineModel(beta0=0.0, beta1=0.0, knots=np.array([0.1]), coeffs=np.zeros(2))


class TestVDataset:
    def test_unpenalized_solution(self):
        model, diag = tf.fit_trend(v_data(), 0.0)
        assert model.beta0 == pytest.approx(0.0, abs=1e-12)
        assert model.beta1 == pytest.approx(-1.0, abs=1e-12)
        assert model.knots.shape == (1,) and model.knots[0] == 0.0
        assert model.coeffs[0] == pytest.approx(2.0, abs=1e-12)
        assert diag.converged and diag.n_active == 1

    def test_lambda_max_by_hand(self):
        # affine LS is the flat line 2/3; the single hinge column is
        # (0, 0, 1), so max |2 a'r| = 2 * |1/3|
        assert tf.lambda_max(v_data()) == pytest.approx(2.0 / 3.0, rel=1e-12)

    def test_shrinkage_towards_affine(self):
        data = v_data()
        lam_max = tf.lambda_max(data)
        model, diag = tf.fit_trend(data, 1.01 * lam_max)
        assert model.knots.size == 0 and diag.n_active == 0
        assert model.beta0 == pytest.approx(2.0 / 3.0, rel=1e-10)
        assert model.beta1 == pytest.approx(0.0, abs=1e-10)
        model, diag = tf.fit_trend(data, 0.5 * lam_max)
        assert diag.n_active == 1
        assert 0.0 < model.coeffs[0] < 2.0


class TestExactness:
    def test_frozen_quadratic_program_objectives(self):
        data = tg.make_dataset(tg.inhomogeneous_1d(), FROZEN_PROBLEM["n"],
                               FROZEN_PROBLEM["sigma"], FROZEN_PROBLEM["seed"],
                               FROZEN_PROBLEM["design"])
        for lam, frozen in FROZEN_OBJECTIVES.items():
            model, diag = tf.fit_trend(data, lam)
            got = tf.trend_objective(model, data, lam)
            assert got == pytest.approx(frozen, rel=1e-9)
            assert diag.objective == pytest.approx(got, rel=1e-9)
            assert diag.kkt_residual <= 1e-8

    def test_unpenalized_default_grid_interpolates(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            n = int(rng.integers(3, 40))
            x = np.sort(rng.uniform(-1, 1, n))
            y = rng.standard_normal(n)
            data = dataset_1d(x, y)
            model, diag = tf.fit_trend(data, 0.0)
            assert np.max(np.abs(tf.eval_spline(model, x) - y)) < 1e-9
            assert diag.objective < 1e-12
            assert diag.converged

    def test_unsorted_input_handled(self):
        rng = np.random.default_rng(32)
        x = rng.permutation(np.linspace(-0.9, 0.9, 15))
        y = rng.standard_normal(15)
        model, _ = tf.fit_trend(dataset_1d(x, y), 0.0)
        assert np.max(np.abs(tf.eval_spline(model, x) - y)) < 1e-9

    def test_kkt_certificates_across_problems(self):
        rng = np.random.default_rng(33)
        for trial in range(12):
            n = int(rng.integers(10, 60))
            data = tg.make_dataset(tg.inhomogeneous_1d(), n, 0.3, 100 + trial, "grid")
            lam = float(rng.uniform(0.02, 1.0)) * tf.lambda_max(data)
            model, diag = tf.fit_trend(data, lam)
            assert diag.converged
            assert diag.kkt_residual <= 1e-8
            assert diag.n_active == model.knots.size
            # no single-coordinate move can beat a KKT point by much
            J = tf.trend_objective(model, data, lam)
            assert diag.objective == pytest.approx(J, rel=1e-9, abs=1e-12)

    def test_perturbing_the_solution_never_helps(self):
        data = tg.make_dataset(tg.inhomogeneous_1d(), 30, 0.25, 7, "grid")
        lam = 0.3 * tf.lambda_max(data)
        model, _ = tf.fit_trend(data, lam)
        J = tf.trend_objective(model, data, lam)
        rng = np.random.default_rng(34)
        x = np.sort(data.x)
        grid = x[1:-1]
        for _ in range(60):
            knots = model.knots.copy()
            coeffs = model.coeffs.copy()
            if coeffs.size and rng.random() < 0.7:
                coeffs = coeffs + 1e-4 * rng.standard_normal(coeffs.size)
                cand = tf.SplineModel(beta0=model.beta0, beta1=model.beta1,
                                      knots=knots, coeffs=coeffs)
            else:
                t_new = float(rng.choice(grid))
                if t_new in knots:
                    continue
                order = np.argsort(np.append(knots, t_new))
                cand = tf.SplineModel(
                    beta0=model.beta0, beta1=model.beta1,
                    knots=np.append(knots, t_new)[order],
                    coeffs=np.append(coeffs, 1e-4 * rng.standard_normal())[order],
                )
            assert tf.trend_objective(cand, data, lam) >= J - 1e-10


class TestLambdaPath:
    def test_path_matches_single_fits(self):
        data = tg.make_dataset(tg.inhomogeneous_1d(), 40, 0.25, 21, "grid")
        lam_max = tf.lambda_max(data)
        lams = [0.7 * lam_max, 0.0, 0.05 * lam_max, 1.3 * lam_max, 0.05 * lam_max]
        results = tf.fit_trend_path(data, lams)
        assert len(results) == len(lams)
        for lam, (model, diag) in zip(lams, results):
            single, _ = tf.fit_trend(data, lam)
            assert diag.lam == lam
            assert model.beta0 == pytest.approx(single.beta0, rel=1e-9, abs=1e-12)
            assert model.beta1 == pytest.approx(single.beta1, rel=1e-9, abs=1e-12)
            assert np.allclose(model.knots, single.knots)
            assert np.allclose(model.coeffs, single.coeffs, rtol=1e-9, atol=1e-12)

    def test_tv2_monotone_and_loss_monotone_in_lam(self):
        data = tg.make_dataset(tg.inhomogeneous_1d(), 50, 0.25, 22, "grid")
        lams = np.geomspace(1e-3, 1.0, 12) * tf.lambda_max(data)
        results = tf.fit_trend_path(data, lams)
        tvs = [tf.tv2(m) for m, _ in results]
        losses = [tf.trend_objective(m, data, 0.0) for m, _ in results]
        assert all(a >= b - 1e-10 for a, b in zip(tvs, tvs[1:]))
        assert all(a <= b + 1e-10 for a, b in zip(losses, losses[1:]))

    def test_above_lambda_max_is_affine(self):
        data = tg.make_dataset(tg.inhomogeneous_1d(), 35, 0.25, 23, "grid")
        lam_max = tf.lambda_max(data)
        model, _ = tf.fit_trend(data, lam_max * (1 + 1e-9))
        assert model.knots.size == 0
        x = data.x
        A = np.column_stack([np.ones_like(x), x])
        beta, *_ = np.linalg.lstsq(A, data.responses, rcond=None)
        assert model.beta0 == pytest.approx(beta[0], rel=1e-9)
        assert model.beta1 == pytest.approx(beta[1], rel=1e-9)
        model, _ = tf.fit_trend(data, 0.99 * lam_max)
        assert model.knots.size >= 1

    def test_path_validation(self):
        data = v_data()
        with pytest.raises(ValueError):
            tf.fit_trend_path(data, [])
        with pytest.raises(ValueError):
            tf.fit_trend_path(data, [0.1, -0.2])


class TestCustomGrid:
    def test_unpenalized_matches_least_squares(self):
        rng = np.random.default_rng(35)
        x = np.sort(rng.uniform(-1, 1, 20))
        y = rng.standard_normal(20)
        data = dataset_1d(x, y)
        grid = np.array([-0.5, 0.1, 0.6])
        model, diag = tf.fit_trend(data, 0.0, knot_grid=grid)
        design = np.column_stack([np.ones_like(x), x, np.maximum(x[:, None] - grid, 0.0)])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        assert np.max(np.abs(tf.eval_spline(model, x) - design @ coef)) < 1e-8
        assert set(model.knots) <= set(grid)
        assert diag.kkt_residual <= 1e-8

    def test_penalized_on_custom_grid(self):
        data = tg.make_dataset(tg.inhomogeneous_1d(), 30, 0.25, 8, "grid")
        grid = np.linspace(-0.8, 0.8, 9)
        lam = 0.2 * tf.lambda_max(data, knot_grid=grid)
        model, diag = tf.fit_trend(data, lam, knot_grid=grid)
        assert diag.kkt_residual <= 1e-8
        assert set(np.round(model.knots, 12)) <= set(np.round(grid, 12))

    def test_warm_start_accepted_on_grid(self):
        data = tg.make_dataset(tg.inhomogeneous_1d(), 30, 0.25, 9, "grid")
        lam = 0.1 * tf.lambda_max(data)
        model, _ = tf.fit_trend(data, lam)
        again, _ = tf.fit_trend(data, lam, warm_start=model)
        assert np.allclose(again.coeffs, model.coeffs, rtol=1e-9, atol=1e-12)
        grid = np.array([-0.4, 0.2])
        warm = tf.SplineModel(beta0=0.0, beta1=0.0, knots=np.array([0.2]), coeffs=np.array([0.3]))
        m2, d2 = tf.fit_trend(data, 0.0, knot_grid=grid, warm_start=warm)
        assert m2.knots.size <= 2 and d2.converged

    def test_off_grid_warm_start_raises(self):
        data = tg.make_dataset(tg.inhomogeneous_1d(), 20, 0.25, 10, "grid")
        warm = tf.SplineModel(beta0=0.0, beta1=0.0,
                              knots=np.array([0.123456789]), coeffs=np.array([1.0]))
        with pytest.raises(ValueError):
            tf.fit_trend(data, 0.1, warm_start=warm)

    def test_grid_validation(self):
        data = v_data()
        with pytest.raises(ValueError):
            tf.fit_trend(data, 0.1, knot_grid=np.array([[0.1]]))
        with pytest.raises(ValueError):
            tf.fit_trend(data, 0.1, knot_grid=np.array([0.5, 0.2]))
        with pytest.raises(ValueError):
            tf.fit_trend(data, 0.1, knot_grid=np.array([-1.0, 0.2]))


class TestEdgeCases:
    def test_two_points(self):
        data = dataset_1d([-0.5, 0.5], [1.0, 3.0])
        model, _ = tf.fit_trend(data, 0.0)
        assert model.knots.size == 0
        assert tf.eval_spline(model, -0.5) == pytest.approx(1.0)
        assert tf.eval_spline(model, 0.5) == pytest.approx(3.0)
        assert tf.lambda_max(data) == 0.0
        model, _ = tf.fit_trend(data, 5.0)  # no candidate knots: affine LS
        assert model.knots.size == 0

    def test_input_validation(self):
        with pytest.raises(ValueError):
            tf.fit_trend(dataset_1d([0.5], [1.0]), 0.1)
        with pytest.raises(ValueError):
            tf.fit_trend(dataset_1d([0.1, 0.1, 0.3], [1.0, 2.0, 3.0]), 0.1)
        rng = np.random.default_rng(36)
        data2 = tg.make_dataset(tg.gaussian_mix_2d(), 10, 0.1, 0, "ball")
        with pytest.raises(ValueError):
            tf.fit_trend(data2, 0.1)
        data = v_data()
        with pytest.raises(ValueError):
            tf.fit_trend(data, -0.1)
        with pytest.raises(ValueError):
            tf.fit_trend(data, 0.1, tol=0.0)
        with pytest.raises(ValueError):
            tf.fit_trend(data, 0.1, max_sweeps=0)

    def test_duplicate_x_raises_even_unpenalized(self):
        with pytest.raises(ValueError):
            tf.fit_trend(dataset_1d([-0.2, -0.2, 0.4], [0.0, 1.0, 2.0]), 0.0)


class TestSerialization:
    def test_round_trip_exact(self):
        data = tg.make_dataset(tg.inhomogeneous_1d(), 30, 0.25, 12, "grid")
        model, _ = tf.fit_trend(data, 0.1 * tf.lambda_max(data))
        back = tf.spline_from_config(tf.spline_config(model))
        assert back.beta0 == model.beta0 and back.beta1 == model.beta1
        assert np.array_equal(back.knots, model.knots)
        assert np.array_equal(back.coeffs, model.coeffs)
