"""Shallow ReLU networks: algebraic identities, gradients, and training."""

import numpy as np
import pytest

from adaptix import network as net
from adaptix import targets as tg
from adaptix.network import PATH_NORM, WEIGHT_DECAY


def random_params(rng, d, k, scale=1.0):
    return net.NetworkParams(
        v=scale * rng.standard_normal(k),
        W=scale * rng.standard_normal((k, d)),
        b=rng.uniform(-1.0, 1.0, k),
        c=rng.standard_normal(d),
        c0=float(rng.standard_normal()),
    )


def random_data(rng, d, n, sigma=0.1):
    pts = tg.uniform_ball(n, d, rng)
    y = np.sin(pts.sum(axis=1)) + sigma * rng.standard_normal(n)
    return tg.Dataset(dimension=d, points=pts, responses=y, sigma=sigma, seed=0, design="ball")


class TestForward:
    def test_manual_two_neuron(self):
        p = net.NetworkParams(v=np.array([2.0, -1.0]), W=np.array([[1.0], [3.0]]),
                              b=np.array([0.5, -0.25]), c=np.array([0.7]), c0=0.1)
        x = 0.6
        expected = 2.0 * max(x - 0.5, 0.0) - 1.0 * max(3 * x + 0.25, 0.0) + 0.7 * x + 0.1
        assert net.forward(p, x) == pytest.approx(expected, rel=1e-15)

    def test_shapes(self):
        rng = np.random.default_rng(0)
        p = random_params(rng, 3, 4)
        one = net.forward(p, np.zeros(3))
        assert isinstance(one, float)
        batch = net.forward(p, np.zeros((7, 3)))
        assert batch.shape == (7,) and batch[0] == pytest.approx(one)
        with pytest.raises(ValueError):
            net.forward(p, np.zeros((7, 2)))
        with pytest.raises(ValueError):
            net.forward(p, 0.5)  # scalar needs d == 1

    def test_empty_network_is_affine(self):
        p = net.empty_network(2, c=[1.0, -2.0], c0=3.0)
        pts = np.array([[0.1, 0.2], [-0.3, 0.4]])
        assert np.allclose(net.forward(p, pts), pts @ [1.0, -2.0] + 3.0)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            net.NetworkParams(v=np.zeros(2), W=np.zeros((3, 1)), b=np.zeros(2), c=np.zeros(1), c0=0.0)
        with pytest.raises(ValueError):
            net.NetworkParams(v=np.zeros(2), W=np.zeros((2, 1)), b=np.zeros(3), c=np.zeros(1), c0=0.0)


class TestHomogeneity:
    def test_per_neuron_rescaling_invariance(self):
        rng = np.random.default_rng(1)
        pts = tg.uniform_ball(50, 2, rng)
        for _ in range(25):
            p = random_params(rng, 2, 6)
            a = rng.uniform(0.2, 5.0, 6)
            q = net.NetworkParams(v=p.v / a, W=a[:, None] * p.W, b=a * p.b, c=p.c, c0=p.c0)
            assert np.max(np.abs(net.forward(p, pts) - net.forward(q, pts))) < 1e-12
            assert net.path_norm(q) == pytest.approx(net.path_norm(p), rel=1e-12)


class TestAmGmBalance:
    def test_dominance_and_equality_after_balance(self):
        rng = np.random.default_rng(2)
        for trial in range(200):
            d = int(rng.integers(1, 4))
            k = int(rng.integers(1, 9))
            p = random_params(rng, d, k)
            lam = float(rng.uniform(0.1, 2.0))
            assert lam * net.weight_decay_penalty(p) >= lam * net.path_norm(p) - 1e-12
            q = net.balance(p)
            assert abs(net.weight_decay_penalty(q) - net.path_norm(q)) < 1e-10
            assert net.path_norm(q) == pytest.approx(net.path_norm(p), rel=1e-12, abs=1e-12)

    def test_balance_preserves_forward(self):
        rng = np.random.default_rng(3)
        pts = tg.uniform_ball(100, 3, rng)
        for _ in range(50):
            p = random_params(rng, 3, 5)
            q = net.balance(p)
            assert np.max(np.abs(net.forward(p, pts) - net.forward(q, pts))) < 1e-12

    def test_balance_zero_weight_neuron_folds_to_intercept(self):
        p = net.NetworkParams(v=np.array([2.0]), W=np.array([[0.0]]), b=np.array([-0.5]),
                              c=np.array([0.0]), c0=1.0)
        q = net.balance(p)
        assert q.K == 0
        assert q.c0 == pytest.approx(1.0 + 2.0 * 0.5)

    def test_objective_never_increases_under_balance(self):
        rng = np.random.default_rng(4)
        data = random_data(rng, 2, 30)
        for _ in range(30):
            p = random_params(rng, 2, 4)
            q = net.balance(p)
            assert net.objective(q, data, 0.7, WEIGHT_DECAY) <= net.objective(p, data, 0.7, WEIGHT_DECAY) + 1e-10
            assert net.objective(q, data, 0.7, PATH_NORM) == pytest.approx(
                net.objective(p, data, 0.7, PATH_NORM), rel=1e-12)


class TestReduce:
    def test_preserves_forward_on_ball(self):
        rng = np.random.default_rng(5)
        pts = tg.uniform_ball(1000, 2, rng)
        for _ in range(20):
            p = random_params(rng, 2, 8)
            q = net.reduce(p)
            assert np.max(np.abs(net.forward(p, pts) - net.forward(q, pts))) < 1e-9
            assert net.path_norm(q) <= net.path_norm(p) + 1e-10
            assert q.reduced

    def test_canonical_form(self):
        rng = np.random.default_rng(6)
        p = random_params(rng, 2, 6)
        q = net.reduce(p)
        assert np.allclose(np.linalg.norm(q.W, axis=1), 1.0, atol=1e-12)
        assert np.all(np.abs(q.b) <= 1.0)

    def test_merges_duplicates(self):
        w = tg.unit([1.0, 1.0])
        p = net.NetworkParams(v=np.array([1.5, -0.5]), W=np.vstack([w, w]),
                              b=np.array([0.2, 0.2]), c=np.zeros(2), c0=0.0)
        q = net.reduce(p)
        assert q.K == 1
        assert q.v[0] == pytest.approx(1.0)

    def test_drops_never_active_and_folds_always_active(self):
        pts = tg.uniform_ball(400, 1, np.random.default_rng(7))
        p = net.NetworkParams(
            v=np.array([3.0, 2.0]),
            W=np.array([[1.0], [1.0]]),
            b=np.array([1.5, -1.5]),  # first never fires on the ball, second always does
            c=np.array([0.5]), c0=0.1,
        )
        q = net.reduce(p)
        assert q.K == 0
        assert np.max(np.abs(net.forward(p, pts) - net.forward(q, pts))) < 1e-12

    def test_drops_tiny_outer_weights(self):
        p = net.NetworkParams(v=np.array([1e-12]), W=np.array([[1.0]]), b=np.array([0.0]),
                              c=np.zeros(1), c0=0.0)
        assert net.reduce(p).K == 0
        with pytest.raises(ValueError):
            net.reduce(p, merge_tol=0.0)


class TestObjectiveGradient:
    def test_objective_manual(self):
        rng = np.random.default_rng(8)
        data = random_data(rng, 2, 20)
        p = random_params(rng, 2, 3)
        r = data.responses - net.forward(p, data.points)
        want = float(r @ r) + 0.3 * net.path_norm(p)
        assert net.objective(p, data, 0.3, PATH_NORM) == pytest.approx(want, rel=1e-14)
        with pytest.raises(ValueError):
            net.objective(p, data, 0.3, "ridge")
        with pytest.raises(ValueError):
            net.objective(p, random_data(rng, 1, 10), 0.3)

    def _fd_check(self, p, data, lam, kind, rtol):
        g = net.gradient(p, data, lam, kind)
        theta = np.concatenate([p.v, p.W.ravel(), p.b, p.c, [p.c0]])
        ga = np.concatenate([g.v, g.W.ravel(), g.b, g.c, [g.c0]])
        k, d = p.K, p.d

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
            num[i] = (net.objective(unflat(up), data, lam, kind) -
                      net.objective(unflat(dn), data, lam, kind)) / (2 * h)
        scale = np.maximum(np.abs(num), 1.0)
        assert np.max(np.abs(ga - num) / scale) < rtol

    def test_gradient_matches_fd(self):
        rng = np.random.default_rng(9)
        for kind in (WEIGHT_DECAY, PATH_NORM):
            for d in (1, 2, 5):
                for _ in range(3):
                    data = random_data(rng, d, 25)
                    while True:
                        p = random_params(rng, d, 4)
                        pre = data.points @ p.W.T - p.b
                        if np.min(np.abs(pre)) > 1e-3 and np.min(np.abs(p.v)) > 1e-3:
                            break
                    self._fd_check(p, data, 0.4, kind, 1e-5)

    def test_dead_neurons_stay_dead(self):
        data = random_data(np.random.default_rng(10), 1, 15)
        p = net.NetworkParams(v=np.array([0.0]), W=np.array([[0.0]]), b=np.array([0.5]),
                              c=np.array([1.0]), c0=0.0)
        g = net.gradient(p, data, 0.5, PATH_NORM)
        assert g.v[0] == 0.0 and g.W[0, 0] == 0.0 and g.b[0] == 0.0


class TestKernelAgreement:
    """The compiled descent loop must score exactly the model the public
    numpy objective/gradient describe."""

    def test_objective_and_gradient_flat(self):
        rng = np.random.default_rng(11)
        for d in (1, 2, 3, 5):
            for kind in (WEIGHT_DECAY, PATH_NORM):
                data = random_data(rng, d, 30)
                p = random_params(rng, d, 6)
                theta = net._pack(p.v, p.W, p.b, p.c, p.c0)
                k = p.K
                lam = 0.37
                wd = kind == WEIGHT_DECAY
                a = np.empty(k)
                J_flat = net._objective_flat(theta, data.points, data.responses, lam, wd, k, d, a)
                assert J_flat == pytest.approx(net.objective(p, data, lam, kind), rel=1e-9)
                g = np.empty_like(theta)
                net._gradient_flat(theta, data.points, data.responses, lam, wd, k, d, g, a)
                gp = net.gradient(p, data, lam, kind)
                g_ref = net._pack(gp.v, gp.W, gp.b, gp.c, gp.c0)
                assert np.max(np.abs(g - g_ref)) < 1e-9 * max(1.0, np.max(np.abs(g_ref)))

    def test_pack_unpack_round_trip(self):
        rng = np.random.default_rng(12)
        p = random_params(rng, 3, 4)
        v, W, b, c, c0 = net._unpack(net._pack(p.v, p.W, p.b, p.c, p.c0), 4, 3)
        assert np.array_equal(v, p.v) and np.array_equal(W, p.W)
        assert np.array_equal(b, p.b) and np.array_equal(c, p.c) and c0 == p.c0


class TestTrain:
    def test_bit_deterministic(self):
        data = random_data(np.random.default_rng(13), 2, 40)
        cfg = net.TrainConfig(lam=0.01, width=8, max_iters=400, restarts=2, seed=5)
        p1, r1 = net.train(data, cfg)
        p2, r2 = net.train(data, cfg)
        assert np.array_equal(p1.v, p2.v) and np.array_equal(p1.W, p2.W)
        assert np.array_equal(p1.b, p2.b) and np.array_equal(p1.c, p2.c) and p1.c0 == p2.c0
        assert r1.final_objective == r2.final_objective
        assert np.array_equal(r1.restart_objectives, r2.restart_objectives)

    def test_report_consistency(self):
        data = random_data(np.random.default_rng(14), 1, 30)
        _, rep = net.train(data, net.TrainConfig(lam=0.1, width=6, max_iters=200, restarts=3))
        assert rep.restart_objectives.shape == (3,)
        assert rep.final_objective == pytest.approx(float(np.min(rep.restart_objectives)))

    def test_recovers_one_neuron_generator(self):
        gen = net.NetworkParams(v=np.array([1.3]), W=np.array([[0.8]]), b=np.array([0.2]),
                                c=np.array([0.4]), c0=-0.1)
        x = np.linspace(-1, 1, 40)
        y = net.forward(gen, x.reshape(-1, 1))
        data = tg.Dataset(dimension=1, points=x.reshape(-1, 1), responses=y,
                          sigma=0.0, seed=0, design="grid")
        losses = []
        for s in range(5):
            params, _ = net.train(data, net.TrainConfig(lam=1e-6, width=4, seed=s))
            r = y - net.forward(params, x.reshape(-1, 1))
            losses.append(float(r @ r))
        assert float(np.median(losses)) < 1e-6

    def test_huge_lam_collapses_to_affine_least_squares(self):
        data = random_data(np.random.default_rng(15), 1, 30)
        x = data.points[:, 0]
        lam_big = 2.0 * float(np.sum(np.abs(data.responses))) * float(np.max(np.abs(x)))
        params, _ = net.train(data, net.TrainConfig(lam=lam_big, width=8, seed=0))
        assert params.K == 0
        A = np.column_stack([np.ones_like(x), x])
        beta, *_ = np.linalg.lstsq(A, data.responses, rcond=None)
        assert np.max(np.abs(net.forward(params, data.points) - A @ beta)) < 1e-6

    def test_warm_start_never_increases(self):
        data = random_data(np.random.default_rng(16), 1, 30)
        small, _ = net.train(data, net.TrainConfig(lam=1e-3, width=6, seed=1, max_iters=2000))
        J_warm = net.objective(small, data, 1e-3, WEIGHT_DECAY)
        _, rep = net.train(data, net.TrainConfig(lam=1e-3, width=14, seed=2, warm_start=small))
        assert rep.final_objective <= J_warm + 1e-9

    def test_warm_start_validation(self):
        data = random_data(np.random.default_rng(17), 1, 20)
        wide = random_params(np.random.default_rng(18), 1, 10)
        with pytest.raises(ValueError):
            net.train(data, net.TrainConfig(width=4, warm_start=wide))
        wrong_d = random_params(np.random.default_rng(19), 2, 2)
        with pytest.raises(ValueError):
            net.train(data, net.TrainConfig(width=4, warm_start=wrong_d))

    def test_divergence_error(self):
        data = random_data(np.random.default_rng(20), 1, 20)
        with pytest.raises(net.TrainingDivergedError):
            net.train(data, net.TrainConfig(width=4, step_size=1e300, max_iters=10))

    def test_config_validation(self):
        for bad in (
            {"lam": -1.0},
            {"kind": "lasso"},
            {"width": 0},
            {"max_iters": 0},
            {"restarts": 0},
            {"step_size": 0.0},
            {"momentum": 1.0},
            {"grad_tol": 0.0},
            {"init_scale": 0.0},
        ):
            with pytest.raises(ValueError):
                net.TrainConfig(**bad)

    def test_width_defaults_to_sample_count(self):
        data = random_data(np.random.default_rng(21), 1, 12)
        too_wide = random_params(np.random.default_rng(22), 1, 13)
        with pytest.raises(ValueError):
            net.train(data, net.TrainConfig(warm_start=too_wide, max_iters=5))
        exact = random_params(np.random.default_rng(23), 1, 12)
        _, rep = net.train(data, net.TrainConfig(lam=1.0, max_iters=5, warm_start=exact))
        assert rep.restart_objectives.shape == (1,)


class TestSerialization:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(22)
        p = net.reduce(random_params(rng, 2, 5))
        q = net.network_from_config(net.network_config(p))
        assert np.array_equal(q.v, p.v) and np.array_equal(q.W, p.W)
        assert np.array_equal(q.b, p.b) and np.array_equal(q.c, p.c)
        assert q.c0 == p.c0 and q.reduced == p.reduced
