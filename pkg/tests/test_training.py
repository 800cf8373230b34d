import numpy as np
import pytest

import odelearn as ol
from odelearn.training import _phi_with_grad

LOG2 = 0.6931471805599453


def make_proj(kind="linear", d=1, m=1, seed=0, trainable=False):
    if kind == "linear" and d == m:
        return ol.Projector("linear", np.eye(d), np.zeros(d), trainable=trainable)
    rng = np.random.default_rng(seed)
    return ol.Projector(kind, 0.5 * rng.standard_normal((m, d)), np.zeros(m), trainable=trainable)


class TestProjector:
    def test_softmax_rows_normalized(self):
        rng = np.random.default_rng(0)
        proj = make_proj("softmax", d=4, m=3)
        out = proj(rng.standard_normal((10, 4)))
        assert np.all(out > 0)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, rtol=1e-12)

    def test_tanh_affine_range_and_width(self):
        proj = make_proj("tanh_affine", d=3, m=1)
        out = proj(np.random.default_rng(1).standard_normal((20, 3)) * 10)
        assert np.all(np.abs(out) < 1.0)
        with pytest.raises(ValueError):
            ol.Projector("tanh_affine", np.ones((2, 3)), np.zeros(2))


class TestTrainingError:
    def test_exact_fit_is_zero(self):
        proj = ol.Projector.identity(2)
        labels = np.array([[1.0, -1.0], [0.5, 0.0]])
        assert ol.training_error(labels.copy(), labels, proj, "mse") == 0.0

    def test_half_squared_gap(self):
        proj = ol.Projector.identity(1)
        err = ol.training_error(np.array([[0.5]]), np.array([[1.0]]), proj, "mse")
        np.testing.assert_allclose(err, 0.125, rtol=1e-15)

    def test_logistic_at_zero_margin(self):
        proj = ol.Projector("linear", np.zeros((1, 2)), np.zeros(1))
        err = ol.training_error(np.ones((3, 2)), np.ones((3, 1)), proj, "logistic")
        np.testing.assert_allclose(err, LOG2, rtol=1e-15)


class TestRegNorm:
    def test_zero_control(self):
        assert ol.reg_norm(ol.ControlPath.zeros(2, 5, 1.0), 0) == 0.0
        assert ol.reg_norm(ol.ControlPath.zeros(2, 5, 1.0), 1) == 0.0

    def test_constant_scalar_l2(self):
        for horizon in (1.0, 4.0):
            u = ol.ControlPath.standard(np.full((8, 1, 1), 3.0), np.zeros((8, 1)), horizon=horizon)
            np.testing.assert_allclose(ol.reg_norm(u, 0), 9.0 * horizon, rtol=1e-14)
            np.testing.assert_allclose(ol.reg_norm(u, 1), 9.0 * horizon, rtol=1e-14)

    def test_single_node_h1_rejected(self):
        u = ol.ControlPath.zeros(1, 1, 1.0)
        with pytest.raises(ValueError):
            ol.reg_norm(u, 1)

    def test_h1_ramp_value(self):
        # w ramps 0 -> 1 over [0, 1] with K cells: derivative 1 at interior nodes
        k = 10
        vals = np.linspace(0.0, 1.0, k)
        u = ol.ControlPath.standard(vals.reshape(k, 1, 1), np.zeros((k, 1)), horizon=1.0)
        dt = 1.0 / k
        slope = (vals[1] - vals[0]) / dt
        expected = ol.reg_norm(u, 0) + slope**2 * dt * (k - 1)
        np.testing.assert_allclose(ol.reg_norm(u, 1), expected, rtol=1e-12)

    def test_l1_constant(self):
        u = ol.ControlPath.standard(np.full((4, 1, 1), -2.0), np.zeros((4, 1)), horizon=3.0)
        np.testing.assert_allclose(ol.l1_norm(u), 6.0, rtol=1e-14)


class TestCost:
    def test_zero_control_beta_zero_is_initial_error(self):
        rng = np.random.default_rng(5)
        x0 = rng.standard_normal((6, 2))
        labels = rng.choice([-1.0, 1.0], size=(6, 1))
        proj = make_proj("tanh_affine", d=2, m=1)
        spec = ol.FunctionalSpec("mse", proj, alpha=0.7)
        u = ol.ControlPath.zeros(2, 4, 2.0)
        value = ol.cost(u, x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH)
        np.testing.assert_allclose(value, ol.training_error(x0, labels, proj, "mse"), rtol=1e-14)

    def test_one_layer_scalar_demo(self):
        # d = m = N = 1, x0 = 0, dt = 1, sigma outside tanh, b = 5:
        # the unregularized objective is half of (tanh(5) - 1)^2
        proj = ol.Projector("linear", np.array([[1.0]]), np.zeros(1))
        spec = ol.FunctionalSpec("mse", proj, alpha=0.0)
        u = ol.ControlPath.standard(np.zeros((1, 1, 1)), np.array([[5.0]]), horizon=1.0)
        value = ol.cost(u, np.array([[0.0]]), np.array([[1.0]]), spec, ol.SIGMA_OUTSIDE, ol.TANH)
        np.testing.assert_allclose(2 * value, (np.tanh(5.0) - 1.0) ** 2, rtol=1e-12)
        np.testing.assert_allclose(2 * value, 8.243865930898064e-09, rtol=1e-12)

    def test_unregularized_demo_has_no_minimizer_but_ridge_does(self):
        # along b -> infinity the raw objective strictly decreases; adding
        # (alpha/2) b^2 creates an interior grid minimum
        bs = np.linspace(0.0, 12.0, 121)
        raw = (np.tanh(bs) - 1.0) ** 2
        assert np.all(np.diff(raw) < 0)
        alpha = 0.1
        ridge = raw + 0.5 * alpha * bs**2
        best = np.argmin(ridge)
        assert 0 < best < len(bs) - 1

    def test_turnpike_configuration_accepted(self):
        rng = np.random.default_rng(6)
        x0 = rng.standard_normal((8, 2))
        labels = rng.choice([-1.0, 1.0], size=(8, 1))
        x_d = 2.0 * labels * np.ones((1, 2))
        spec = ol.FunctionalSpec("mse", make_proj("tanh_affine", d=2), alpha=2.0, beta=100.0, x_d=x_d)
        u = ol.random_control(2, 50, 20.0, seed=0, scale=0.05)
        value = ol.cost(u, x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH)
        assert np.isfinite(value) and value >= 0

    def test_l1_infeasible_rejected(self):
        proj = make_proj("tanh_affine", d=2)
        spec = ol.FunctionalSpec("mse", proj, alpha=0.1, l1_mode=True, l1_bound=1.0)
        u = ol.ControlPath.standard(np.full((3, 2, 2), 2.0), np.zeros((3, 2)), horizon=1.0)
        with pytest.raises(ol.ConstraintViolation):
            ol.cost(u, np.zeros((2, 2)), np.ones((2, 1)), spec, ol.SIGMA_INSIDE, ol.TANH)

    def test_spec_invariants(self):
        proj = make_proj("tanh_affine", d=2)
        with pytest.raises(ValueError):
            ol.FunctionalSpec("mse", proj, l1_mode=True)  # missing bound
        with pytest.raises(ValueError):
            ol.FunctionalSpec("mse", proj, beta=1.0)  # missing target
        with pytest.raises(ValueError):
            ol.FunctionalSpec("mse", proj, include_final_cost=False)  # needs beta > 0


def finite_difference(u, x0, labels, spec_builder, tag, act, h=1e-5):
    spec = spec_builder()
    blocks = list(u.params)
    theta = [spec.projector.theta1, spec.projector.theta2] if spec.projector.trainable else []
    blocks += theta
    out = []
    for bi in range(len(blocks)):
        g = np.zeros(blocks[bi].size)
        for idx in range(blocks[bi].size):
            vals = []
            for sgn in (+h, -h):
                pieces = [b.copy() for b in blocks]
                pieces[bi].ravel()[idx] += sgn
                uu = u.with_params(tuple(pieces[: len(u.params)]))
                ss = spec_builder()
                if ss.projector.trainable:
                    ss.projector.theta1 = pieces[-2]
                    ss.projector.theta2 = pieces[-1]
                vals.append(ol.cost(uu, x0, labels, ss, tag, act))
            g[idx] = (vals[0] - vals[1]) / (2 * h)
        out.append(g)
    return np.concatenate(out)


class TestGrad:
    def test_constant_loss_gives_zero_gradient(self):
        # logistic loss against zero labels is identically log 2
        rng = np.random.default_rng(7)
        x0 = rng.standard_normal((3, 2))
        labels = np.zeros((3, 1))
        proj = make_proj("tanh_affine", d=2, trainable=True)
        spec = ol.FunctionalSpec("logistic", proj, alpha=0.0)
        u = ol.random_control(2, 4, 1.0, seed=1, scale=0.5)
        g = ol.grad(u, x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH)
        assert np.all(g.flat() == 0.0)

    @pytest.mark.parametrize(
        "tag,hidden,loss,spec_kw,seed",
        [
            (ol.SIGMA_INSIDE, None, "mse", dict(alpha=0.6), 0),
            (ol.SIGMA_OUTSIDE, None, "mse", dict(alpha=0.5, sobolev_order=1), 1),
            (ol.BOTTLENECK, 5, "logistic", dict(alpha=0.3), 2),
            (ol.SIGMA_INSIDE, None, "mse", dict(alpha=0.4, beta=2.0), 3),
            (ol.SIGMA_INSIDE, None, "mse", dict(alpha=0.2, l1_mode=True, l1_bound=9.0), 4),
        ],
    )
    def test_matches_finite_differences(self, tag, hidden, loss, spec_kw, seed):
        rng = np.random.default_rng(seed)
        d, n, k = 3, 4, 5
        x0 = rng.standard_normal((n, d))
        labels = rng.choice([-1.0, 1.0], size=(n, 1))
        if spec_kw.get("beta", 0) > 0:
            spec_kw = dict(spec_kw, x_d=rng.standard_normal((n, d)))

        def build():
            proj = ol.Projector(
                "tanh_affine",
                0.3 * np.random.default_rng(seed + 50).standard_normal((1, d)),
                np.zeros(1),
                trainable=True,
            )
            return ol.FunctionalSpec(loss, proj, **spec_kw)

        u = ol.random_control(d, k, 1.3, seed=seed + 10, scale=0.4, hidden=hidden)
        spec = build()
        g = ol.grad(u, x0, labels, spec, tag, ol.TANH).flat()
        fd = finite_difference(u, x0, labels, build, tag, ol.TANH)
        rel = np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(fd)))
        assert rel <= 1e-6

    def test_scalar_linear_closed_form(self):
        # J = 0.5 ((1 + dt w)^K - e)^2 under identity dynamics and readout
        k, horizon = 6, 1.2
        dt = horizon / k
        proj = ol.Projector("linear", np.array([[1.0]]), np.zeros(1))
        spec = ol.FunctionalSpec("mse", proj, alpha=0.0)
        u = ol.ControlPath.standard(np.ones((k, 1, 1)), np.zeros((k, 1)), horizon=horizon)
        target = np.array([[np.e]])
        g = ol.grad(u, np.array([[1.0]]), target, spec, ol.SIGMA_INSIDE, ol.IDENTITY)
        residual = (1 + dt) ** k - np.e
        expected_per_node = residual * dt * (1 + dt) ** (k - 1)
        np.testing.assert_allclose(g.params[0].ravel(), expected_per_node, rtol=1e-12)


class TestProjectBall:
    def test_inside_unchanged(self):
        u = ol.random_control(2, 4, 1.0, seed=0, scale=0.01)
        v = ol.project_ball(u, 10.0)
        for a, b in zip(u.params, v.params):
            np.testing.assert_array_equal(a, b)

    def test_scalar_radial(self):
        u = ol.ControlPath.standard(np.array([[[3.0]]]), np.zeros((1, 1)), horizon=1.0)
        v = ol.project_ball(u, 2.0)
        np.testing.assert_allclose(v.params[0][0, 0, 0], 2.0, rtol=1e-15)

    def test_idempotent(self):
        u = ol.random_control(3, 6, 1.0, seed=3, scale=2.0)
        once = ol.project_ball(u, 1.5)
        twice = ol.project_ball(once, 1.5)
        for a, b in zip(once.params, twice.params):
            np.testing.assert_array_equal(a, b)

    def test_nonexpansive_toward_feasible_points(self):
        rng = np.random.default_rng(9)
        bound = 2.0
        for trial in range(20):
            u = ol.random_control(2, 5, 1.0, seed=trial, scale=1.5)
            proj = ol.project_ball(u, bound)
            feas = ol.random_control(2, 5, 1.0, seed=1000 + trial, scale=0.3)
            feas = ol.project_ball(feas, bound)

            def dist(a, b):
                return np.sqrt(sum(np.sum((x - y) ** 2) for x, y in zip(a.params, b.params)))

            assert dist(proj, feas) <= dist(u, feas) + 1e-12


class TestAdam:
    def test_zero_gradient_leaves_control_unchanged(self):
        x0 = np.random.default_rng(0).standard_normal((3, 2))
        labels = np.zeros((3, 1))
        proj = make_proj("tanh_affine", d=2)
        spec = ol.FunctionalSpec("logistic", proj, alpha=0.0)
        u0 = ol.random_control(2, 3, 1.0, seed=4, scale=0.5)
        u, report = ol.adam_train(u0, x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH, lr=1e-2, iters=5)
        for a, b in zip(u0.params, u.params):
            np.testing.assert_array_equal(a, b)
        assert report.iterations == 5

    def test_first_step_magnitude(self):
        rng = np.random.default_rng(1)
        x0 = rng.standard_normal((4, 2))
        labels = rng.choice([-1.0, 1.0], size=(4, 1))
        proj = make_proj("tanh_affine", d=2, seed=2)
        spec = ol.FunctionalSpec("mse", proj, alpha=0.5)
        u0 = ol.random_control(2, 3, 1.0, seed=5, scale=0.5)
        lr = 1e-3
        g = ol.grad(u0, x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH)
        u1, _ = ol.adam_train(u0, x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH, lr=lr, iters=1)
        step = u1.params[0] - u0.params[0]
        mask = np.abs(g.params[0]) > 1e-8
        np.testing.assert_allclose(np.abs(step[mask]), lr, rtol=1e-4)
        np.testing.assert_allclose(np.sign(step[mask]), -np.sign(g.params[0][mask]))

    def test_l1_iterates_stay_feasible(self):
        rng = np.random.default_rng(2)
        x0 = rng.standard_normal((6, 2))
        labels = rng.choice([-1.0, 1.0], size=(6, 1))
        proj = make_proj("tanh_affine", d=2, seed=3, trainable=True)
        bound = 0.8
        spec = ol.FunctionalSpec("mse", proj, alpha=0.1, l1_mode=True, l1_bound=bound)
        u0 = ol.random_control(2, 5, 2.0, seed=6, scale=1.0)
        u, _ = ol.adam_train(u0, x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH, lr=5e-3, iters=40)
        assert np.max(u.node_norms()) <= bound * (1 + 1e-9)

    def test_decreasing_cost_on_figure_recipe(self):
        # alpha = 1, n_layers = floor(T^1.5), dt = 1/sqrt(T)
        from odelearn.data import augment_zeros, gen_concentric_spheres

        inputs, labels = gen_concentric_spheres(dim=2, n=32, seed=0)
        x0 = augment_zeros(inputs, 3)
        horizon = 4.0
        k = int(np.floor(horizon**1.5))
        proj = make_proj("tanh_affine", d=3, seed=4, trainable=True)
        spec = ol.FunctionalSpec("mse", proj, alpha=1.0)
        u0 = ol.random_control(3, k, horizon, seed=7, scale=0.1)
        _, report = ol.adam_train(u0, x0, labels[:, None], spec, ol.SIGMA_INSIDE, ol.TANH, lr=1e-3, iters=200)
        costs = np.asarray(report.costs)
        assert costs[-1] < costs[0]

    def test_divergence_aborts_with_partial_report(self):
        proj = ol.Projector("linear", np.array([[1.0]]), np.zeros(1))
        spec = ol.FunctionalSpec("mse", proj, alpha=0.0)
        # large enough weight to overflow the forward pass
        u0 = ol.ControlPath.standard(np.full((3, 1, 1), 1e200), np.zeros((3, 1)), horizon=3.0)
        with np.errstate(over="ignore", invalid="ignore"):
            _, report = ol.adam_train(
                u0, np.array([[1.0]]), np.array([[1.0]]), spec, ol.SIGMA_INSIDE, ol.IDENTITY, iters=3
            )
        assert not report.converged
        assert report.iterations < 3 or len(report.costs) <= 3
