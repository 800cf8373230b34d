import numpy as np
import pytest

import odelearn as ol
from odelearn.data import augment_zeros, gen_concentric_spheres


def affine_interp_oracle(times, values, query):
    """Plain piecewise-linear interpolation with endpoint hold."""
    out = []
    for q in query:
        if q <= times[0]:
            out.append(values[0])
        elif q >= times[-1]:
            out.append(values[-1])
        else:
            j = np.searchsorted(times, q)
            t0, t1 = times[j - 1], times[j]
            lam = (q - t0) / (t1 - t0)
            out.append((1 - lam) * values[j - 1] + lam * values[j])
    return np.asarray(out)


class TestGrowDepth:
    def test_depth_must_increase(self):
        u = ol.random_control(2, 4, 2.0, seed=0)
        for bad in (4, 3, 1):
            with pytest.raises(ValueError):
                ol.grow_depth(u, bad)

    def test_constant_path_scales_by_horizon_ratio(self):
        c = 0.8
        u = ol.ControlPath.standard(np.full((2, 1, 1), c), np.zeros((2, 1)), horizon=1.0)
        grown = ol.grow_depth(u, 5)
        assert grown.n_layers == 5
        np.testing.assert_allclose(grown.horizon, 2.5)
        np.testing.assert_allclose(grown.params[0], c * 1.0 / 2.5)

    def test_linear_ramp_matches_interpolation_oracle(self):
        # ramp 0 -> 1 over [0, 1] with dt = 0.5, grown to 4 cells
        vals = np.array([0.0, 1.0])
        u = ol.ControlPath.standard(vals.reshape(2, 1, 1), np.zeros((2, 1)), horizon=1.0)
        grown = ol.grow_depth(u, 4)
        t0, t1 = 1.0, 2.0
        query = np.arange(4) * 0.5 * (t0 / t1)
        expected = (t0 / t1) * affine_interp_oracle(np.array([0.0, 0.5]), vals, query)
        np.testing.assert_allclose(grown.params[0].ravel(), expected, rtol=1e-14)

    def test_shared_abscissae_reproduce_rescaled_path(self):
        # when the new grid hits the rescaled old nodes exactly, the values
        # there are exactly the rescaled old values
        u = ol.random_control(2, 3, 3.0, seed=1, scale=0.7)
        grown = ol.grow_depth(u, 6)  # ratio 1/2: new node 2k maps onto old node k
        for k in range(3):
            np.testing.assert_allclose(grown.params[0][2 * k], 0.5 * u.params[0][k], rtol=1e-14)
            np.testing.assert_allclose(grown.params[1][2 * k], 0.5 * u.params[1][k], rtol=1e-14)


class TestResampleUniform:
    def test_constant_preserved(self):
        u = ol.ControlPath.standard(np.full((3, 1, 1), 2.0), np.zeros((3, 1)), horizon=1.5)
        v = ol.resample_uniform(u, 7)
        np.testing.assert_allclose(v.params[0], 2.0)
        assert v.horizon == u.horizon


def small_problem(seed=0, n=24):
    inputs, labels = gen_concentric_spheres(dim=2, n=n, seed=seed)
    x0 = augment_zeros(inputs, 3)
    rng = np.random.default_rng(seed + 1)
    proj = ol.Projector("tanh_affine", 0.1 * rng.standard_normal((1, 3)), np.zeros(1), trainable=True)
    spec = ol.FunctionalSpec("mse", proj, alpha=0.05)
    return x0, labels[:, None], spec


class TestGreedyPretrain:
    def test_schedule_validation(self):
        x0, labels, spec = small_problem()
        with pytest.raises(ValueError):
            ol.greedy_pretrain(x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH,
                               dt=0.5, n0=4, schedule=[4, 8], tol=0.1)
        with pytest.raises(ValueError):
            ol.greedy_pretrain(x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH,
                               dt=0.5, n0=4, schedule=[8], tol=-1.0)

    def test_loose_tolerance_stops_at_first_stage(self):
        x0, labels, spec = small_problem()
        result = ol.greedy_pretrain(x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH,
                                    dt=0.5, n0=2, schedule=[4, 8], tol=10.0,
                                    iters_per_stage=5, seed=0)
        assert result.trained_depths == [2]
        assert result.converged

    def test_error_does_not_grow_across_stages(self):
        x0, labels, spec = small_problem(seed=3)
        result = ol.greedy_pretrain(x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH,
                                    dt=0.5, n0=4, schedule=[8, 16], tol=1e-6,
                                    iters_per_stage=400, seed=3)
        errs = [r.final_training_error for r in result.reports]
        for earlier, later in zip(errs, errs[1:]):
            assert later <= earlier * 1.05

    def test_warm_start_beats_cold_start(self):
        # paired run at depth 8: transplanting the depth-4 solution reaches
        # the tolerance in fewer iterations than a cold start with the seed
        tol = 0.02
        x0, labels, spec = small_problem(seed=5)
        u0 = ol.random_control(3, 4, 2.0, seed=5, scale=0.1)
        u4, _ = ol.adam_train(u0, x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH,
                              lr=1e-3, iters=1500, seed=5)
        u8 = ol.grow_depth(u4, 8)
        _, warm = ol.adam_train(u8, x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH,
                                lr=1e-3, iters=6000, seed=5, stop_below=tol)
        assert warm.converged

        x0c, labelsc, spec_cold = small_problem(seed=5)
        u0c = ol.random_control(3, 8, 4.0, seed=5, scale=0.1)
        _, cold = ol.adam_train(u0c, x0c, labelsc, spec_cold, ol.SIGMA_INSIDE, ol.TANH,
                                lr=1e-3, iters=6000, seed=5, stop_below=tol)
        assert (not cold.converged) or warm.iterations < cold.iterations


class TestWindowedTurnpikeTrain:
    def make_tracking_problem(self, seed=0, n=16):
        inputs, labels = gen_concentric_spheres(dim=2, n=n, seed=seed)
        x0 = augment_zeros(inputs, 3)
        x_d = np.zeros((n, 3))
        x_d[:, :2] = 2.0 * labels[:, None]
        rng = np.random.default_rng(seed + 1)
        proj = ol.Projector("tanh_affine", 0.1 * rng.standard_normal((1, 3)), np.zeros(1), trainable=True)
        spec = ol.FunctionalSpec("mse", proj, alpha=2.0, beta=100.0, x_d=x_d,
                                 include_final_cost=False)
        return x0, labels[:, None], spec, x_d

    def test_huge_tolerance_single_window(self):
        x0, labels, spec, _ = self.make_tracking_problem()
        result = ol.windowed_turnpike_train(x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH,
                                            window_horizon=5.0, n_layers_per_window=10,
                                            eps=100.0, max_windows=4, iters_per_window=5)
        assert result.n_windows == 1
        assert result.converged

    def test_stitched_node_count(self):
        x0, labels, spec, _ = self.make_tracking_problem(seed=1)
        result = ol.windowed_turnpike_train(x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH,
                                            window_horizon=2.0, n_layers_per_window=6,
                                            eps=1e-12, max_windows=3, iters_per_window=5)
        assert not result.converged
        assert result.n_windows == 3
        assert result.control.n_layers == 3 * 6
        np.testing.assert_allclose(result.control.horizon, 6.0)

    def test_windows_approach_single_solve_plateau(self):
        # four windows of T1 = 5 against one T = 20 solve: both settle on the
        # same flat stretch near the target; the curves agree within 20% of
        # the problem's distance scale over the plateau
        x0, labels, spec, x_d = self.make_tracking_problem(seed=2, n=32)
        windowed = ol.windowed_turnpike_train(x0, labels, spec, ol.SIGMA_INSIDE, ol.TANH,
                                              window_horizon=5.0, n_layers_per_window=13,
                                              eps=1e-9, max_windows=4, lr=3e-3,
                                              iters_per_window=6000, seed=2)
        traj_w = ol.integrate_forward(x0, windowed.control, ol.SIGMA_INSIDE, ol.TANH)

        x0s, labelss, spec_single, _ = self.make_tracking_problem(seed=2, n=32)
        u0 = ol.random_control(3, 52, 20.0, seed=2, scale=0.1)
        u_single, _ = ol.adam_train(u0, x0s, labelss, spec_single, ol.SIGMA_INSIDE, ol.TANH,
                                    lr=3e-3, iters=8000, seed=2)
        traj_s = ol.integrate_forward(x0s, u_single, ol.SIGMA_INSIDE, ol.TANH)

        d0 = np.linalg.norm(x0 - x_d)

        def plateau_curve(traj):
            d = np.linalg.norm(traj.states - x_d, axis=(1, 2))
            t = traj.times
            return d[(t >= 5.0) & (t <= 15.0)]

        a, b = plateau_curve(traj_w), plateau_curve(traj_s)
        assert a.mean() < 0.1 * d0
        assert b.mean() < 0.1 * d0
        assert abs(a.mean() - b.mean()) <= 0.2 * d0

    def test_spec_gate(self):
        x0, labels, spec, _ = self.make_tracking_problem(seed=3)
        bad = ol.FunctionalSpec("mse", spec.projector, alpha=1.0)
        with pytest.raises(ValueError):
            ol.windowed_turnpike_train(x0, labels, bad, ol.SIGMA_INSIDE, ol.TANH,
                                       window_horizon=1.0, n_layers_per_window=4,
                                       eps=0.1, max_windows=2)
