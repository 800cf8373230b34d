"""Depth-growing training strategies.

Two schedules are provided: rescale-and-deepen, which trains a shallow
network and repeatedly transplants the learned control onto a deeper one
at fixed time step, and windowed training, which solves the tracking
problem on consecutive windows of fixed length, restarting each window
from the previous terminal state until the terminal training error is
within tolerance of its minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import Activation
from .dynamics import ControlPath, StackedTrajectory, integrate_forward, random_control
from .training import FunctionalSpec, TrainReport, adam_train, training_error


def grow_depth(u: ControlPath, n_new: int) -> ControlPath:
    """Transplant a control onto a deeper grid with the same time step.

    The node values are affinely interpolated to a continuous path on
    [0, T0] (held constant beyond the last parameter node), rescaled to the
    longer horizon T1 = dt * n_new, and sampled back at the grid nodes.
    """
    k0 = u.n_layers
    if n_new <= k0:
        raise ValueError("target depth must exceed the current depth")
    if not u.is_uniform():
        raise ValueError("depth growth expects a uniform grid")
    dt = float(u.dt[0])
    t0 = u.horizon
    t1 = dt * n_new
    ratio = t0 / t1
    src = u.t[:-1]
    dst = np.arange(n_new) * dt * ratio
    new_params = []
    for p in u.params:
        flat = p.reshape(k0, -1)
        cols = [np.interp(dst, src, flat[:, j]) for j in range(flat.shape[1])]
        sampled = np.stack(cols, axis=1).reshape((n_new,) + p.shape[1:])
        new_params.append(ratio * sampled)
    t = np.arange(n_new + 1) * dt
    t[-1] = t1
    return ControlPath(t, tuple(new_params))


def resample_uniform(u: ControlPath, n_new: int) -> ControlPath:
    """Affinely resample the node values onto a uniform grid, same horizon."""
    if n_new < 1:
        raise ValueError("need at least one cell")
    k0 = u.n_layers
    src = u.t[:-1]
    t = np.linspace(0.0, u.horizon, n_new + 1)
    dst = t[:-1]
    new_params = []
    for p in u.params:
        flat = p.reshape(k0, -1)
        cols = [np.interp(dst, src, flat[:, j]) for j in range(flat.shape[1])]
        new_params.append(np.stack(cols, axis=1).reshape((n_new,) + p.shape[1:]))
    return ControlPath(t, tuple(new_params))


@dataclass
class GreedyResult:
    control: ControlPath
    reports: list[TrainReport]
    trained_depths: list[int]
    converged: bool


def greedy_pretrain(
    x0: np.ndarray,
    labels: np.ndarray,
    spec: FunctionalSpec,
    tag: str,
    act: Activation,
    dt: float,
    n0: int,
    schedule: list[int],
    tol: float,
    lr: float = 1e-3,
    iters_per_stage: int = 500,
    seed: int = 0,
    init_scale: float = 0.1,
    hidden: int | None = None,
) -> GreedyResult:
    """Train shallow first, then deepen until the training error meets tol.

    Depth never grows past the first stage that meets the tolerance, and
    the projector parameters ride along between stages.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if dt <= 0:
        raise ValueError("time step must be positive")
    depths = list(schedule)
    if any(b <= a for a, b in zip([n0] + depths, depths)):
        raise ValueError("the growth schedule must be strictly increasing from n0")
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    u = random_control(x0.shape[1], n0, dt * n0, seed=seed, scale=init_scale, hidden=hidden)
    reports: list[TrainReport] = []
    trained: list[int] = []
    converged = False
    stage_depths = [n0] + depths
    for i, depth in enumerate(stage_depths):
        if i > 0:
            u = grow_depth(u, depth)
        u, rep = adam_train(
            u, x0, labels, spec, tag, act, lr=lr, iters=iters_per_stage, seed=seed, stop_below=tol
        )
        reports.append(rep)
        trained.append(depth)
        if rep.final_training_error <= tol:
            converged = True
            break
    return GreedyResult(control=u, reports=reports, trained_depths=trained, converged=converged)


@dataclass
class WindowedResult:
    control: ControlPath
    reports: list[TrainReport]
    window_errors: list[float]
    converged: bool

    @property
    def n_windows(self) -> int:
        return len(self.reports)


def _concat_controls(controls: list[ControlPath]) -> ControlPath:
    times = [controls[0].t]
    offset = controls[0].horizon
    for c in controls[1:]:
        times.append(offset + c.t[1:])
        offset += c.horizon
    t_all = np.concatenate(times)
    blocks = tuple(
        np.concatenate([c.params[j] for c in controls], axis=0)
        for j in range(len(controls[0].params))
    )
    return ControlPath(t_all, blocks)


def windowed_turnpike_train(
    x0: np.ndarray,
    labels: np.ndarray,
    spec: FunctionalSpec,
    tag: str,
    act: Activation,
    window_horizon: float,
    n_layers_per_window: int,
    eps: float,
    max_windows: int,
    lr: float = 1e-3,
    iters_per_window: int = 500,
    seed: int = 0,
    init_scale: float = 0.1,
) -> WindowedResult:
    """Solve the tracking problem window by window.

    Each window starts from the previous terminal state.  Controls are
    freshly initialized per window from the same seed: the previous
    window's transient arc is a poor starting point for a window that
    begins near the target, while the trainable projector rides along.
    Stops once the window's terminal training error is within ``eps`` of
    the configured minimum, or after ``max_windows`` with converged=False.
    """
    if window_horizon <= 0 or eps <= 0:
        raise ValueError("window horizon and tolerance must be positive")
    if spec.include_final_cost or not (spec.beta > 0 or spec.l1_mode):
        raise ValueError("windowed training expects a running-cost functional without final cost")
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    state = x0
    controls: list[ControlPath] = []
    reports: list[TrainReport] = []
    errors: list[float] = []
    converged = False
    for _ in range(max_windows):
        u = random_control(x0.shape[1], n_layers_per_window, window_horizon, seed=seed, scale=init_scale)
        u, rep = adam_train(u, state, labels, spec, tag, act, lr=lr, iters=iters_per_window, seed=seed)
        traj = integrate_forward(state, u, tag, act, scheme="euler")
        state = traj.final
        err = training_error(state, labels, spec.projector, spec.loss_kind)
        controls.append(u)
        reports.append(rep)
        errors.append(err)
        if abs(err - spec.min_phi) < eps:
            converged = True
            break
    stitched = _concat_controls(controls)
    return WindowedResult(control=stitched, reports=reports, window_errors=errors, converged=converged)
