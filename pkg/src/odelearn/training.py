"""Losses, projectors, cost functionals, exact gradients, and Adam training.

Gradients are computed by reverse-mode differentiation of the unrolled
Euler scheme; no autodiff framework is involved.  Regularization terms are
discretized with documented quadratures so that every test value is
bit-reproducible:

* squared L2 term: exact integral of the zero-order hold,
  ``sum_k |u^k|^2 dt_k`` (for a constant control this is ``|c|^2 T``);
* H1 derivative term: forward differences ``(u^{k+1} - u^k) / dt_k`` at the
  interior boundaries, each weighted by ``(dt_k + dt_{k+1}) / 2``;
* L1 term: ``sum_k |u^k| dt_k``;
* state tracking: trapezoid over the node samples.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .activations import Activation
from .dynamics import (
    BOTTLENECK,
    SIGMA_INSIDE,
    SIGMA_OUTSIDE,
    ControlPath,
    DivergenceError,
    GronwallViolation,
    StackedTrajectory,
    integrate_forward,
)

LOSS_KINDS = ("mse", "logistic")
PROJECTOR_KINDS = ("linear", "softmax", "tanh_affine")


class ConstraintViolation(ValueError):
    """A control is infeasible for the norm-constrained functional."""


@dataclass
class Projector:
    """Affine read-out ``theta1 x + theta2`` with an optional nonlinearity.

    ``softmax`` rows are positive and sum to 1; ``tanh_affine`` requires a
    one-dimensional output and maps into (-1, 1).
    """

    kind: str
    theta1: np.ndarray
    theta2: np.ndarray
    trainable: bool = False

    def __post_init__(self) -> None:
        if self.kind not in PROJECTOR_KINDS:
            raise ValueError(f"unknown projector kind {self.kind!r}")
        self.theta1 = np.atleast_2d(np.asarray(self.theta1, dtype=float))
        self.theta2 = np.atleast_1d(np.asarray(self.theta2, dtype=float))
        if self.theta2.shape != (self.theta1.shape[0],):
            raise ValueError("theta2 must have one entry per output")
        if self.kind == "tanh_affine" and self.out_dim != 1:
            raise ValueError("tanh_affine requires m = 1")

    @property
    def out_dim(self) -> int:
        return self.theta1.shape[0]

    @property
    def in_dim(self) -> int:
        return self.theta1.shape[1]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        z = x @ self.theta1.T + self.theta2
        if self.kind == "softmax":
            z = z - z.max(axis=1, keepdims=True)
            e = np.exp(z)
            return e / e.sum(axis=1, keepdims=True)
        if self.kind == "tanh_affine":
            return np.tanh(z)
        return z

    @classmethod
    def identity(cls, d: int) -> "Projector":
        return cls("linear", np.eye(d), np.zeros(d))


def _loss_values(pred: np.ndarray, labels: np.ndarray, kind: str) -> np.ndarray:
    if kind == "mse":
        m = pred.shape[1]
        return 0.5 / m * np.sum((pred - labels) ** 2, axis=1)
    if kind == "logistic":
        s = np.sum(pred * labels, axis=1)
        return np.logaddexp(0.0, -s)
    raise ValueError(f"unknown loss kind {kind!r}")


def _loss_grad(pred: np.ndarray, labels: np.ndarray, kind: str) -> np.ndarray:
    if kind == "mse":
        return (pred - labels) / pred.shape[1]
    if kind == "logistic":
        s = np.sum(pred * labels, axis=1)
        # d/ds log(1 + e^{-s}) = -sigmoid(-s), written stably
        g = np.where(s >= 0, -np.exp(-np.logaddexp(0.0, s)), -1.0 / (1.0 + np.exp(s)))
        return g[:, None] * labels
    raise ValueError(f"unknown loss kind {kind!r}")


def training_error(final_state: np.ndarray, labels: np.ndarray, projector: Projector, loss_kind: str) -> float:
    """Mean loss of the projected terminal states against the labels."""
    labels = np.atleast_2d(np.asarray(labels, dtype=float))
    pred = projector(final_state)
    if pred.shape != labels.shape:
        raise ValueError(f"predictions {pred.shape} and labels {labels.shape} disagree")
    return float(np.mean(_loss_values(pred, labels, loss_kind)))


def _phi_with_grad(
    x: np.ndarray, labels: np.ndarray, projector: Projector, loss_kind: str, want_theta: bool
):
    """Training error at a state batch plus gradients wrt x and theta."""
    n = x.shape[0]
    z = x @ projector.theta1.T + projector.theta2
    if projector.kind == "softmax":
        zs = z - z.max(axis=1, keepdims=True)
        e = np.exp(zs)
        pred = e / e.sum(axis=1, keepdims=True)
    elif projector.kind == "tanh_affine":
        pred = np.tanh(z)
    else:
        pred = z
    value = float(np.mean(_loss_values(pred, labels, loss_kind)))
    dpred = _loss_grad(pred, labels, loss_kind) / n
    if projector.kind == "softmax":
        dz = pred * (dpred - np.sum(dpred * pred, axis=1, keepdims=True))
    elif projector.kind == "tanh_affine":
        dz = (1.0 - pred**2) * dpred
    else:
        dz = dpred
    dx = dz @ projector.theta1
    if want_theta:
        return value, dx, dz.T @ x, dz.sum(axis=0)
    return value, dx, None, None


@dataclass
class FunctionalSpec:
    """Which cost to minimize.

    With ``l1_mode`` off the cost is ``[include_final_cost] phi(x(T)) +
    (alpha/2) |u|^2_{H^k} + (beta/2) int |x - x_d|^2``.  With ``l1_mode``
    on it is ``[include_final_cost] phi(x(T)) + (alpha/2) |u|_{L1} +
    int phi(x(t)) dt`` subject to ``|u^k| <= l1_bound`` at every node; the
    running term tracks the training error itself with coefficient one, and
    ``beta``, ``x_d`` and ``sobolev_order`` are ignored.
    """

    loss_kind: str
    projector: Projector
    alpha: float = 0.0
    beta: float = 0.0
    sobolev_order: int = 0
    x_d: np.ndarray | None = None
    l1_mode: bool = False
    l1_bound: float | None = None
    include_final_cost: bool = True
    min_phi: float = 0.0

    def __post_init__(self) -> None:
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.loss_kind!r}")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.sobolev_order not in (0, 1):
            raise ValueError("sobolev_order must be 0 or 1")
        if self.l1_mode:
            if self.l1_bound is None or self.l1_bound <= 0:
                raise ValueError("l1_mode requires a positive l1_bound")
        else:
            if self.beta > 0 and self.x_d is None:
                raise ValueError("beta > 0 requires a tracking target x_d")
            if not self.include_final_cost and self.beta == 0:
                raise ValueError("dropping the final cost requires beta > 0")
        if self.x_d is not None:
            self.x_d = np.atleast_2d(np.asarray(self.x_d, dtype=float))


@dataclass
class CostParts:
    total: float
    final_error: float
    reg: float
    tracking: float


@dataclass
class CostGradient:
    """Gradient with the same block structure as the control."""

    params: tuple[np.ndarray, ...]
    theta1: np.ndarray | None = None
    theta2: np.ndarray | None = None

    def flat(self) -> np.ndarray:
        blocks = [p.ravel() for p in self.params]
        if self.theta1 is not None:
            blocks += [self.theta1.ravel(), self.theta2.ravel()]
        return np.concatenate(blocks)


def reg_norm(u: ControlPath, order: int) -> float:
    """Squared H^k norm of the control under the documented quadratures."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    dt = u.dt
    total = float(np.sum(u.node_norms() ** 2 * dt))
    if order == 1:
        if u.n_layers < 2:
            raise ValueError("H^1 seminorm needs at least two parameter nodes")
        weights = 0.5 * (dt[:-1] + dt[1:])
        dsq = np.zeros(u.n_layers - 1)
        for p in u.params:
            diffs = np.diff(p, axis=0) / dt[:-1].reshape((-1,) + (1,) * (p.ndim - 1))
            dsq += np.sum(diffs.reshape(u.n_layers - 1, -1) ** 2, axis=1)
        total += float(np.sum(dsq * weights))
    return total


def l1_norm(u: ControlPath) -> float:
    """L1 node quadrature of the stacked parameter norm."""
    return float(np.sum(u.node_norms() * u.dt))


def _tracking_weights(t: np.ndarray) -> np.ndarray:
    w = np.zeros(t.size)
    dt = np.diff(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def _check_feasible(u: ControlPath, bound: float) -> None:
    norms = u.node_norms()
    worst = float(np.max(norms))
    if worst > bound * (1.0 + 1e-9):
        raise ConstraintViolation(f"node norm {worst:.6g} exceeds the bound {bound:.6g}")


def cost_parts(
    u: ControlPath,
    x0: np.ndarray,
    labels: np.ndarray,
    spec: FunctionalSpec,
    tag: str,
    act: Activation,
    traj: StackedTrajectory | None = None,
) -> CostParts:
    labels = np.atleast_2d(np.asarray(labels, dtype=float))
    if spec.l1_mode:
        _check_feasible(u, spec.l1_bound)
    if traj is None:
        traj = integrate_forward(x0, u, tag, act, scheme="euler")
    final_error = training_error(traj.final, labels, spec.projector, spec.loss_kind)

    if spec.l1_mode:
        reg = 0.5 * spec.alpha * l1_norm(u)
    else:
        reg = 0.5 * spec.alpha * reg_norm(u, spec.sobolev_order)

    tracking = 0.0
    weights = _tracking_weights(u.t)
    if spec.l1_mode:
        phis = np.array(
            [training_error(traj.states[k], labels, spec.projector, spec.loss_kind) for k in range(u.n_layers + 1)]
        )
        tracking = float(np.sum(weights * phis))
    elif spec.beta > 0:
        gaps = traj.states - spec.x_d
        tracking = 0.5 * spec.beta * float(np.sum(weights * np.sum(gaps**2, axis=(1, 2))))

    total = reg + tracking
    if spec.include_final_cost:
        total += final_error
    return CostParts(total=total, final_error=final_error, reg=reg, tracking=tracking)


def cost(
    u: ControlPath,
    x0: np.ndarray,
    labels: np.ndarray,
    spec: FunctionalSpec,
    tag: str,
    act: Activation,
) -> float:
    return cost_parts(u, x0, labels, spec, tag, act).total


def _field_vjp(
    tag: str, params: tuple[np.ndarray, ...], x: np.ndarray, act: Activation, upstream: np.ndarray
):
    """Vector-Jacobian products of the vector field wrt state and parameters."""
    if tag == SIGMA_OUTSIDE:
        w, b = params
        z = x @ w.T + b
        p = act.derivative(z) * upstream
        return p @ w, (p.T @ x, p.sum(axis=0))
    if tag == SIGMA_INSIDE:
        w, b = params
        s = act(x)
        dx = act.derivative(x) * (upstream @ w)
        return dx, (upstream.T @ s, upstream.sum(axis=0))
    if tag == BOTTLENECK:
        w1, w2, b1, b2 = params
        z = x @ w1.T + b1
        hidden = act(z)
        q = act.derivative(z) * (upstream @ w2)
        dx = q @ w1
        return dx, (q.T @ x, upstream.T @ hidden, q.sum(axis=0), upstream.sum(axis=0))
    raise ValueError(f"unknown parametrization tag {tag!r}")


def grad(
    u: ControlPath,
    x0: np.ndarray,
    labels: np.ndarray,
    spec: FunctionalSpec,
    tag: str,
    act: Activation,
    traj: StackedTrajectory | None = None,
) -> CostGradient:
    """Exact reverse-mode derivative of ``cost`` through the Euler unrolling."""
    labels = np.atleast_2d(np.asarray(labels, dtype=float))
    if traj is None:
        traj = integrate_forward(x0, u, tag, act, scheme="euler")
    states = traj.states
    k = u.n_layers
    dt = u.dt
    weights = _tracking_weights(u.t)
    want_theta = spec.projector.trainable

    gparams = tuple(np.zeros_like(p) for p in u.params)
    gth1 = np.zeros_like(spec.projector.theta1) if want_theta else None
    gth2 = np.zeros_like(spec.projector.theta2) if want_theta else None

    def accumulate_theta(d1, d2):
        nonlocal gth1, gth2
        if want_theta:
            gth1 += d1
            gth2 += d2

    lam = np.zeros_like(states[-1])
    if spec.include_final_cost:
        _, dx, d1, d2 = _phi_with_grad(states[-1], labels, spec.projector, spec.loss_kind, want_theta)
        lam += dx
        accumulate_theta(d1, d2)
    if spec.l1_mode:
        _, dx, d1, d2 = _phi_with_grad(states[-1], labels, spec.projector, spec.loss_kind, want_theta)
        lam += weights[k] * dx
        if want_theta:
            accumulate_theta(weights[k] * d1, weights[k] * d2)
    elif spec.beta > 0:
        lam += spec.beta * weights[k] * (states[-1] - spec.x_d)

    for i in range(k - 1, -1, -1):
        x = states[i]
        upstream = dt[i] * lam
        dx_dyn, dp = _field_vjp(tag, u.at(i), x, act, upstream)
        for g, block in zip(gparams, dp):
            g[i] += block
        lam = lam + dx_dyn
        if spec.l1_mode:
            _, dx, d1, d2 = _phi_with_grad(x, labels, spec.projector, spec.loss_kind, want_theta)
            lam += weights[i] * dx
            if want_theta:
                accumulate_theta(weights[i] * d1, weights[i] * d2)
        elif spec.beta > 0:
            lam += spec.beta * weights[i] * (x - spec.x_d)

    if spec.l1_mode:
        norms = u.node_norms()
        safe = np.where(norms > 0, norms, 1.0)
        coeff = 0.5 * spec.alpha * dt / safe * (norms > 0)
        for g, p in zip(gparams, u.params):
            g += coeff.reshape((-1,) + (1,) * (p.ndim - 1)) * p
    elif spec.alpha > 0:
        for g, p in zip(gparams, u.params):
            g += spec.alpha * dt.reshape((-1,) + (1,) * (p.ndim - 1)) * p
        if spec.sobolev_order == 1:
            w_int = 0.5 * (dt[:-1] + dt[1:])
            for g, p in zip(gparams, u.params):
                shape = (-1,) + (1,) * (p.ndim - 1)
                diffs = np.diff(p, axis=0) / dt[:-1].reshape(shape)
                pull = spec.alpha * (w_int / dt[:-1]).reshape(shape) * diffs
                g[1:] += pull
                g[:-1] -= pull
    return CostGradient(gparams, gth1, gth2)


def project_ball(u: ControlPath, bound: float) -> ControlPath:
    """Radially project every node onto the ball of radius ``bound``."""
    if bound <= 0:
        raise ValueError("the projection radius must be positive")
    norms = u.node_norms()
    factor = np.where(norms > bound * (1.0 + 1e-12), bound / np.where(norms > 0, norms, 1.0), 1.0)
    params = tuple(factor.reshape((-1,) + (1,) * (p.ndim - 1)) * p for p in u.params)
    return u.with_params(params)


@dataclass
class TrainReport:
    costs: list[float] = field(default_factory=list)
    final_training_error: float = float("nan")
    final_reg: float = float("nan")
    final_tracking: float = float("nan")
    wall_clock_s: float = 0.0
    iterations: int = 0
    converged: bool = False

    def to_json_dict(self) -> dict:
        return {
            "costs": [float(c) for c in self.costs],
            "final_training_error": float(self.final_training_error),
            "final_reg": float(self.final_reg),
            "final_tracking": float(self.final_tracking),
            "wall_clock_s": float(self.wall_clock_s),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }


class _Adam:
    """Standard Adam on a list of arrays (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, shapes, lr: float):
        self.lr = lr
        self.beta1, self.beta2, self.eps = 0.9, 0.999, 1e-8
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, values, grads):
        self.t += 1
        out = []
        for i, (x, g) in enumerate(zip(values, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g**2
            mh = self.m[i] / (1 - self.beta1**self.t)
            vh = self.v[i] / (1 - self.beta2**self.t)
            out.append(x - self.lr * mh / (np.sqrt(vh) + self.eps))
        return out


def adam_train(
    u_init: ControlPath | None,
    x0: np.ndarray,
    labels: np.ndarray,
    spec: FunctionalSpec,
    tag: str,
    act: Activation,
    lr: float = 1e-3,
    iters: int = 1000,
    seed: int = 0,
    stop_below: float | None = None,
    init_scale: float = 0.1,
    hidden: int | None = None,
    n_layers: int | None = None,
    horizon: float | None = None,
) -> tuple[ControlPath, TrainReport]:
    """Full-batch Adam on the chosen functional.

    The run is deterministic given the seed, which is only consumed when
    ``u_init`` is None and a fresh control has to be drawn.  In ``l1_mode``
    every step is followed by the ball projection, so all iterates are
    feasible.  When the projector is trainable its parameters are updated
    in place.  ``stop_below`` stops early once the training error drops
    under the threshold.
    """
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    from .dynamics import random_control

    if u_init is None:
        if n_layers is None or horizon is None:
            raise ValueError("need n_layers and horizon to draw a fresh control")
        u = random_control(x0.shape[1], n_layers, horizon, seed=seed, scale=init_scale, hidden=hidden)
    else:
        u = u_init
    if spec.l1_mode:
        u = project_ball(u, spec.l1_bound)

    want_theta = spec.projector.trainable
    values = list(u.params) + ([spec.projector.theta1, spec.projector.theta2] if want_theta else [])
    opt = _Adam([v.shape for v in values], lr)

    report = TrainReport()
    started = time.perf_counter()
    aborted = False
    parts = None
    for it in range(iters):
        try:
            traj = integrate_forward(x0, u, tag, act, scheme="euler")
            parts = cost_parts(u, x0, labels, spec, tag, act, traj=traj)
        except (DivergenceError, GronwallViolation):
            aborted = True
            break
        if not np.isfinite(parts.total):
            aborted = True
            break
        report.costs.append(parts.total)
        report.iterations = it + 1
        if stop_below is not None and parts.final_error <= stop_below:
            report.converged = True
            break
        g = grad(u, x0, labels, spec, tag, act, traj=traj)
        grads = list(g.params) + ([g.theta1, g.theta2] if want_theta else [])
        values = opt.step(values, grads)
        n_blocks = len(u.params)
        u = u.with_params(tuple(values[:n_blocks]))
        if spec.l1_mode:
            u = project_ball(u, spec.l1_bound)
            values[:n_blocks] = list(u.params)
        if want_theta:
            spec.projector.theta1 = values[n_blocks]
            spec.projector.theta2 = values[n_blocks + 1]
    else:
        report.converged = bool(parts is not None and np.isfinite(parts.total))

    if not aborted:
        try:
            final = cost_parts(u, x0, labels, spec, tag, act)
        except (DivergenceError, GronwallViolation):
            aborted = True
            final = None
        if final is not None:
            report.final_training_error = final.final_error
            report.final_reg = final.reg
            report.final_tracking = final.tracking
            if stop_below is not None and final.final_error <= stop_below:
                report.converged = True
    if aborted:
        report.converged = False
        if parts is not None and np.isfinite(parts.total):
            report.final_training_error = parts.final_error
            report.final_reg = parts.reg
            report.final_tracking = parts.tracking
    report.wall_clock_s = time.perf_counter() - started
    return u, report
