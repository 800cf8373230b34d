"""Stacked neural ODE dynamics and fixed-step forward integration.

A batch of states is a matrix of shape ``(n_samples, d)``; one shared
control drives every row.  Controls are piecewise constant in time: cell
``k`` holds its parameters on ``[t_k, t_{k+1})``, which is the zero-order
hold realized by direct shooting.  Node times are uniform by default but
the integrator accepts any strictly increasing grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import Activation

SIGMA_OUTSIDE = "sigma_outside"
SIGMA_INSIDE = "sigma_inside"
BOTTLENECK = "bottleneck"
TAGS = (SIGMA_OUTSIDE, SIGMA_INSIDE, BOTTLENECK)

# Safety factor of the a-priori trajectory bound.  The Gronwall argument
# fixes the exponential rate but not the leading constant; this choice is
# conservative and documented as part of the contract.
GRONWALL_SAFETY = float(np.e)

_BOUND_SLACK = 1e-9


class DivergenceError(RuntimeError):
    """Forward integration produced a non-finite state."""

    def __init__(self, node: int):
        super().__init__(f"non-finite state encountered at node {node}")
        self.node = node


class GronwallViolation(RuntimeError):
    """A trajectory exceeded its a-priori norm bound."""


# how many integrations ran with the inline bound assertion enabled
BOUND_CHECKS_RUN = 0


@dataclass(frozen=True)
class ControlPath:
    """Time-sampled parameters of the flow.

    ``params`` is a tuple of arrays whose leading axis enumerates cells:
    ``(ws, bs)`` with shapes ``(K, d, d)`` and ``(K, d)`` for the standard
    variant, or ``(w1s, w2s, b1s, b2s)`` with shapes ``(K, h, d)``,
    ``(K, d, h)``, ``(K, h)``, ``(K, d)`` for the bottleneck variant.
    ``t`` holds the ``K + 1`` cell boundaries with ``t[0] = 0``.
    """

    t: np.ndarray
    params: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        params = tuple(np.asarray(p, dtype=float) for p in self.params)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "params", params)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a control needs at least one cell")
        if not np.all(np.diff(t) > 0):
            raise ValueError("node times must be strictly increasing")
        if t[0] != 0.0:
            raise ValueError("node times must start at 0")
        k = t.size - 1
        if len(params) == 2:
            ws, bs = params
            if ws.shape != (k, ws.shape[1], ws.shape[1]) or ws.ndim != 3:
                raise ValueError("weights must have shape (n_layers, d, d)")
            if bs.shape != (k, ws.shape[1]):
                raise ValueError("biases must have shape (n_layers, d)")
        elif len(params) == 4:
            w1s, w2s, b1s, b2s = params
            if w1s.ndim != 3 or w2s.ndim != 3:
                raise ValueError("bottleneck weights must be 3-dimensional")
            h, d = w1s.shape[1], w1s.shape[2]
            ok = (
                w1s.shape == (k, h, d)
                and w2s.shape == (k, d, h)
                and b1s.shape == (k, h)
                and b2s.shape == (k, d)
            )
            if not ok:
                raise ValueError("inconsistent bottleneck parameter shapes")
        else:
            raise ValueError("expected (w, b) or (w1, w2, b1, b2) parameter blocks")

    @property
    def n_layers(self) -> int:
        return self.t.size - 1

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.t)

    @property
    def variant(self) -> str:
        return "standard" if len(self.params) == 2 else "bottleneck"

    @property
    def d(self) -> int:
        if self.variant == "standard":
            return self.params[0].shape[1]
        return self.params[0].shape[2]

    @property
    def hidden(self) -> int | None:
        if self.variant == "standard":
            return None
        return self.params[0].shape[1]

    def is_uniform(self, tol: float = 1e-12) -> bool:
        dt = self.dt
        return bool(np.max(dt) - np.min(dt) <= tol * self.horizon)

    def node_norms(self) -> np.ndarray:
        """Euclidean norm of the stacked parameter vector at each cell."""
        total = np.zeros(self.n_layers)
        for p in self.params:
            total += np.sum(p.reshape(self.n_layers, -1) ** 2, axis=1)
        return np.sqrt(total)

    def at(self, k: int) -> tuple[np.ndarray, ...]:
        return tuple(p[k] for p in self.params)

    def with_params(self, params: tuple[np.ndarray, ...]) -> "ControlPath":
        return ControlPath(self.t, params)

    def scaled(self, factor: float) -> "ControlPath":
        return self.with_params(tuple(factor * p for p in self.params))

    @classmethod
    def standard(cls, ws, bs, horizon: float | None = None, t=None) -> "ControlPath":
        ws = np.asarray(ws, dtype=float)
        if t is None:
            t = np.linspace(0.0, float(horizon), ws.shape[0] + 1)
        return cls(t, (ws, np.asarray(bs, dtype=float)))

    @classmethod
    def bottleneck(cls, w1s, w2s, b1s, b2s, horizon: float | None = None, t=None) -> "ControlPath":
        w1s = np.asarray(w1s, dtype=float)
        if t is None:
            t = np.linspace(0.0, float(horizon), w1s.shape[0] + 1)
        return cls(t, (w1s, np.asarray(w2s, float), np.asarray(b1s, float), np.asarray(b2s, float)))

    @classmethod
    def zeros(cls, d: int, n_layers: int, horizon: float, hidden: int | None = None) -> "ControlPath":
        t = np.linspace(0.0, horizon, n_layers + 1)
        if hidden is None:
            return cls(t, (np.zeros((n_layers, d, d)), np.zeros((n_layers, d))))
        return cls(
            t,
            (
                np.zeros((n_layers, hidden, d)),
                np.zeros((n_layers, d, hidden)),
                np.zeros((n_layers, hidden)),
                np.zeros((n_layers, d)),
            ),
        )


def random_control(
    d: int,
    n_layers: int,
    horizon: float,
    seed: int,
    scale: float = 0.1,
    hidden: int | None = None,
) -> ControlPath:
    """Seeded Gaussian initialization, the default starting point for training."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, horizon, n_layers + 1)
    if hidden is None:
        params = (
            scale * rng.standard_normal((n_layers, d, d)),
            scale * rng.standard_normal((n_layers, d)),
        )
    else:
        params = (
            scale * rng.standard_normal((n_layers, hidden, d)),
            scale * rng.standard_normal((n_layers, d, hidden)),
            scale * rng.standard_normal((n_layers, hidden)),
            scale * rng.standard_normal((n_layers, d)),
        )
    return ControlPath(t, params)


@dataclass(frozen=True)
class StackedTrajectory:
    """States of all samples at every node, plus the generating control."""

    states: np.ndarray  # (n_layers + 1, n_samples, d)
    control: ControlPath
    tag: str

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=float)
        object.__setattr__(self, "states", states)
        if states.ndim != 3 or states.shape[0] != self.control.n_layers + 1:
            raise ValueError("trajectory length must be n_layers + 1")

    @property
    def times(self) -> np.ndarray:
        return self.control.t

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _check_tag(tag: str, u: ControlPath) -> None:
    if tag not in TAGS:
        raise ValueError(f"unknown parametrization tag {tag!r}")
    if (tag == BOTTLENECK) != (u.variant == "bottleneck"):
        raise ValueError(f"control variant {u.variant!r} does not match tag {tag!r}")


def vector_field(tag: str, params: tuple[np.ndarray, ...], x: np.ndarray, act: Activation) -> np.ndarray:
    """Right-hand side applied rowwise to a state batch of shape (N, d)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("state batch must have shape (n_samples, d)")
    if tag == SIGMA_OUTSIDE:
        w, b = params
        if x.shape[1] != w.shape[1]:
            raise ValueError(f"state dimension {x.shape[1]} does not match weights {w.shape}")
        return act(x @ w.T + b)
    if tag == SIGMA_INSIDE:
        w, b = params
        if x.shape[1] != w.shape[1]:
            raise ValueError(f"state dimension {x.shape[1]} does not match weights {w.shape}")
        return act(x) @ w.T + b
    if tag == BOTTLENECK:
        w1, w2, b1, b2 = params
        if x.shape[1] != w1.shape[1]:
            raise ValueError(f"state dimension {x.shape[1]} does not match weights {w1.shape}")
        return act(x @ w1.T + b1) @ w2.T + b2
    raise ValueError(f"unknown parametrization tag {tag!r}")


def gronwall_bound(x0: np.ndarray, u: ControlPath, act: Activation) -> float:
    """A-priori bound on the stacked state norm along [0, T].

    Shape: ``C * (|x0| + sqrt(T) * |c|_L2) * exp(sqrt(T) * |a|_L2)`` with
    ``C = n_samples * max(1, L_sigma) * e``.  For the standard variants
    ``a = |w|`` and ``c`` collects the bias plus, when ``sigma(0) != 0``, a
    drift term; for the bottleneck variant the product ``|w1| |w2|`` takes
    the role of the weight norm.  All norms are Frobenius.
    """
    x0 = np.asarray(x0, dtype=float)
    n, d = x0.shape
    L = act.lipschitz_constant
    s0 = float(abs(act(np.zeros(1))[0]))
    k = u.n_layers
    if u.variant == "standard":
        ws, bs = u.params
        wn = np.linalg.norm(ws.reshape(k, -1), axis=1)
        bn = np.linalg.norm(bs, axis=1)
        a = wn
        c = bn + s0 * np.sqrt(d * n) * (1.0 + wn)
    else:
        w1s, w2s, b1s, b2s = u.params
        h = u.hidden
        w1n = np.linalg.norm(w1s.reshape(k, -1), axis=1)
        w2n = np.linalg.norm(w2s.reshape(k, -1), axis=1)
        b1n = np.linalg.norm(b1s, axis=1)
        b2n = np.linalg.norm(b2s, axis=1)
        a = w1n * w2n
        c = w2n * (L * b1n + s0 * np.sqrt(h)) + b2n
    dt = u.dt
    horizon = u.horizon
    a_l2 = float(np.sqrt(np.sum(a**2 * dt)))
    c_l2 = float(np.sqrt(np.sum(c**2 * dt)))
    const = n * max(1.0, L) * GRONWALL_SAFETY
    return const * (np.linalg.norm(x0) + np.sqrt(horizon) * c_l2) * np.exp(np.sqrt(horizon) * a_l2)


def integrate_forward(
    x0: np.ndarray,
    u: ControlPath,
    tag: str,
    act: Activation,
    scheme: str = "euler",
    check_bound: bool = True,
) -> StackedTrajectory:
    """Integrate the stacked flow with the held control of each cell.

    Euler is the reference scheme (``x^{k+1} = x^k + dt_k f(u^k, x^k)``);
    RK4 evaluates the held control at all four stage points.  Every node is
    checked against :func:`gronwall_bound` unless ``check_bound`` is off.
    """
    x0 = np.asarray(x0, dtype=float)
    _check_tag(tag, u)
    if x0.ndim != 2 or x0.shape[1] != u.d:
        raise ValueError(f"initial state must have shape (n_samples, {u.d})")
    if not np.all(np.isfinite(x0)):
        raise DivergenceError(0)
    if scheme not in ("euler", "rk4"):
        raise ValueError(f"unknown scheme {scheme!r}")
    bound = np.inf
    if check_bound:
        global BOUND_CHECKS_RUN
        BOUND_CHECKS_RUN += 1
        bound = gronwall_bound(x0, u, act) * (1.0 + _BOUND_SLACK) + 1e-12

    k = u.n_layers
    dt = u.dt
    states = np.empty((k + 1,) + x0.shape)
    states[0] = x0
    x = x0
    for i in range(k):
        p = u.at(i)
        h = dt[i]
        if scheme == "euler":
            x = x + h * vector_field(tag, p, x, act)
        else:
            k1 = vector_field(tag, p, x, act)
            k2 = vector_field(tag, p, x + 0.5 * h * k1, act)
            k3 = vector_field(tag, p, x + 0.5 * h * k2, act)
            k4 = vector_field(tag, p, x + h * k3, act)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(i + 1)
        if np.linalg.norm(x) > bound:
            raise GronwallViolation(
                f"state norm {np.linalg.norm(x):.6g} exceeds a-priori bound {bound:.6g} at node {i + 1}"
            )
        states[i + 1] = x
    return StackedTrajectory(states, u, tag)
