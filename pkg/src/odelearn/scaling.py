"""Exact time rescaling of controls and the scaled-cost identity.

For positively homogeneous dynamics, moving a control from horizon T0 to
horizon T by ``u'(t) = (T0/T) u(t T0/T)`` reproduces the original flow on
the stretched time axis.  At the Euler level the identity
``dt' f(u', x) = dt f(u, x)`` is algebraic, so rescaled trajectories match
the original ones node for node.
"""

from __future__ import annotations

import numpy as np

from .activations import Activation
from .dynamics import (
    BOTTLENECK,
    SIGMA_INSIDE,
    SIGMA_OUTSIDE,
    ControlPath,
    integrate_forward,
)
from .training import FunctionalSpec, cost, reg_norm, training_error


def is_homogeneous(tag: str, act: Activation) -> bool:
    """Whether the vector field is positively homogeneous in the parameters."""
    if tag == SIGMA_INSIDE:
        return True
    if tag == SIGMA_OUTSIDE:
        return act.positively_homogeneous
    return False  # the bottleneck field is quadratic in its parameter blocks


def _require_homogeneous(tag: str, act: Activation) -> None:
    if not is_homogeneous(tag, act):
        raise ValueError(
            f"time rescaling needs parameter-homogeneous dynamics; "
            f"{tag!r} with activation {act.kind!r} is not"
        )


def rescale_control(
    u: ControlPath, horizon: float, tag: str | None = None, act: Activation | None = None
) -> ControlPath:
    """Move a control to a new horizon, preserving the node count.

    Node times scale by ``horizon / T0`` and values by ``T0 / horizon``.
    When ``tag``/``act`` are supplied the configuration is checked for
    homogeneity and rejected otherwise.
    """
    if horizon <= 0:
        raise ValueError("target horizon must be positive")
    if tag is not None:
        if act is None:
            raise ValueError("an activation is needed to check homogeneity")
        _require_homogeneous(tag, act)
    t0 = u.horizon
    t = u.t * (horizon / t0)
    t[0] = 0.0
    t[-1] = horizon
    return ControlPath(t, tuple((t0 / horizon) * p for p in u.params))


def scaled_cost_identity(
    u0: ControlPath,
    horizon: float,
    x0: np.ndarray,
    labels: np.ndarray,
    spec: FunctionalSpec,
    tag: str,
    act: Activation,
) -> tuple[float, float]:
    """Both sides of the horizon-change cost identity.

    lhs: cost of the rescaled control at the new horizon.
    rhs: terminal error of the original run plus ``(alpha/2)(T0/T)`` times
    the squared L2 norm of the original control.
    """
    _require_homogeneous(tag, act)
    if spec.sobolev_order != 0 or spec.beta != 0 or spec.l1_mode or not spec.include_final_cost:
        raise ValueError("the identity is stated for k=0, beta=0, final cost included")
    lhs = cost(rescale_control(u0, horizon), x0, labels, spec, tag, act)
    traj0 = integrate_forward(np.atleast_2d(np.asarray(x0, float)), u0, tag, act, scheme="euler")
    rhs = training_error(traj0.final, labels, spec.projector, spec.loss_kind)
    rhs += 0.5 * spec.alpha * (u0.horizon / horizon) * reg_norm(u0, 0)
    return lhs, rhs
