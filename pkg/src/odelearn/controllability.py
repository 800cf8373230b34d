"""Interpolation cost bounds and constructive steering along a linear arc.

The lower bound follows from a pairwise contraction estimate: one shared
weight path cannot increase the separation of two samples faster than
``exp(L_sigma int |w|)``, so classifying close points to distant targets
costs weight mass.  The steering construction solves, at every node, an
underdetermined linear system for the minimal-Frobenius-norm weight that
moves all samples along the straight line toward their targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .activations import Activation
from .dynamics import SIGMA_INSIDE, ControlPath, integrate_forward

_RANK_TOL = 1e-10


class RankDeficiencyError(ValueError):
    """The sampled feature vectors are numerically dependent."""


class LowerBound(NamedTuple):
    value: float
    reason: str | None = None


def weight_lower_bound(
    x0: np.ndarray,
    x1: np.ndarray,
    lipschitz: float,
    horizon: float | None = None,
    norm: str = "l1",
) -> LowerBound:
    """Least weight mass needed to steer every row of x0 to its row of x1.

    Returns ``max over pairs of log(|x1_i - x1_j| / |x0_i - x0_j|) / L``,
    clamped below at zero; the ``l2`` variant divides by ``sqrt(T)``.  The
    value is infinite when two coincident inputs carry distinct targets.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    if x0.shape != x1.shape or x0.shape[0] < 2:
        raise ValueError("need matching input/target rows with at least two samples")
    if lipschitz <= 0:
        raise ValueError("the Lipschitz constant must be positive")
    if norm not in ("l1", "l2"):
        raise ValueError(f"unknown norm {norm!r}")
    if norm == "l2" and (horizon is None or horizon <= 0):
        raise ValueError("the l2 bound needs a positive horizon")
    best = 0.0
    n = x0.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            d0 = float(np.linalg.norm(x0[i] - x0[j]))
            d1 = float(np.linalg.norm(x1[i] - x1[j]))
            if d0 == 0.0:
                if d1 > 0.0:
                    return LowerBound(
                        math.inf,
                        f"samples {i} and {j} coincide but carry distinct targets; "
                        "no control separates them",
                    )
                continue
            if d1 == 0.0:
                continue
            best = max(best, math.log(d1 / d0) / lipschitz)
    if norm == "l2":
        best /= math.sqrt(horizon)
    return LowerBound(best, None)


def least_norm_solve(basis: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Minimal-Frobenius-norm w with ``w @ basis[i] = rhs[i]`` for all rows.

    ``basis`` holds N feature vectors in R^d as rows, N <= d and linearly
    independent (smallest singular value above 1e-10 of the largest).
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    rhs = np.atleast_2d(np.asarray(rhs, dtype=float))
    n, d = basis.shape
    if n > d:
        raise ValueError("need at most d samples for the underdetermined solve")
    if rhs.shape[0] != n:
        raise ValueError("one right-hand side row per basis vector")
    svals = np.linalg.svd(basis, compute_uv=False)
    if svals[-1] <= _RANK_TOL * svals[0]:
        raise RankDeficiencyError(
            f"smallest singular value {svals[-1]:.3e} below tolerance "
            f"{_RANK_TOL:.0e} x {svals[0]:.3e}"
        )
    # rowwise least-norm solution of basis @ w.T = rhs
    return (np.linalg.pinv(basis) @ rhs).T


@dataclass
class SteeringResult:
    control: ControlPath
    steering_error: float
    sup_norm: float
    solve_norm_bound: float  # max over nodes of the solve's operator norm


def steer_linear_arc(
    x0: np.ndarray,
    x1: np.ndarray,
    horizon: float,
    act: Activation,
    n_steps: int,
) -> SteeringResult:
    """Steer all samples along the straight arc to their targets.

    At every node the weight solves the underdetermined system moving each
    sample at the constant velocity ``(x1 - x0) / T``; the bias stays zero.
    The feature vectors ``act(arc(s))`` must be independent at every
    sampled ``s in {0, 1/n, ..., 1}``.  Returns the built control, the
    Euler terminal error, the sup of node weight norms, and the largest
    solve operator norm (so that ``sup_norm <= bound/T * |x0 - x1|``).
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    if x0.shape != x1.shape:
        raise ValueError("initial and target batches must share a shape")
    n, d = x0.shape
    if n > d:
        raise ValueError("the construction needs at most d samples")
    if horizon <= 0 or n_steps < 1:
        raise ValueError("need a positive horizon and at least one step")

    rhs = (x1 - x0) / horizon
    svals_min = math.inf
    op_bound = 0.0
    for k in range(n_steps + 1):
        s = k / n_steps
        feats = act((1 - s) * x0 + s * x1)
        svals = np.linalg.svd(feats, compute_uv=False)
        if svals[-1] <= _RANK_TOL * svals[0]:
            raise RankDeficiencyError(
                f"feature vectors dependent at node {k} (s = {s:.4f}); "
                f"smallest singular value {svals[-1]:.3e}"
            )
        svals_min = min(svals_min, float(svals[-1]))
        op_bound = max(op_bound, 1.0 / float(svals[-1]))

    ws = np.empty((n_steps, d, d))
    for k in range(n_steps):
        s = k / n_steps
        feats = act((1 - s) * x0 + s * x1)
        ws[k] = least_norm_solve(feats, rhs)
    u = ControlPath.standard(ws, np.zeros((n_steps, d)), horizon=horizon)
    traj = integrate_forward(x0, u, SIGMA_INSIDE, act, scheme="euler")
    err = float(np.linalg.norm(traj.final - x1))
    sup = float(np.max(np.linalg.norm(ws.reshape(n_steps, -1), axis=1)))
    return SteeringResult(control=u, steering_error=err, sup_norm=sup, solve_norm_bound=op_bound)
