"""Variable-width networks as space-time discretizations on (0, 1).

The state is a scalar profile sampled on a per-layer uniform grid whose
node count may change from layer to layer.  A two-point interpolation
matrix P carries samples between consecutive grids, composite trapezoid
weights discretize the kernel integral, and the stored kernel matrices are
pre-multiplied by those weights.  With a fixed grid and the quadrature
weights folded out, the scheme reproduces the finite-dimensional flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import Activation
from .dynamics import (
    SIGMA_INSIDE,
    SIGMA_OUTSIDE,
    ControlPath,
    StackedTrajectory,
    integrate_forward,
)

_UNIFORM_TOL = 1e-12
_COINCIDENCE_TOL = 1e-14


def uniform_grid(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("a grid needs at least two nodes")
    return np.linspace(0.0, 1.0, n)


def _check_grid(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ValueError("a grid needs at least two nodes")
    if abs(g[0]) > _UNIFORM_TOL or abs(g[-1] - 1.0) > _UNIFORM_TOL:
        raise ValueError("grids span [0, 1]")
    h = 1.0 / (g.size - 1)
    if np.max(np.abs(np.diff(g) - h)) > _UNIFORM_TOL:
        raise ValueError("grid spacing must be uniform")
    return g


@dataclass(frozen=True)
class SpaceGrid:
    """One sorted uniform grid on [0, 1] per time node."""

    grids: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "grids", tuple(_check_grid(g) for g in self.grids))
        if len(self.grids) < 2:
            raise ValueError("need at least two time nodes")

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(g.size for g in self.grids)

    @classmethod
    def from_widths(cls, widths: list[int]) -> "SpaceGrid":
        return cls(tuple(uniform_grid(w) for w in widths))


@dataclass(frozen=True)
class KernelPath:
    """Weight-premultiplied kernel samples and biases between grids.

    ``ws[k]`` has shape ``(d_{k+1}, d_k)`` and already carries the
    quadrature weights of the source grid; ``bs[k]`` has shape
    ``(d_{k+1},)``.
    """

    ws: tuple[np.ndarray, ...]
    bs: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ws = tuple(np.asarray(w, dtype=float) for w in self.ws)
        bs = tuple(np.asarray(b, dtype=float) for b in self.bs)
        object.__setattr__(self, "ws", ws)
        object.__setattr__(self, "bs", bs)
        if len(ws) != len(bs) or not ws:
            raise ValueError("need one (w, b) pair per layer")
        for k, (w, b) in enumerate(zip(ws, bs)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"kernel/bias shapes disagree at layer {k}")
            if k > 0 and ws[k - 1].shape[0] != w.shape[1]:
                raise ValueError(f"kernel widths do not chain at layer {k}")

    @property
    def n_layers(self) -> int:
        return len(self.ws)


def quadrature_weights(n: int) -> np.ndarray:
    """Composite trapezoid weights on the uniform n-node grid; they sum to 1."""
    if n < 2:
        raise ValueError("need at least two nodes")
    h = 1.0 / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def build_projection(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Two-point interpolation matrix carrying samples from src to dst.

    Row j interpolates linearly between the two source nodes bracketing
    ``dst[j]``; when a target abscissa coincides with a source node the row
    is a unit row.  Every row sums to 1 and samples of affine functions are
    reproduced exactly.
    """
    src = _check_grid(src)
    dst = np.asarray(dst, dtype=float)
    if np.any(dst < -_COINCIDENCE_TOL) or np.any(dst > 1.0 + _COINCIDENCE_TOL):
        raise ValueError("target abscissa outside [0, 1]")
    p = np.zeros((dst.size, src.size))
    for j, xj in enumerate(dst):
        idx = int(np.searchsorted(src, xj))
        if idx < src.size and abs(src[idx] - xj) <= _COINCIDENCE_TOL:
            p[j, idx] = 1.0
            continue
        if idx > 0 and abs(src[idx - 1] - xj) <= _COINCIDENCE_TOL:
            p[j, idx - 1] = 1.0
            continue
        # src[idx - 1] < xj < src[idx]
        a = (xj - src[idx]) / (src[idx] - src[idx - 1])
        p[j, idx] = 1.0 + a
        p[j, idx - 1] = -a
    return p


def nonlocal_step(
    z: np.ndarray,
    w: np.ndarray,
    b: np.ndarray,
    p: np.ndarray,
    tag: str,
    act: Activation,
) -> np.ndarray:
    """One layer of the variable-width scheme."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or w.shape[1] != z.size or p.shape != w.shape:
        raise ValueError("state, kernel, and projection shapes disagree")
    if tag == SIGMA_OUTSIDE:
        return p @ z + act(w @ z + b)
    if tag == SIGMA_INSIDE:
        return p @ z + w @ act(z) + b
    raise ValueError(f"unsupported tag {tag!r} for the nonlocal scheme")


def integrate_nonlocal(
    z0: np.ndarray,
    grid: SpaceGrid,
    kernels: KernelPath,
    tag: str,
    act: Activation,
) -> list[np.ndarray]:
    """Fold the scheme over all layers; returns the state at every node."""
    z0 = np.asarray(z0, dtype=float)
    widths = grid.widths
    if kernels.n_layers != len(widths) - 1:
        raise ValueError("kernel layers must match grid transitions")
    if z0.size != widths[0]:
        raise ValueError(f"initial profile has {z0.size} samples, grid expects {widths[0]}")
    states = [z0]
    z = z0
    for k in range(kernels.n_layers):
        if kernels.ws[k].shape != (widths[k + 1], widths[k]):
            raise ValueError(f"kernel shape mismatch at layer {k}")
        p = build_projection(grid.grids[k], grid.grids[k + 1])
        z = nonlocal_step(z, kernels.ws[k], kernels.bs[k], p, tag, act)
        states.append(z)
    return states


def dirac_fixed_grid_equivalence(
    u: ControlPath,
    x0: np.ndarray,
    act: Activation,
    tag: str,
) -> float:
    """Max deviation between the fixed-grid scheme and the stacked flow.

    The finite-dimensional instance is embedded on a fixed d-node grid:
    the stored kernel equals the finite-dimensional weights (quadrature
    weights folded out) scaled by the time step, which turns each layer
    into exactly one Euler step.  For the sigma-outside form the scaling
    only commutes with positively homogeneous activations, so other
    activations are accepted only on unit time steps.
    """
    if u.variant != "standard":
        raise ValueError("the embedding covers the standard parametrization")
    if tag not in (SIGMA_OUTSIDE, SIGMA_INSIDE):
        raise ValueError(f"unsupported tag {tag!r}")
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    dt = u.dt
    if tag == SIGMA_OUTSIDE and not act.positively_homogeneous:
        if np.max(np.abs(dt - 1.0)) > 1e-12:
            raise ValueError(
                "sigma-outside embedding needs a positively homogeneous "
                "activation or unit time steps"
            )
    d = u.d
    ws, bs = u.params
    eye = np.eye(d)  # coincident fixed grids make every interpolation row a unit row
    reference = integrate_forward(x0, u, tag, act, scheme="euler")
    worst = 0.0
    for i in range(x0.shape[0]):
        z = x0[i]
        stacked = [z]
        for k in range(u.n_layers):
            z = nonlocal_step(z, dt[k] * ws[k], dt[k] * bs[k], eye, tag, act)
            stacked.append(z)
        worst = max(worst, float(np.max(np.abs(np.stack(stacked) - reference.states[:, i, :]))))
    return worst
