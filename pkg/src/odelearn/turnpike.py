"""Diagnostics for the long-horizon structure of trained runs.

Finite-horizon runs cannot certify asymptotic constants, so these tools
measure what the structure looks like: an exponential fit of the distance
to the running target on the leading half of the horizon, the terminal
stabilization gap, a bang-bang classification of node norms, and the
norm-preserving compression of under-saturated control stretches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import ControlPath, StackedTrajectory

_DISTANCE_FLOOR = 1e-12
# A node enters the rate fit only where the mirrored tail term is at most
# 1/50 of the leading term under the first-pass rate estimate.
_TAIL_CONTAMINATION_RATIO = 50.0


@dataclass
class TurnpikeReport:
    times: np.ndarray
    distances: np.ndarray
    gamma: float | None
    mu: float | None
    r_squared: float | None
    degenerate: bool
    mid_mean: float
    final_gap: float
    fractions: dict[str, float] | None = None
    t_prime: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "distances": [float(d) for d in self.distances],
            "gamma": None if self.gamma is None else float(self.gamma),
            "mu": None if self.mu is None else float(self.mu),
            "r_squared": None if self.r_squared is None else float(self.r_squared),
            "degenerate": bool(self.degenerate),
            "mid_mean": float(self.mid_mean),
            "final_gap": float(self.final_gap),
            "fractions": self.fractions,
            "t_prime": None if self.t_prime is None else float(self.t_prime),
        }


def _linear_fit(t: np.ndarray, logd: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(t, logd, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((logd - pred) ** 2))
    ss_tot = float(np.sum((logd - logd.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), r2


def turnpike_fit(traj: StackedTrajectory, x_d: np.ndarray) -> TurnpikeReport:
    """Fit the decay rate of the distance to the running target.

    The rate is estimated by least squares on ``log d_k`` versus ``t`` over
    the leading window ``t <= T/2``, restricted to nodes above the floor
    1e-12.  A second pass drops nodes where the mirrored-tail term would
    contaminate the leading exponential under the first-pass rate, which
    keeps the estimate honest near ``t = T/2``.
    """
    x_d = np.atleast_2d(np.asarray(x_d, dtype=float))
    times = traj.times
    horizon = float(times[-1])
    distances = np.linalg.norm(traj.states - x_d, axis=(1, 2))

    mid = (times >= horizon / 4) & (times <= 3 * horizon / 4)
    mid_mean = float(distances[mid].mean()) if np.any(mid) else float("nan")
    final_gap = float(distances[-1])

    window = (times <= horizon / 2) & (distances > _DISTANCE_FLOOR)
    if np.count_nonzero(window) < 2:
        return TurnpikeReport(
            times=times,
            distances=distances,
            gamma=None,
            mu=None,
            r_squared=None,
            degenerate=True,
            mid_mean=mid_mean,
            final_gap=final_gap,
        )
    t_fit = times[window]
    logd = np.log(distances[window])
    slope, intercept, r2 = _linear_fit(t_fit, logd)
    mu = -slope
    if mu > 0:
        cutoff = horizon / 2 - np.log(_TAIL_CONTAMINATION_RATIO) / (2 * mu)
        keep = t_fit <= cutoff
        if np.count_nonzero(keep) >= 2:
            slope, intercept, r2 = _linear_fit(t_fit[keep], logd[keep])
            mu = -slope
    return TurnpikeReport(
        times=times,
        distances=distances,
        gamma=float(np.exp(intercept)),
        mu=float(mu),
        r_squared=r2,
        degenerate=False,
        mid_mean=mid_mean,
        final_gap=final_gap,
    )


def final_time_gap(traj: StackedTrajectory, x_d: np.ndarray) -> tuple[float, float, bool]:
    """Terminal distance, its minimum over time, and whether the end attains it.

    The flag is ``final <= min + (1e-6 + 1% of min)``; the caller is
    responsible for being in the no-final-cost training regime where this
    is the expected behavior.
    """
    x_d = np.atleast_2d(np.asarray(x_d, dtype=float))
    distances = np.linalg.norm(traj.states - x_d, axis=(1, 2))
    gap = float(distances[-1])
    best = float(distances.min())
    return gap, best, gap <= best + (1e-6 + 0.01 * best)


def bangbang_profile(
    u: ControlPath, bound: float, tol_rel: float
) -> tuple[dict[str, float], float | None]:
    """Classify node norms as at-bound, at-zero, or intermediate.

    Returns the fractions (a partition of the nodes) and the switching
    time: the first node after which every node is at zero, or None when
    the at-zero tail is not contiguous up to the final node.
    """
    if bound <= 0:
        raise ValueError("the norm bound must be positive")
    if not 0.0 < tol_rel < 0.5:
        raise ValueError("tol_rel must lie in (0, 0.5)")
    norms = u.node_norms()
    at_zero = norms <= tol_rel * bound
    at_bound = np.abs(norms - bound) <= tol_rel * bound
    intermediate = ~(at_zero | at_bound)
    k = norms.size
    fractions = {
        "at_bound": float(np.count_nonzero(at_bound)) / k,
        "at_zero": float(np.count_nonzero(at_zero)) / k,
        "intermediate": float(np.count_nonzero(intermediate)) / k,
    }
    suffix = 0
    for flag in at_zero[::-1]:
        if not flag:
            break
        suffix += 1
    t_prime = float(u.t[k - suffix]) if suffix > 0 else None
    if np.all(at_zero):
        t_prime = float(u.t[0])
    return fractions, t_prime


def compress_control(
    u: ControlPath, intervals: list[tuple[float, float]], omega: float
) -> ControlPath:
    """Squeeze the control on the given intervals, then idle.

    On each interval the control is played sped up by the factor
    ``1/(1 - omega)`` with amplitudes scaled up by the same factor, after
    which the control is zero until the interval ends.  Interval endpoints
    and the hand-off instant are snapped to the node grid and the factor is
    recomputed from the snapped times, which keeps the L1 node quadrature
    of the output exactly equal to the input's.  The returned control
    lives on a refined, generally non-uniform grid.
    """
    if not 0.0 < omega < 1.0:
        raise ValueError("omega must lie in (0, 1)")
    if not intervals:
        return u
    t = u.t
    k = u.n_layers

    snapped: list[tuple[int, int]] = []
    for a, b in sorted(intervals):
        if a < t[0] - 1e-12 or b > t[-1] + 1e-12:
            raise ValueError(f"interval ({a}, {b}) leaves [0, {t[-1]}]")
        ia = int(np.argmin(np.abs(t - a)))
        ib = int(np.argmin(np.abs(t - b)))
        if ib <= ia:
            raise ValueError(f"interval ({a}, {b}) snaps to an empty cell range")
        snapped.append((ia, ib))
    for (_, b_prev), (a_next, _) in zip(snapped, snapped[1:]):
        if a_next < b_prev:
            raise ValueError("intervals overlap after snapping")

    new_times: list[float] = [0.0]
    new_blocks: list[tuple[np.ndarray, ...]] = []
    zero_node = tuple(np.zeros(p.shape[1:]) for p in u.params)

    def emit_to(t_end: float, values: tuple[np.ndarray, ...]) -> None:
        if t_end <= new_times[-1]:
            raise ValueError("empty cell while rebuilding the grid")
        new_times.append(float(t_end))
        new_blocks.append(values)

    cursor = 0
    for ia, ib in snapped:
        for j in range(cursor, ia):
            emit_to(t[j + 1], u.at(j))
        n = ib - ia
        m = int(round((1.0 - omega) * n))
        m = min(max(m, 1), n)
        factor = n / m
        for j in range(ia, ib):
            emit_to(t[ia] + (t[j + 1] - t[ia]) / factor, tuple(factor * p for p in u.at(j)))
        if m < n:
            handoff = new_times[-1]
            tol = 1e-12 * max(1.0, t[-1])
            for tb in t[ia + 1 : ib + 1]:
                if tb > handoff + tol:
                    emit_to(float(tb), zero_node)
        cursor = ib
    for j in range(cursor, k):
        emit_to(t[j + 1], u.at(j))

    blocks = tuple(
        np.stack([vals[j] for vals in new_blocks], axis=0) for j in range(len(u.params))
    )
    return ControlPath(np.asarray(new_times), blocks)
